//! The three subcommands. Each returns rendered text and a pass flag; the
//! binary maps them to stdout and an exit code.

use std::f64::consts::PI;

use kdqlab_core::kdq::{
    kd_joint, marginals, overlap_direct, overlap_from_kd, unitary_from_actions, ActionSpectrum,
    KDDistribution,
};
use kdqlab_core::qcore::TOL;
use kdqlab_core::scenarios::{
    bell_chsh, cheshire_cat, hardy, leggett_garg, peres_mermin_swap, three_box, Check,
    ScenarioReport, Value,
};
use kdqlab_core::weaksim::{weak_values, weak_limit_sweep, PointerConfig, PointerModel};
use serde::{Deserialize, Serialize};

use crate::file::Loaded;
use crate::render::{complex, csv_text, grid, json_text, num, phase, Format, Maybe};
use crate::CliError;

pub const SCENARIOS: [&str; 6] = ["leggett-garg", "three-box", "cheshire-cat", "hardy", "peres-mermin", "bell"];
/// Width-to-coupling ratios of the weak-limit sweep.
pub const SWEEP_RATIOS: [f64; 6] = [2.0, 4.0, 8.0, 16.0, 32.0, 64.0];
/// Agreement required between the KD and direct overlaps of a file.
pub const OVERLAP_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub text: String,
    pub warnings: Vec<String>,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Labels {
    pub m: Vec<String>,
    pub b: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KdJson {
    pub labels: Labels,
    /// `re[m][b]`.
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarginalsJson {
    pub m: Vec<f64>,
    pub b: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NegativityJson {
    pub total: f64,
    pub min_real: f64,
    pub argmin: [String; 2],
    pub max_abs_phase: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CheckValue {
    Real(f64),
    Complex([f64; 2]),
}

impl CheckValue {
    fn text(&self) -> String {
        match *self {
            CheckValue::Real(x) => num(x),
            CheckValue::Complex([re, im]) => complex(re, im),
        }
    }
}

impl From<Value> for CheckValue {
    fn from(v: Value) -> Self {
        match v {
            Value::Real(x) => CheckValue::Real(x),
            Value::Complex(z) => CheckValue::Complex([z.re, z.im]),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckJson {
    pub name: String,
    pub expected: CheckValue,
    pub got: CheckValue,
    pub tolerance: f64,
    pub pass: bool,
}

impl From<&Check> for CheckJson {
    fn from(c: &Check) -> Self {
        Self {
            name: c.name.clone(),
            expected: c.expected.into(),
            got: c.got.into(),
            tolerance: c.tolerance,
            pass: c.pass,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Quantity {
    pub name: String,
    pub value: f64,
}

/// Overlap `|<b|U|a>|^2` by the KD route and by the matrix element.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OverlapRow {
    pub b: String,
    pub from_kd: Maybe,
    pub direct: f64,
    pub difference: Maybe,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub scenario: String,
    pub dim: usize,
    pub kd: KdJson,
    pub marginals: MarginalsJson,
    pub negativity: NegativityJson,
    pub checks: Vec<CheckJson>,
    #[serde(default)]
    pub quantities: Vec<Quantity>,
    #[serde(default)]
    pub violated_inequality: Option<String>,
    /// Action phases of the transformation, in `m` order.
    #[serde(default)]
    pub action_phase: Option<Vec<f64>>,
    #[serde(default)]
    pub overlaps: Option<Vec<OverlapRow>>,
    pub passed: bool,
}

fn kd_json(kd: &KDDistribution) -> KdJson {
    let d = kd.dim();
    let part = |f: fn(&kdqlab_core::Complex64) -> f64| {
        (0..d).map(|m| (0..d).map(|b| f(&kd.entry(m, b))).collect()).collect()
    };
    KdJson {
        labels: Labels {
            m: kd.basis_m().labels().to_vec(),
            b: kd.basis_b().labels().to_vec(),
        },
        re: part(|z| z.re),
        im: part(|z| z.im),
    }
}

fn overlap_rows(kd: &KDDistribution, spectrum: &ActionSpectrum) -> Result<Vec<OverlapRow>, CliError> {
    let u = unitary_from_actions(spectrum);
    (0..kd.dim())
        .map(|b| {
            let direct = overlap_direct(kd.state(), kd.basis_b().vector(b), &u)?;
            let from_kd = match overlap_from_kd(kd, spectrum, b) {
                Ok(x) => Some(x),
                Err(kdqlab_core::Error::UndefinedOverlap(_)) => None,
                Err(e) => return Err(e.into()),
            };
            Ok(OverlapRow {
                b: kd.basis_b().label(b).to_owned(),
                from_kd: Maybe(from_kd),
                direct,
                difference: Maybe(from_kd.map(|x| x - direct)),
            })
        })
        .collect()
}

impl Report {
    pub fn from_scenario(r: &ScenarioReport) -> Result<Self, CliError> {
        let marg = marginals(&r.kd)?;
        let overlaps = r.transformation.as_ref().map(|s| overlap_rows(&r.kd, s)).transpose()?;
        Ok(Self {
            scenario: r.scenario.clone(),
            dim: r.dim,
            kd: kd_json(&r.kd),
            marginals: MarginalsJson { m: marg.m, b: marg.b },
            negativity: NegativityJson {
                total: r.negativity.total_negativity,
                min_real: r.negativity.min_real,
                argmin: [r.negativity.argmin.0.clone(), r.negativity.argmin.1.clone()],
                max_abs_phase: r.negativity.max_abs_phase,
            },
            checks: r.checks.iter().map(CheckJson::from).collect(),
            quantities: r
                .quantities
                .iter()
                .map(|(name, value)| Quantity { name: name.clone(), value: *value })
                .collect(),
            violated_inequality: r.violated_inequality.clone(),
            action_phase: r.transformation.as_ref().map(|s| s.phases().to_vec()),
            overlaps,
            passed: r.passed(),
        })
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Table => self.table(),
            Format::Json => json_text(self),
            Format::Csv => self.csv(),
        }
    }

    fn cells(&self) -> Vec<Vec<String>> {
        let mut rows = Vec::new();
        for (m, ml) in self.kd.labels.m.iter().enumerate() {
            for (b, bl) in self.kd.labels.b.iter().enumerate() {
                let (re, im) = (self.kd.re[m][b], self.kd.im[m][b]);
                rows.push(vec![
                    ml.clone(),
                    bl.clone(),
                    num(re),
                    num(im),
                    num(re.hypot(im)),
                    phase(re, im, TOL).text(),
                ]);
            }
        }
        rows
    }

    fn csv(&self) -> String {
        csv_text(&["m_label", "b_label", "re", "im", "modulus", "phase"], &self.cells())
    }

    fn table(&self) -> String {
        let mut out = format!("scenario: {}\ndimension: {}\n\n", self.scenario, self.dim);

        out.push_str("joint quasi-probability P(m,b|a), rows m, columns b\n");
        let mut headers = vec!["m \\ b".to_owned()];
        headers.extend(self.kd.labels.b.iter().cloned());
        headers.push("P(m|a)".into());
        let mut rows: Vec<Vec<String>> = self
            .kd
            .labels
            .m
            .iter()
            .enumerate()
            .map(|(m, label)| {
                let mut row = vec![label.clone()];
                row.extend((0..self.dim).map(|b| complex(self.kd.re[m][b], self.kd.im[m][b])));
                row.push(num(self.marginals.m[m]));
                row
            })
            .collect();
        let mut last = vec!["P(b|a)".to_owned()];
        last.extend(self.marginals.b.iter().map(|&x| num(x)));
        rows.push(last);
        out.push_str(&grid(&headers, &rows));

        out.push_str("\nmodulus and action phase of each entry\n");
        let headers: Vec<String> = ["m", "b", "re", "im", "modulus", "phase"].map(String::from).to_vec();
        out.push_str(&grid(&headers, &self.cells()));

        out.push_str(&format!(
            "\nnegativity: total {}, most negative {} at (m={}, b={}), max |phase| {}\n",
            num(self.negativity.total),
            num(self.negativity.min_real),
            self.negativity.argmin[0],
            self.negativity.argmin[1],
            num(self.negativity.max_abs_phase),
        ));
        if let Some(v) = &self.violated_inequality {
            out.push_str(&format!("violated by any positive joint distribution: {v}\n"));
        }
        if !self.quantities.is_empty() {
            out.push('\n');
            for q in &self.quantities {
                out.push_str(&format!("{} = {}\n", q.name, num(q.value)));
            }
        }
        if let (Some(phases), Some(rows)) = (&self.action_phase, &self.overlaps) {
            let shown: Vec<String> = phases.iter().map(|&p| num(p)).collect();
            out.push_str(&format!("\ntransition probabilities for action phases ({})\n", shown.join(", ")));
            let headers: Vec<String> = ["b", "from KD", "direct", "difference"].map(String::from).to_vec();
            let rows: Vec<Vec<String>> = rows
                .iter()
                .map(|r| vec![r.b.clone(), r.from_kd.text(), num(r.direct), r.difference.text()])
                .collect();
            out.push_str(&grid(&headers, &rows));
        }
        if !self.checks.is_empty() {
            out.push_str("\nchecks\n");
            let headers: Vec<String> = ["", "name", "expected", "got", "tolerance"].map(String::from).to_vec();
            let rows: Vec<Vec<String>> = self
                .checks
                .iter()
                .map(|c| {
                    vec![
                        if c.pass { "PASS" } else { "FAIL" }.to_owned(),
                        c.name.clone(),
                        c.expected.text(),
                        c.got.text(),
                        num(c.tolerance),
                    ]
                })
                .collect();
            out.push_str(&left_grid(&headers, &rows));
        }
        let failed = self.checks.iter().filter(|c| !c.pass).count();
        out.push_str(&if failed == 0 {
            format!("\nPASS: {} checks\n", self.checks.len())
        } else {
            format!("\nFAIL: {failed} of {} checks\n", self.checks.len())
        });
        out
    }
}

/// Like [`grid`] but with the second (name) column left-aligned.
fn left_grid(headers: &[String], rows: &[Vec<String>]) -> String {
    let width = rows.iter().map(|r| r[1].chars().count()).max().unwrap_or(0).max(headers[1].len());
    let pad = |s: &str| format!("{s:width$}");
    let headers: Vec<String> = headers.iter().enumerate().map(|(i, h)| if i == 1 { pad(h) } else { h.clone() }).collect();
    let rows: Vec<Vec<String>> = rows
        .iter()
        .map(|r| r.iter().enumerate().map(|(i, c)| if i == 1 { pad(c) } else { c.clone() }).collect())
        .collect();
    grid(&headers, &rows)
}

/// Runs a built-in scenario. `theta` is in radians.
pub fn run_scenario(name: &str, theta: Option<f64>, format: Format) -> Result<Outcome, CliError> {
    let no_theta = |r: kdqlab_core::Result<ScenarioReport>| match theta {
        Some(_) => Err(CliError::Usage(format!("scenario {name} takes no --theta"))),
        None => Ok(r?),
    };
    let report = match name {
        "leggett-garg" => leggett_garg(theta.unwrap_or(PI / 3.0))?,
        "bell" => bell_chsh(theta.unwrap_or(PI / 4.0))?.to_scenario_report(),
        "three-box" => no_theta(three_box())?,
        "cheshire-cat" => no_theta(cheshire_cat())?,
        "hardy" => no_theta(hardy())?,
        "peres-mermin" => no_theta(peres_mermin_swap())?,
        other => {
            return Err(CliError::Usage(format!(
                "unknown scenario `{other}`; expected one of {}",
                SCENARIOS.join(", ")
            )))
        }
    };
    let report = Report::from_scenario(&report)?;
    Ok(Outcome { text: report.render(format), warnings: Vec::new(), passed: report.passed })
}

/// Table, marginals, negativity and, with action phases, both overlap routes.
pub fn kd_report(loaded: &Loaded) -> Result<Report, CliError> {
    let kd = kd_joint(&loaded.state, &loaded.basis_m, &loaded.basis_b)?;
    let mut checks = Vec::new();
    let total: f64 = (0..kd.dim()).map(|m| kd.row_sum(m).re).sum();
    checks.push(Check::real("sum of all entries", 1.0, total, TOL));
    let invariants = kd.check_invariants();
    checks.push(Check::holds("row and column sums are Born probabilities", invariants.is_ok()));
    let mut scenario = ScenarioReport::new(&loaded.name, kd, checks);
    scenario.transformation = loaded.action.clone();
    let mut report = Report::from_scenario(&scenario)?;
    if let Some(rows) = &report.overlaps {
        for r in rows {
            if let Some(d) = r.difference.0 {
                report.checks.push(CheckJson::from(&Check::real(
                    format!("overlap for b={}: KD route = direct", r.b),
                    0.0,
                    d,
                    OVERLAP_TOL,
                )));
            }
        }
        report.passed = report.checks.iter().all(|c| c.pass);
    }
    Ok(report)
}

pub fn run_kd(loaded: &Loaded, format: Format) -> Result<Outcome, CliError> {
    let report = kd_report(loaded)?;
    Ok(Outcome { text: report.render(format), warnings: loaded.warnings.clone(), passed: report.passed })
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeakOptions {
    pub kappa: Option<Vec<f64>>,
    pub coupling: f64,
    pub width: f64,
    pub shots: usize,
    pub seed: u64,
    pub sweep: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeakRow {
    pub b: String,
    pub probability: f64,
    pub probability_quadrature: f64,
    /// `g Re <A>_w`.
    pub weak_limit: Maybe,
    pub mean_closed: Maybe,
    pub mean_quadrature: Maybe,
    pub mean_empirical: Maybe,
    pub standard_error: Maybe,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepJson {
    pub ratio: f64,
    /// `E[x|b]/g` per `b`.
    pub scaled_means: Vec<Maybe>,
    /// `|E[x|b]/g - Re <A>_w|` per `b`.
    pub errors: Vec<Maybe>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeakReport {
    pub scenario: String,
    pub kappa: Vec<f64>,
    pub coupling: f64,
    pub width: f64,
    pub shots: usize,
    pub seed: u64,
    pub rows: Vec<WeakRow>,
    #[serde(default)]
    pub sweep: Option<Vec<SweepJson>>,
    pub checks: Vec<CheckJson>,
    pub passed: bool,
}

pub fn weak_report(loaded: &Loaded, opts: &WeakOptions) -> Result<WeakReport, CliError> {
    let kappa = opts
        .kappa
        .clone()
        .or_else(|| loaded.kappa.clone())
        .ok_or_else(|| CliError::Usage("no eigenvalues: pass --kappa or add `kappa` to the file".into()))?;
    if kappa.len() != loaded.state.dim() {
        return Err(CliError::Input(format!(
            "--kappa has {} entries, expected dim = {}",
            kappa.len(),
            loaded.state.dim()
        )));
    }
    if opts.shots == 0 {
        return Err(CliError::Usage("--shots must be at least 1".into()));
    }
    let (a, bm, bb) = (&loaded.state, &loaded.basis_m, &loaded.basis_b);
    let cfg = PointerConfig::new(opts.coupling, opts.width, kappa.clone())?;
    let model = PointerModel::new(a, bm, bb, &cfg)?;
    let weak = weak_values(a, bm, bb, &kappa)?;
    let batch = model.sample(opts.shots, opts.seed)?;

    let mut checks = Vec::new();
    let mut rows = Vec::new();
    let mut total = 0.0;
    for b in 0..bb.dim() {
        let label = bb.label(b).to_owned();
        let q = model.quadrature(b)?;
        total += q.mass;
        let closed = match model.conditional_mean(b) {
            Ok(x) => Some(x),
            Err(kdqlab_core::Error::VanishingPostSelection(_)) => None,
            Err(e) => return Err(e.into()),
        };
        if let (Some(c), Some(qm)) = (closed, q.mean) {
            checks.push(Check::real(format!("b={label}: closed-form mean = quadrature"), c, qm, 1e-8));
        }
        let emp = batch.conditional(b);
        rows.push(WeakRow {
            b: label,
            probability: model.mass(b)?,
            probability_quadrature: q.mass,
            weak_limit: Maybe(weak[b].map(|w| opts.coupling * w.re)),
            mean_closed: Maybe(closed),
            mean_quadrature: Maybe(q.mean),
            mean_empirical: Maybe(emp.map(|e| e.mean)),
            standard_error: Maybe(emp.filter(|e| e.count > 1).map(|e| e.standard_error())),
            count: emp.map_or(0, |e| e.count),
        });
    }
    checks.insert(0, Check::real("total probability (quadrature)", 1.0, total, 1e-6));

    let sweep = if opts.sweep {
        let sweep = weak_limit_sweep(a, bm, bb, &kappa, opts.coupling, &SWEEP_RATIOS)?;
        Some(
            sweep
                .into_iter()
                .map(|row| SweepJson {
                    ratio: row.ratio,
                    errors: row
                        .scaled_means
                        .iter()
                        .zip(&weak)
                        .map(|(m, w)| Maybe(m.zip(*w).map(|(m, w)| (m - w.re).abs())))
                        .collect(),
                    scaled_means: row.scaled_means.into_iter().map(Maybe).collect(),
                })
                .collect(),
        )
    } else {
        None
    };

    let checks: Vec<CheckJson> = checks.iter().map(CheckJson::from).collect();
    Ok(WeakReport {
        scenario: loaded.name.clone(),
        kappa,
        coupling: opts.coupling,
        width: opts.width,
        shots: opts.shots,
        seed: opts.seed,
        rows,
        sweep,
        passed: checks.iter().all(|c| c.pass),
        checks,
    })
}

impl WeakReport {
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Table => self.table(),
            Format::Json => json_text(self),
            Format::Csv => self.csv(),
        }
    }

    fn row_cells(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|r| {
                vec![
                    r.b.clone(),
                    num(r.probability),
                    num(r.probability_quadrature),
                    r.weak_limit.text(),
                    r.mean_closed.text(),
                    r.mean_quadrature.text(),
                    r.mean_empirical.text(),
                    r.standard_error.text(),
                    r.count.to_string(),
                ]
            })
            .collect()
    }

    const ROW_HEADERS: [&'static str; 9] = [
        "b",
        "P(b)",
        "P(b) quadrature",
        "g Re weak value",
        "mean closed",
        "mean quadrature",
        "mean empirical",
        "standard error",
        "shots",
    ];

    fn sweep_cells(&self, sweep: &[SweepJson]) -> Vec<Vec<String>> {
        let mut rows = Vec::new();
        for s in sweep {
            for (b, label) in self.rows.iter().map(|r| &r.b).enumerate() {
                rows.push(vec![num(s.ratio), label.clone(), s.scaled_means[b].text(), s.errors[b].text()]);
            }
        }
        rows
    }

    /// Per-`b` rows, or the sweep in long form when one was requested.
    fn csv(&self) -> String {
        match &self.sweep {
            Some(s) => csv_text(&["ratio", "b_label", "mean_over_g", "error"], &self.sweep_cells(s)),
            None => csv_text(
                &[
                    "b_label",
                    "probability",
                    "probability_quadrature",
                    "weak_limit",
                    "mean_closed",
                    "mean_quadrature",
                    "mean_empirical",
                    "standard_error",
                    "shots",
                ],
                &self.row_cells(),
            ),
        }
    }

    fn table(&self) -> String {
        let kappa: Vec<String> = self.kappa.iter().map(|&k| num(k)).collect();
        let mut out = format!(
            "scenario: {}\nkappa: ({})\ncoupling g = {}, width s = {}, s/g = {}\nshots = {}, seed = {}\n\n",
            self.scenario,
            kappa.join(", "),
            num(self.coupling),
            num(self.width),
            num(self.width / self.coupling),
            self.shots,
            self.seed,
        );
        let headers: Vec<String> = Self::ROW_HEADERS.map(String::from).to_vec();
        out.push_str(&grid(&headers, &self.row_cells()));
        if let Some(s) = &self.sweep {
            out.push_str("\nweak-limit sweep: E[x|b]/g and its distance from Re weak value\n");
            let headers: Vec<String> = ["s/g", "b", "E[x|b]/g", "error"].map(String::from).to_vec();
            out.push_str(&grid(&headers, &self.sweep_cells(s)));
        }
        out.push_str("\nchecks\n");
        for c in &self.checks {
            out.push_str(&format!(
                "{}  {}: expected {}, got {}, tolerance {}\n",
                if c.pass { "PASS" } else { "FAIL" },
                c.name,
                c.expected.text(),
                c.got.text(),
                num(c.tolerance)
            ));
        }
        out
    }
}

pub fn run_weak(loaded: &Loaded, opts: &WeakOptions, format: Format) -> Result<Outcome, CliError> {
    let report = weak_report(loaded, opts)?;
    Ok(Outcome { text: report.render(format), warnings: loaded.warnings.clone(), passed: report.passed })
}
