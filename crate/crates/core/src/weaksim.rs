//! Von Neumann measurement with a Gaussian position pointer.
//!
//! The intermediate observable `A = sum_m kappa_m |m><m|` shifts a pointer
//! of initial width `s` by `g kappa_m`. After post-selection on `b`, the
//! pointer amplitude is `sum_m c_m G(x - g kappa_m)` with
//! `c_m = <b|m><m|a>`, so the joint density of reading `x` and finding `b` is
//! never negative even when individual `c_m` interfere destructively.
//!
//! Large `s/g` is the weak limit (the conditional pointer mean approaches
//! `g Re <A>_w`); small `s/g` is the projective limit.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kdq::weak_value;
use crate::qcore::{inner, projector, Operator, OrthonormalBasis, StateVector, TOL};

/// Shots drawn from one generator stream.
pub const CHUNK: usize = 1 << 16;
/// Points of the tabulated inverse CDF.
pub const GRID_POINTS: usize = 1 << 14;
/// Eigenvalues closer than this are treated as one pointer peak.
const DEGENERACY: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct PointerConfig {
    /// Pointer shift per unit eigenvalue, `g > 0`.
    pub coupling: f64,
    /// Initial standard deviation of the pointer, `s > 0`.
    pub width: f64,
    /// `kappa_m` for each intermediate basis vector, in basis order.
    pub eigenvalues: Vec<f64>,
}

impl PointerConfig {
    pub fn new(coupling: f64, width: f64, eigenvalues: Vec<f64>) -> Result<Self> {
        if !(coupling.is_finite() && coupling > 0.0) {
            return Err(Error::InvalidParameter(format!("coupling must be positive, got {coupling}")));
        }
        if !(width.is_finite() && width > 0.0) {
            return Err(Error::InvalidParameter(format!("width must be positive, got {width}")));
        }
        if eigenvalues.iter().any(|k| !k.is_finite()) {
            return Err(Error::NonFinite("eigenvalues"));
        }
        Ok(Self { coupling, width, eigenvalues })
    }

    /// Configuration with width `ratio * coupling`.
    pub fn with_ratio(coupling: f64, ratio: f64, eigenvalues: Vec<f64>) -> Result<Self> {
        Self::new(coupling, ratio * coupling, eigenvalues)
    }
}

/// `sum_m kappa_m |m><m|`.
pub fn observable(basis_m: &OrthonormalBasis, eigenvalues: &[f64]) -> Result<Operator> {
    if eigenvalues.len() != basis_m.dim() {
        return Err(Error::DimensionMismatch { expected: basis_m.dim(), got: eigenvalues.len() });
    }
    let mut op = Operator::zeros(basis_m.dim());
    for (v, &k) in basis_m.vectors().iter().zip(eigenvalues) {
        op = &op + &(k * &projector(v));
    }
    Ok(op)
}

/// A cluster of pointer readings in the projective limit.
#[derive(Clone, Debug, PartialEq)]
pub struct Peak {
    pub position: f64,
    /// Intermediate outcomes that share this position.
    pub members: Vec<usize>,
    /// Conditional probability of the peak given `b`.
    pub weight: f64,
}

/// Result of trapezoid integration of the joint density for one `b`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quadrature {
    pub mass: f64,
    /// `None` when the mass is below `TOL`.
    pub mean: Option<f64>,
}

/// Joint density tabulated on the sampling grid, one row per `b`.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityGrid {
    pub x: Vec<f64>,
    pub density: Vec<Vec<f64>>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Record {
    pub x: f64,
    /// Index into [`SampleBatch::labels`].
    pub b: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampleBatch {
    pub seed: u64,
    pub shots: usize,
    pub labels: Vec<String>,
    pub records: Vec<Record>,
}

/// Empirical pointer statistics for one post-selection outcome.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Empirical {
    pub count: usize,
    pub mean: f64,
    /// Sample standard deviation (zero for a single record).
    pub std: f64,
}

impl Empirical {
    pub fn standard_error(&self) -> f64 {
        self.std / (self.count as f64).sqrt()
    }
}

impl SampleBatch {
    pub fn label(&self, record: &Record) -> &str {
        &self.labels[record.b]
    }

    pub fn conditional(&self, b: usize) -> Option<Empirical> {
        let xs: Vec<f64> = self.records.iter().filter(|r| r.b == b).map(|r| r.x).collect();
        if xs.is_empty() {
            return None;
        }
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = if xs.len() > 1 {
            xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        Some(Empirical { count: xs.len(), mean, std: var.sqrt() })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PointerModel {
    labels_b: Vec<String>,
    /// `c[b][m] = <b|m><m|a>`.
    c: Vec<Vec<Complex64>>,
    /// `g kappa_m`.
    shifts: Vec<f64>,
    coupling: f64,
    width: f64,
}

impl PointerModel {
    pub fn new(
        a: &StateVector,
        basis_m: &OrthonormalBasis,
        basis_b: &OrthonormalBasis,
        cfg: &PointerConfig,
    ) -> Result<Self> {
        let d = a.dim();
        for got in [basis_m.dim(), basis_b.dim(), cfg.eigenvalues.len()] {
            if got != d {
                return Err(Error::DimensionMismatch { expected: d, got });
            }
        }
        let c = basis_b
            .vectors()
            .iter()
            .map(|b| {
                basis_m
                    .vectors()
                    .iter()
                    .map(|m| Ok(inner(b, m)? * inner(m, a)?))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            labels_b: basis_b.labels().to_vec(),
            c,
            shifts: cfg.eigenvalues.iter().map(|k| cfg.coupling * k).collect(),
            coupling: cfg.coupling,
            width: cfg.width,
        })
    }

    pub fn dim(&self) -> usize {
        self.shifts.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels_b
    }

    fn check_b(&self, b: usize) -> Result<()> {
        if b >= self.c.len() {
            return Err(Error::IndexOutOfRange { index: b, dim: self.c.len() });
        }
        Ok(())
    }

    fn amplitude(&self, x: f64) -> impl Fn(f64) -> f64 + '_ {
        let s = self.width;
        let norm = (2.0 * PI * s * s).powf(-0.25);
        move |shift| norm * (-(x - shift).powi(2) / (4.0 * s * s)).exp()
    }

    /// `p(x, b) = |sum_m c_m G(x - g kappa_m)|^2`.
    pub fn density(&self, x: f64, b: usize) -> f64 {
        let g = self.amplitude(x);
        self.c[b]
            .iter()
            .zip(&self.shifts)
            .map(|(c, &shift)| c * g(shift))
            .sum::<Complex64>()
            .norm_sqr()
    }

    /// `sum_{m,m'} conj(c_m) c_m' overlap(m,m') f(m,m')` with the Gaussian
    /// overlap `exp(-(g dk)^2 / 8 s^2)`.
    fn gaussian_form(&self, b: usize, f: impl Fn(f64, f64) -> f64) -> f64 {
        let s2 = self.width * self.width;
        let (c, x) = (&self.c[b], &self.shifts);
        let mut total = 0.0;
        for m in 0..c.len() {
            total += c[m].norm_sqr() * f(x[m], x[m]);
            // (m, n) and (n, m) are conjugate partners
            for n in m + 1..c.len() {
                let w = (-(x[m] - x[n]).powi(2) / (8.0 * s2)).exp() * f(x[m], x[n]);
                total += 2.0 * (c[m].conj() * c[n]).re * w;
            }
        }
        total
    }

    /// Closed-form `P(b)` with the pointer traced out.
    pub fn mass(&self, b: usize) -> Result<f64> {
        self.check_b(b)?;
        Ok(self.gaussian_form(b, |_, _| 1.0))
    }

    /// Closed-form `E[x | b]`.
    pub fn conditional_mean(&self, b: usize) -> Result<f64> {
        let mass = self.mass(b)?;
        if mass <= TOL {
            return Err(Error::VanishingPostSelection(mass));
        }
        Ok(self.gaussian_form(b, |x, y| 0.5 * (x + y)) / mass)
    }

    fn support(&self) -> (f64, f64) {
        let lo = self.shifts.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = self.shifts.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }

    /// Trapezoid integral of `f(x) p(x, b)` over `[lo, hi]` with step near `s/20`.
    fn integrate(&self, b: usize, lo: f64, hi: f64, f: impl Fn(f64) -> f64) -> f64 {
        let n = (((hi - lo) / (self.width / 20.0)).ceil() as usize).max(1);
        let h = (hi - lo) / n as f64;
        let value = |i: usize| {
            let x = lo + i as f64 * h;
            f(x) * self.density(x, b)
        };
        let inner: f64 = (1..n).map(value).sum();
        h * (inner + 0.5 * (value(0) + value(n)))
    }

    /// Numerical mass and mean over `[min shift - 12 s, max shift + 12 s]`.
    pub fn quadrature(&self, b: usize) -> Result<Quadrature> {
        self.check_b(b)?;
        let (lo, hi) = self.support();
        let (lo, hi) = (lo - 12.0 * self.width, hi + 12.0 * self.width);
        let mass = self.integrate(b, lo, hi, |_| 1.0);
        let mean = (mass > TOL).then(|| self.integrate(b, lo, hi, |x| x) / mass);
        Ok(Quadrature { mass, mean })
    }

    /// Numerical mass of readings in `[lo, hi]` for outcome `b`.
    pub fn window_mass(&self, b: usize, lo: f64, hi: f64) -> Result<f64> {
        self.check_b(b)?;
        Ok(self.integrate(b, lo, hi, |_| 1.0))
    }

    /// Peaks of the projective limit. Outcomes with equal eigenvalues add
    /// coherently, distinct ones incoherently.
    pub fn peaks(&self, b: usize) -> Result<Vec<Peak>> {
        self.check_b(b)?;
        let mut order: Vec<usize> = (0..self.dim()).collect();
        order.sort_by(|&i, &j| self.shifts[i].total_cmp(&self.shifts[j]));
        let mut peaks: Vec<Peak> = Vec::new();
        for m in order {
            let x = self.shifts[m];
            match peaks.last_mut() {
                Some(p) if (x - p.position).abs() <= DEGENERACY * (1.0 + x.abs()) => p.members.push(m),
                _ => peaks.push(Peak { position: x, members: vec![m], weight: 0.0 }),
            }
        }
        for p in &mut peaks {
            p.weight = p.members.iter().map(|&m| self.c[b][m]).sum::<Complex64>().norm_sqr();
        }
        let total: f64 = peaks.iter().map(|p| p.weight).sum();
        if total <= TOL {
            return Err(Error::VanishingPostSelection(total));
        }
        for p in &mut peaks {
            p.weight /= total;
        }
        Ok(peaks)
    }

    /// Half-width of the sampling grid around zero.
    fn grid_half_width(&self) -> f64 {
        self.shifts.iter().fold(0.0_f64, |acc, x| acc.max(x.abs())) + 8.0 * self.width
    }

    pub fn tabulate(&self) -> DensityGrid {
        let half = self.grid_half_width();
        let dx = 2.0 * half / (GRID_POINTS - 1) as f64;
        let x: Vec<f64> = (0..GRID_POINTS).map(|i| -half + i as f64 * dx).collect();
        let density = (0..self.c.len())
            .map(|b| x.iter().map(|&xi| self.density(xi, b)).collect())
            .collect();
        DensityGrid { x, density }
    }

    /// Draws `(x, b)` pairs by inverse-CDF lookup on the tabulated density.
    ///
    /// Shots are split into chunks of [`CHUNK`]; chunk `k` uses ChaCha8 seeded
    /// with `seed` on stream `k`, so the output does not depend on the
    /// number of worker threads.
    pub fn sample(&self, shots: usize, seed: u64) -> Result<SampleBatch> {
        if shots == 0 {
            return Err(Error::InvalidParameter("shots must be at least 1".into()));
        }
        let grid = self.tabulate();
        let table = InverseCdf::new(&grid);
        let chunks = shots.div_ceil(CHUNK);
        let records = (0..chunks)
            .into_par_iter()
            .map(|k| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(k as u64);
                let n = CHUNK.min(shots - k * CHUNK);
                (0..n).map(|_| table.draw(&mut rng)).collect::<Vec<_>>()
            })
            .collect::<Vec<_>>()
            .concat();
        Ok(SampleBatch { seed, shots, labels: self.labels_b.clone(), records })
    }
}

struct InverseCdf<'a> {
    x: &'a [f64],
    /// Cumulative trapezoid mass per `b`.
    cdf: Vec<Vec<f64>>,
    /// Cumulative total mass over `b`.
    outcome_cdf: Vec<f64>,
}

impl<'a> InverseCdf<'a> {
    fn new(grid: &'a DensityGrid) -> Self {
        let dx = grid.x[1] - grid.x[0];
        let cdf: Vec<Vec<f64>> = grid
            .density
            .iter()
            .map(|p| {
                let mut acc = 0.0;
                std::iter::once(0.0)
                    .chain(p.windows(2).map(|w| {
                        acc += 0.5 * dx * (w[0] + w[1]);
                        acc
                    }))
                    .collect()
            })
            .collect();
        let mut acc = 0.0;
        let outcome_cdf = cdf
            .iter()
            .map(|c| {
                acc += c.last().copied().unwrap_or(0.0);
                acc
            })
            .collect();
        Self { x: &grid.x, cdf, outcome_cdf }
    }

    fn draw<R: Rng>(&self, rng: &mut R) -> Record {
        let total = *self.outcome_cdf.last().expect("at least one outcome");
        let u = rng.random::<f64>() * total;
        let b = self
            .outcome_cdf
            .partition_point(|&c| c <= u)
            .min(self.outcome_cdf.len() - 1);
        let cdf = &self.cdf[b];
        let v = rng.random::<f64>() * cdf[cdf.len() - 1];
        let i = cdf.partition_point(|&c| c <= v).clamp(1, cdf.len() - 1);
        let (c0, c1) = (cdf[i - 1], cdf[i]);
        let t = if c1 > c0 { (v - c0) / (c1 - c0) } else { 0.5 };
        Record { x: self.x[i - 1] + t * (self.x[i] - self.x[i - 1]), b }
    }
}

/// `p(x, b)` for a single evaluation.
pub fn pointer_joint_density(
    a: &StateVector,
    basis_m: &OrthonormalBasis,
    basis_b: &OrthonormalBasis,
    cfg: &PointerConfig,
    x: f64,
    b: usize,
) -> Result<f64> {
    let model = PointerModel::new(a, basis_m, basis_b, cfg)?;
    model.check_b(b)?;
    Ok(model.density(x, b))
}

pub fn conditional_pointer_mean(
    a: &StateVector,
    basis_m: &OrthonormalBasis,
    basis_b: &OrthonormalBasis,
    cfg: &PointerConfig,
    b: usize,
) -> Result<f64> {
    PointerModel::new(a, basis_m, basis_b, cfg)?.conditional_mean(b)
}

pub fn sample(
    a: &StateVector,
    basis_m: &OrthonormalBasis,
    basis_b: &OrthonormalBasis,
    cfg: &PointerConfig,
    shots: usize,
    seed: u64,
) -> Result<SampleBatch> {
    PointerModel::new(a, basis_m, basis_b, cfg)?.sample(shots, seed)
}

/// Weak value of `sum_m kappa_m |m><m|` for each `b`; `None` where `<b|a>` vanishes.
pub fn weak_values(
    a: &StateVector,
    basis_m: &OrthonormalBasis,
    basis_b: &OrthonormalBasis,
    eigenvalues: &[f64],
) -> Result<Vec<Option<Complex64>>> {
    let op = observable(basis_m, eigenvalues)?;
    basis_b
        .vectors()
        .iter()
        .map(|b| match weak_value(a, b, &op) {
            Ok(w) => Ok(Some(w)),
            Err(Error::OrthogonalSelection(_)) => Ok(None),
            Err(e) => Err(e),
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    /// `s / g`.
    pub ratio: f64,
    /// `E[x | b] / g` per `b`; `None` where `P(b)` vanishes.
    pub scaled_means: Vec<Option<f64>>,
}

/// Closed-form conditional means over a range of width-to-coupling ratios.
pub fn weak_limit_sweep(
    a: &StateVector,
    basis_m: &OrthonormalBasis,
    basis_b: &OrthonormalBasis,
    eigenvalues: &[f64],
    coupling: f64,
    ratios: &[f64],
) -> Result<Vec<SweepRow>> {
    ratios
        .iter()
        .map(|&ratio| {
            let cfg = PointerConfig::with_ratio(coupling, ratio, eigenvalues.to_vec())?;
            let model = PointerModel::new(a, basis_m, basis_b, &cfg)?;
            let scaled_means = (0..basis_b.dim())
                .map(|b| match model.conditional_mean(b) {
                    Ok(x) => Ok(Some(x / coupling)),
                    Err(Error::VanishingPostSelection(_)) => Ok(None),
                    Err(e) => Err(e),
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(SweepRow { ratio, scaled_means })
        })
        .collect()
}
