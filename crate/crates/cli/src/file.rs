//! Scenario files: a preparation and two bases as JSON.
//!
//! ```json
//! {
//!   "dim": 2,
//!   "state_a": [[1, 0], [0, 0]],
//!   "basis_m": [[[0.7071067811865476, 0], [0.7071067811865476, 0]],
//!               [[0.7071067811865476, 0], [-0.7071067811865476, 0]]],
//!   "basis_b": [[[1, 0], [0, 0]], [[0, 0], [1, 0]]],
//!   "action_phase": [0, 3.141592653589793],
//!   "labels_m": ["+", "-"],
//!   "kappa": [1, -1]
//! }
//! ```
//!
//! Complex numbers are `[re, im]`; basis rows are the basis vectors.

use std::path::Path;

use kdqlab_core::kdq::ActionSpectrum;
use kdqlab_core::qcore::{OrthonormalBasis, StateVector, MAX_DIM};
use kdqlab_core::Complex64;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Relative norm correction above which auto-normalization is reported.
pub const NORMALIZATION_WARNING: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub dim: usize,
    pub state_a: Vec<[f64; 2]>,
    pub basis_m: Vec<Vec<[f64; 2]>>,
    pub basis_b: Vec<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action_phase: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels_m: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels_b: Option<Vec<String>>,
    /// Eigenvalues of the weakly measured observable, one per `basis_m` row.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<Vec<f64>>,
}

/// A validated scenario file.
#[derive(Clone, Debug)]
pub struct Loaded {
    pub name: String,
    pub state: StateVector,
    pub basis_m: OrthonormalBasis,
    pub basis_b: OrthonormalBasis,
    pub action: Option<ActionSpectrum>,
    pub kappa: Option<Vec<f64>>,
    pub warnings: Vec<String>,
}

fn to_complex(v: &[[f64; 2]]) -> Vec<Complex64> {
    v.iter().map(|&[re, im]| Complex64::new(re, im)).collect()
}

fn from_complex(v: &[Complex64]) -> Vec<[f64; 2]> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Input(format!("malformed scenario file: {e}")))
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Writes the parts of a loaded scenario back out, e.g. for built-ins.
    pub fn from_parts(
        state: &StateVector,
        basis_m: &OrthonormalBasis,
        basis_b: &OrthonormalBasis,
        action_phase: Option<Vec<f64>>,
    ) -> Self {
        let rows = |b: &OrthonormalBasis| b.vectors().iter().map(|v| from_complex(v.amplitudes())).collect();
        Self {
            dim: state.dim(),
            state_a: from_complex(state.amplitudes()),
            basis_m: rows(basis_m),
            basis_b: rows(basis_b),
            action_phase,
            labels_m: Some(basis_m.labels().to_vec()),
            labels_b: Some(basis_b.labels().to_vec()),
            kappa: None,
        }
    }

    pub fn load(&self, name: &str) -> Result<Loaded, CliError> {
        let d = self.dim;
        if d == 0 || d > MAX_DIM {
            return Err(CliError::Input(format!("dim = {d} is outside 1..={MAX_DIM}")));
        }
        let mut warnings = Vec::new();
        let state = vector("state_a", &self.state_a, d, &mut warnings)?;
        let basis_m = basis("basis_m", &self.basis_m, self.labels_m.as_deref(), d, &mut warnings)?;
        let basis_b = basis("basis_b", &self.basis_b, self.labels_b.as_deref(), d, &mut warnings)?;
        let action = match &self.action_phase {
            Some(phases) => {
                check_len("action_phase", phases.len(), d)?;
                Some(ActionSpectrum::new(basis_m.clone(), phases.clone()).map_err(input)?)
            }
            None => None,
        };
        if let Some(k) = &self.kappa {
            check_len("kappa", k.len(), d)?;
        }
        Ok(Loaded {
            name: name.to_owned(),
            state,
            basis_m,
            basis_b,
            action,
            kappa: self.kappa.clone(),
            warnings,
        })
    }
}

fn input(e: kdqlab_core::Error) -> CliError {
    CliError::Input(e.to_string())
}

fn check_len(field: &str, got: usize, dim: usize) -> Result<(), CliError> {
    if got != dim {
        return Err(CliError::Input(format!("{field} has {got} entries, expected dim = {dim}")));
    }
    Ok(())
}

fn vector(field: &str, raw: &[[f64; 2]], dim: usize, warnings: &mut Vec<String>) -> Result<StateVector, CliError> {
    check_len(field, raw.len(), dim)?;
    let amps = to_complex(raw);
    let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let v = StateVector::new(amps).map_err(|e| CliError::Input(format!("{field}: {e}")))?;
    if (norm - 1.0).abs() > NORMALIZATION_WARNING {
        warnings.push(format!("{field} had norm {norm}; normalized"));
    }
    Ok(v)
}

fn basis(
    field: &str,
    rows: &[Vec<[f64; 2]>],
    labels: Option<&[String]>,
    dim: usize,
    warnings: &mut Vec<String>,
) -> Result<OrthonormalBasis, CliError> {
    check_len(field, rows.len(), dim)?;
    let vectors = rows
        .iter()
        .enumerate()
        .map(|(i, row)| vector(&format!("{field}[{i}]"), row, dim, warnings))
        .collect::<Result<Vec<_>, _>>()?;
    let built = match labels {
        Some(l) => OrthonormalBasis::new(l.to_vec(), vectors),
        None => OrthonormalBasis::from_vectors(vectors),
    };
    built.map_err(|e| CliError::Input(format!("{field}: {e}")))
}
