//! Builders for the negative-probability paradoxes.
//!
//! Each builder sets up its preparation, intermediate basis and final basis,
//! hands them to [`kd_joint`](crate::kdq::kd_joint), and compares what the
//! engine returns against known closed-form values. Builders never
//! short-circuit the engine: every table in a report is the one
//! `kd_joint` produced for the report's own `(a, M, B)`.

mod bell;
mod boxes;
mod contextuality;
mod hardy;
mod leggett_garg;

pub use bell::{bell_chsh, bell_state, chsh_operator, table_one, BellReport, K_ORDER};
pub use boxes::{cheshire_cat, three_box};
pub use contextuality::{peres_mermin_swap, SWAP_EIGENVALUES};
pub use hardy::hardy;
pub use leggett_garg::{leggett_garg, leggett_garg_closed_form, most_negative_angle};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kdq::{negativity, ActionSpectrum, KDDistribution, NegativityReport};
use crate::qcore::{tensor_op, Operator, StateVector, TOL};

/// A compared quantity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Value {
    Real(f64),
    Complex(Complex64),
}

impl Value {
    pub fn as_complex(self) -> Complex64 {
        match self {
            Value::Real(x) => Complex64::new(x, 0.0),
            Value::Complex(z) => z,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub expected: Value,
    pub got: Value,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    pub fn real(name: impl Into<String>, expected: f64, got: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            expected: Value::Real(expected),
            got: Value::Real(got),
            tolerance,
            pass: (expected - got).abs() <= tolerance,
        }
    }

    /// Passes when real and imaginary parts both agree within `tolerance`.
    pub fn complex(
        name: impl Into<String>,
        expected: Complex64,
        got: Complex64,
        tolerance: f64,
    ) -> Self {
        Self {
            name: name.into(),
            expected: Value::Complex(expected),
            got: Value::Complex(got),
            tolerance,
            pass: (expected.re - got.re).abs() <= tolerance
                && (expected.im - got.im).abs() <= tolerance,
        }
    }

    /// Boolean condition encoded as `expected = 1`, `got = 1 or 0`.
    pub fn holds(name: impl Into<String>, condition: bool) -> Self {
        Self::real(name, 1.0, if condition { 1.0 } else { 0.0 }, 0.0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioReport {
    pub scenario: String,
    pub dim: usize,
    pub kd: KDDistribution,
    pub negativity: NegativityReport,
    pub checks: Vec<Check>,
    pub violated_inequality: Option<String>,
    /// Headline numbers for rendering, e.g. the paradoxical joint probability.
    pub quantities: Vec<(String, f64)>,
    /// Half-periodic transformation that carries `a` towards `b`, if any.
    pub transformation: Option<ActionSpectrum>,
}

impl ScenarioReport {
    /// Report with negativity filled in; other optional fields start empty.
    pub fn new(scenario: &str, kd: KDDistribution, checks: Vec<Check>) -> Self {
        Self {
            scenario: scenario.to_owned(),
            dim: kd.dim(),
            negativity: negativity(&kd),
            kd,
            checks,
            violated_inequality: None,
            quantities: Vec::new(),
            transformation: None,
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failed_checks(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn quantity(&self, name: &str) -> Option<f64> {
        self.quantities
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| *v)
    }
}

pub(crate) fn kron(a: &Operator, b: &Operator) -> Operator {
    tensor_op(a, b).expect("two-qubit operators stay within the dimension cap")
}

/// Unique simultaneous eigenvector of commuting involutions `A_k` with
/// eigenvalues `lambda_k`, obtained by projecting a seed with
/// `prod_k (I + lambda_k A_k) / 2`. The uniform vector is tried first, then
/// the standard basis vectors in order.
pub(crate) fn joint_eigenvector(constraints: &[(&Operator, f64)]) -> Result<StateVector> {
    let (first, _) = constraints
        .first()
        .ok_or_else(|| Error::InvalidParameter("no eigenvalue constraints".into()))?;
    let d = first.dim();
    let id = Operator::identity(d);
    let mut proj = id.clone();
    for (op, lambda) in constraints {
        let factor = (&id + &(*lambda * *op)).scaled(Complex64::new(0.5, 0.0));
        proj = proj.checked_mul(&factor)?;
    }
    let rank = proj.trace();
    if (rank - 1.0).norm() > TOL {
        return Err(Error::DegenerateEigenspace(format!(
            "projector trace {rank}, expected 1"
        )));
    }
    let seeds = std::iter::once(StateVector::from_real(&vec![1.0; d]))
        .chain((0..d).map(|k| StateVector::basis(d, k)));
    for seed in seeds {
        let projected = proj.apply(&seed?)?;
        if projected.norm() < 1e-6 {
            continue;
        }
        let v = StateVector::from_dvector(projected)?;
        for (op, lambda) in constraints {
            let residual = (op.apply(&v)? - v.as_vector().scale(*lambda)).norm();
            if residual > TOL {
                return Err(Error::DegenerateEigenspace(format!(
                    "eigen-residual {residual:e}"
                )));
            }
        }
        return Ok(v);
    }
    Err(Error::DegenerateEigenspace(
        "every seed has vanishing projection".into(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{pauli, Axis};

    #[test]
    fn check_pass_logic() {
        assert!(Check::real("x", 1.0, 1.0 + 5e-11, TOL).pass);
        assert!(!Check::real("x", 1.0, 1.0 + 2e-10, TOL).pass);
        assert!(!Check::real("x", 1.0, f64::NAN, TOL).pass);
        let c = Check::complex("z", Complex64::new(0.0, 1.0), Complex64::new(5e-11, 1.0), TOL);
        assert!(c.pass);
        assert!(!Check::complex("z", Complex64::new(0.0, 1.0), Complex64::new(0.0, 0.9), TOL).pass);
        assert!(Check::holds("ok", true).pass);
        assert!(!Check::holds("no", false).pass);
    }

    #[test]
    fn joint_eigenvector_of_bell_stabilizers() {
        let xx = kron(&pauli(Axis::X), &pauli(Axis::X));
        let zz = kron(&pauli(Axis::Z), &pauli(Axis::Z));
        let v = joint_eigenvector(&[(&xx, 1.0), (&zz, 1.0)]).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let expected = StateVector::from_real(&[s, 0.0, 0.0, s]).unwrap();
        assert!((v.as_vector() - expected.as_vector()).norm() < TOL);
        // singlet has zero overlap with the uniform seed; the fallback seeds find it
        let v = joint_eigenvector(&[(&xx, -1.0), (&zz, -1.0)]).unwrap();
        assert!((xx.expectation(&v).unwrap() + 1.0).norm() < TOL);
    }

    #[test]
    fn joint_eigenvector_rejects_degenerate_space() {
        let zz = kron(&pauli(Axis::Z), &pauli(Axis::Z));
        assert!(matches!(
            joint_eigenvector(&[(&zz, 1.0)]),
            Err(Error::DegenerateEigenspace(_))
        ));
    }
}
