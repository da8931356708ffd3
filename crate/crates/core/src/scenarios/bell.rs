//! CHSH correlations of two spins in the XY plane.
//!
//! The KD table is taken over `m = (X1, X2)` and `b = (Y1, Y2)`. Each cell
//! carries a definite value of `K = X1X2 + X1Y2 + Y1X2 - Y1Y2`, assembled as
//! `m1 m2 + m1 b2 + b1 m2 - b1 b2`.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::{joint_eigenvector, kron, Check, ScenarioReport};
use crate::error::{Error, Result};
use crate::kdq::{
    is_half_periodic, kd_joint, overlap_direct, overlap_from_kd, unitary_from_actions,
    ActionSpectrum, KDDistribution,
};
use crate::qcore::{pauli, tensor_state, Axis, OrthonormalBasis, Operator, StateVector, TOL};

/// Outcome order of rows and columns: first spin runs fastest.
pub const K_ORDER: [(i32, i32); 4] = [(-1, -1), (1, -1), (-1, 1), (1, 1)];

fn check_theta(theta: f64) -> Result<()> {
    if !(0.0..=PI / 2.0).contains(&theta) {
        return Err(Error::InvalidParameter(format!(
            "theta = {theta} must lie in [0, pi/2]"
        )));
    }
    Ok(())
}

fn a1(theta: f64) -> Operator {
    let (x, y) = (pauli(Axis::X), pauli(Axis::Y));
    &(theta.cos() * &kron(&x, &y)) + &(theta.sin() * &kron(&x, &x))
}

fn a2(theta: f64) -> Operator {
    let (x, y) = (pauli(Axis::X), pauli(Axis::Y));
    &(theta.cos() * &kron(&y, &x)) - &(theta.sin() * &kron(&y, &y))
}

/// `K` as an operator.
pub fn chsh_operator() -> Operator {
    let (x, y) = (pauli(Axis::X), pauli(Axis::Y));
    &(&(&kron(&x, &x) + &kron(&x, &y)) + &kron(&y, &x)) - &kron(&y, &y)
}

/// Simultaneous `+1` eigenstate of `cos(t) X1Y2 + sin(t) X1X2` and
/// `cos(t) Y1X2 - sin(t) Y1Y2`.
pub fn bell_state(theta: f64) -> Result<StateVector> {
    check_theta(theta)?;
    joint_eigenvector(&[(&a1(theta), 1.0), (&a2(theta), 1.0)])
}

fn k_value(m: (i32, i32), b: (i32, i32)) -> i32 {
    m.0 * m.1 + m.0 * b.1 + b.0 * m.1 - b.0 * b.1
}

/// Closed-form real parts of the table, rows and columns in [`K_ORDER`].
pub fn table_one(theta: f64) -> [[f64; 4]; 4] {
    let (s, c) = theta.sin_cos();
    let e = |x: f64| x / 8.0;
    [
        [e(c), e(1.0 + s), e(1.0 + s), e(-c)],
        [e(1.0 - s), e(-c), e(c), e(1.0 - s)],
        [e(1.0 - s), e(c), e(-c), e(1.0 - s)],
        [e(-c), e(1.0 + s), e(1.0 + s), e(c)],
    ]
}

fn spin_label((s1, s2): (i32, i32)) -> String {
    format!("({s1:+},{s2:+})")
}

fn product_basis(axis: Axis) -> Result<OrthonormalBasis> {
    let one = Complex64::new(1.0, 0.0);
    let phase = match axis {
        Axis::X => one,
        Axis::Y => Complex64::new(0.0, 1.0),
        Axis::Z => unreachable!("only X and Y product bases are used"),
    };
    let single = |s: i32| StateVector::new(vec![one, phase * s as f64]);
    let vectors = K_ORDER
        .iter()
        .map(|&(s1, s2)| tensor_state(&single(s1)?, &single(s2)?))
        .collect::<Result<Vec<_>>>()?;
    OrthonormalBasis::with_labels(K_ORDER.iter().map(|&o| spin_label(o)), vectors)
}

#[derive(Clone, Debug, PartialEq)]
pub struct BellReport {
    pub theta: f64,
    /// Rows `m = (X1, X2)`, columns `b = (Y1, Y2)`, both in [`K_ORDER`].
    pub kd: KDDistribution,
    pub k_expectation: f64,
    pub p_k_minus2: f64,
    /// `Re P(m,b|a)` minus the closed-form table.
    pub table_errors: [[f64; 4]; 4],
    pub checks: Vec<Check>,
    /// Controlled-NOT in the X basis: phase `pi` on `m = (-1,-1)`.
    pub cnot: ActionSpectrum,
}

impl BellReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn to_scenario_report(&self) -> ScenarioReport {
        let mut report = ScenarioReport::new("bell", self.kd.clone(), self.checks.clone());
        report.quantities = vec![
            ("theta".into(), self.theta),
            ("<K>".into(), self.k_expectation),
            ("P(K=-2)".into(), self.p_k_minus2),
        ];
        if self.k_expectation.abs() > 2.0 + TOL {
            report.violated_inequality = Some("CHSH: |<K>| <= 2".into());
        }
        report.transformation = Some(self.cnot.clone());
        report
    }
}

pub fn bell_chsh(theta: f64) -> Result<BellReport> {
    let a = bell_state(theta)?;
    let basis_m = product_basis(Axis::X)?;
    let basis_b = product_basis(Axis::Y)?;
    let kd = kd_joint(&a, &basis_m, &basis_b)?;
    let expected = table_one(theta);
    let (s, c) = theta.sin_cos();

    let mut checks = Vec::new();
    let mut table_errors = [[0.0; 4]; 4];
    let mut max_im: f64 = 0.0;
    let mut k_expectation = 0.0;
    let mut p_k_minus2 = 0.0;
    for (mi, &m) in K_ORDER.iter().enumerate() {
        for (bi, &b) in K_ORDER.iter().enumerate() {
            let z = kd.entry(mi, bi);
            table_errors[mi][bi] = z.re - expected[mi][bi];
            max_im = max_im.max(z.im.abs());
            let k = k_value(m, b);
            k_expectation += k as f64 * z.re;
            if k == -2 {
                p_k_minus2 += z.re;
            }
            checks.push(Check::real(
                format!("Re P(m={}, b={})", spin_label(m), spin_label(b)),
                expected[mi][bi],
                z.re,
                TOL,
            ));
        }
    }
    let direct_k = chsh_operator().expectation(&a)?.re;
    let bound_holds = k_expectation.abs() <= 2.0 + TOL;
    let positive = p_k_minus2 >= -TOL;

    checks.extend([
        Check::real("max |Im P(m,b|a)|", 0.0, max_im, TOL),
        Check::real("P(K=-2) = (1 - sin - cos)/2", 0.5 * (1.0 - s - c), p_k_minus2, TOL),
        Check::real("<K> = 2(sin + cos)", 2.0 * (s + c), k_expectation, TOL),
        Check::real("<K> from table = <a|K|a>", direct_k, k_expectation, TOL),
        Check::holds("|<K>| <= 2 iff P(K=-2) >= 0", bound_holds == positive),
    ]);

    let cnot = ActionSpectrum::new(basis_m.clone(), vec![PI, 0.0, 0.0, 0.0])?;
    let u = unitary_from_actions(&cnot);
    let target = basis_b.index_of("(+1,+1)")?;
    let direct = overlap_direct(&a, basis_b.vector(target), &u)?;
    checks.push(Check::holds("controlled-NOT is half-periodic", is_half_periodic(&cnot)));
    checks.push(match overlap_from_kd(&kd, &cnot, target) {
        Ok(v) => Check::real("controlled-NOT overlap: KD = direct", direct, v, TOL),
        Err(Error::UndefinedOverlap(p)) => {
            Check::holds("controlled-NOT overlap from KD undefined since P(b|a) = 0", p <= TOL)
        }
        Err(e) => return Err(e),
    });
    if theta == 0.0 {
        let column = [("(+1,+1)", 0.125), ("(+1,-1)", 0.125), ("(-1,+1)", 0.125), ("(-1,-1)", -0.125)];
        for (m, value) in column {
            checks.push(Check::complex(
                format!("a(0): P(m={m}, b=(+1,+1))"),
                Complex64::new(value, 0.0),
                kd.get(m, "(+1,+1)")?,
                TOL,
            ));
        }
        checks.push(Check::real("a(0): controlled-NOT reaches b=(+1,+1)", 1.0, direct, TOL));
    }

    Ok(BellReport {
        theta,
        kd,
        k_expectation,
        p_k_minus2,
        table_errors,
        checks,
        cnot,
    })
}
