//! Two spins prepared in `(X1=+1, Y2=+1)` and post-selected in
//! `(Y1=+1, X2=+1)`, viewed through the joint eigenbasis of the products
//! `X1X2`, `Y1Y2`. The swap of the two spins connects preparation and
//! post-selection and acts as a phase flip on the singlet only.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::{joint_eigenvector, kron, Check, ScenarioReport};
use crate::error::Result;
use crate::kdq::{
    is_half_periodic, kd_joint, marginals, overlap_direct, overlap_from_kd, unitary_from_actions,
    ActionSpectrum,
};
use crate::qcore::{pauli, tensor_state, Axis, OrthonormalBasis, Operator, StateVector, TOL};

/// Labels of the swap eigenbasis with their `(X1X2, Y1Y2)` eigenvalues.
pub const SWAP_EIGENVALUES: [(&str, f64, f64); 4] = [
    ("S", -1.0, -1.0),
    ("T_x", -1.0, 1.0),
    ("T_y", 1.0, -1.0),
    ("T_z", 1.0, 1.0),
];

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn eigen_qubit(axis: Axis) -> Result<OrthonormalBasis> {
    let i = Complex64::new(0.0, 1.0);
    let one = re(1.0);
    let (plus, minus) = match axis {
        Axis::X => (vec![one, one], vec![one, -one]),
        Axis::Y => (vec![one, i], vec![one, -i]),
        Axis::Z => (vec![one, re(0.0)], vec![re(0.0), one]),
    };
    OrthonormalBasis::with_labels(["+1", "-1"], vec![StateVector::new(plus)?, StateVector::new(minus)?])
}

fn eigen_residual(op: &Operator, v: &StateVector, lambda: f64) -> Result<f64> {
    Ok((op.apply(v)? - v.as_vector().scale(lambda)).norm())
}

pub fn peres_mermin_swap() -> Result<ScenarioReport> {
    let (x, y, z) = (pauli(Axis::X), pauli(Axis::Y), pauli(Axis::Z));
    let (xx, yy, zz) = (kron(&x, &x), kron(&y, &y), kron(&z, &z));
    let (xy, yx) = (kron(&x, &y), kron(&y, &x));

    let x_basis = eigen_qubit(Axis::X)?;
    let y_basis = eigen_qubit(Axis::Y)?;
    let a = tensor_state(x_basis.vector(0), y_basis.vector(0))?;
    let basis_b = y_basis.tensor(&x_basis)?;
    let b = basis_b.vector(0).clone();

    let m_vectors = SWAP_EIGENVALUES
        .iter()
        .map(|&(_, sxx, syy)| joint_eigenvector(&[(&xx, sxx), (&yy, syy)]))
        .collect::<Result<Vec<_>>>()?;
    let basis_m =
        OrthonormalBasis::with_labels(SWAP_EIGENVALUES.iter().map(|e| e.0), m_vectors)?;
    let kd = kd_joint(&a, &basis_m, &basis_b)?;
    let eighth = 0.125;

    let mut checks = vec![
        Check::complex("P(S;b|a)", re(-eighth), kd.entry(0, 0), TOL),
        Check::complex("P(T_x;b|a)", re(eighth), kd.entry(1, 0), TOL),
        Check::complex("P(T_y;b|a)", re(eighth), kd.entry(2, 0), TOL),
        Check::complex("P(T_z;b|a)", re(eighth), kd.entry(3, 0), TOL),
    ];

    // (X1X2)(Y1Y2) = -(Z1Z2) on every joint eigenvector of the m context
    for (v, &(label, sxx, syy)) in basis_m.vectors().iter().zip(&SWAP_EIGENVALUES) {
        let szz = -sxx * syy;
        let residual = eigen_residual(&xx, v, sxx)?
            .max(eigen_residual(&yy, v, syy)?)
            .max(eigen_residual(&zz, v, szz)?);
        checks.push(Check::real(format!("{label}: eigen-residual of X1X2, Y1Y2, Z1Z2"), 0.0, residual, TOL));
        let product = xx.expectation(v)?.re * yy.expectation(v)?.re + zz.expectation(v)?.re;
        checks.push(Check::real(format!("{label}: (X1X2)(Y1Y2) + (Z1Z2)"), 0.0, product, TOL));
    }

    // (X1Y2)(Y1X2) = +(Z1Z2) on every joint eigenvector of the crossed context
    for sxy in [1.0, -1.0] {
        for syx in [1.0, -1.0] {
            let v = joint_eigenvector(&[(&xy, sxy), (&yx, syx)])?;
            let residual = eigen_residual(&zz, &v, sxy * syx)?;
            let product = xy.expectation(&v)?.re * yx.expectation(&v)?.re - zz.expectation(&v)?.re;
            let name = format!("(X1Y2={sxy:+}, Y1X2={syx:+})");
            checks.push(Check::real(format!("{name}: eigen-residual of Z1Z2"), 0.0, residual, TOL));
            checks.push(Check::real(format!("{name}: (X1Y2)(Y1X2) - (Z1Z2)"), 0.0, product, TOL));
        }
    }

    let p_b = marginals(&kd)?.b[0];
    let conditional = |pick: fn(&(&str, f64, f64)) -> f64| -> f64 {
        SWAP_EIGENVALUES
            .iter()
            .enumerate()
            .map(|(m, e)| pick(e) * kd.entry(m, 0).re)
            .sum::<f64>()
            / p_b
    };
    let avg_xx = conditional(|e| e.1);
    let avg_yy = conditional(|e| e.2);
    let avg_zz = conditional(|e| -e.1 * e.2);
    checks.extend([
        Check::real("P(b|a)", 0.25, p_b, TOL),
        Check::real("conditional average of X1X2", 1.0, avg_xx, TOL),
        Check::real("conditional average of Y1Y2", 1.0, avg_yy, TOL),
        Check::real("conditional average of Z1Z2", 1.0, avg_zz, TOL),
    ]);

    let swap = ActionSpectrum::new(basis_m.clone(), vec![PI, 0.0, 0.0, 0.0])?;
    let u = unitary_from_actions(&swap);
    let swap_matrix = Operator::from_real_rows(&[
        vec![1.0, 0.0, 0.0, 0.0],
        vec![0.0, 0.0, 1.0, 0.0],
        vec![0.0, 1.0, 0.0, 0.0],
        vec![0.0, 0.0, 0.0, 1.0],
    ])?;
    checks.extend([
        Check::real("phase pi on S is the swap", 0.0, u.max_abs_diff(&swap_matrix)?, TOL),
        Check::holds("swap is half-periodic", is_half_periodic(&swap)),
        Check::real("P(b|U(a)) direct", 1.0, overlap_direct(&a, &b, &u)?, TOL),
        Check::real("P(b|U(a)) from KD", 1.0, overlap_from_kd(&kd, &swap, 0)?, TOL),
    ]);

    let mut report = ScenarioReport::new("peres-mermin", kd, checks);
    report.quantities = vec![
        ("P(b|a)".into(), p_b),
        ("<X1X2>_cond".into(), avg_xx),
        ("<Y1Y2>_cond".into(), avg_yy),
        ("<Z1Z2>_cond".into(), avg_zz),
    ];
    report.violated_inequality =
        Some("context-independent values: (X1X2)(Y1Y2) = (X1Y2)(Y1X2)".into());
    report.transformation = Some(swap);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn contextuality_passes() {
        let r = peres_mermin_swap().unwrap();
        assert!(r.passed(), "{:?}", r.failed_checks().collect::<Vec<_>>());
        assert_eq!(r.kd.basis_m().labels(), ["S", "T_x", "T_y", "T_z"]);
    }
}
