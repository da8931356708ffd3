//! Multi-path interferometers where the final state is the initial
//! superposition with a phase flip on selected paths.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::{Check, ScenarioReport};
use crate::error::Result;
use crate::kdq::{
    is_half_periodic, kd_joint, marginals, optimal_action, overlap_direct, overlap_from_kd,
    unitary_from_actions, weak_value, ActionSpectrum,
};
use crate::qcore::{inner, projector, OrthonormalBasis, StateVector, TOL};

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Final basis obtained by undoing `u` on a basis whose first vector is the
/// preparation; its first vector is then the post-selected state.
fn final_basis(
    labels: &[&str],
    basis_with_a: &OrthonormalBasis,
    spectrum: &ActionSpectrum,
) -> Result<OrthonormalBasis> {
    let u = unitary_from_actions(spectrum);
    basis_with_a.transformed(&u.adjoint())?.relabeled(labels.iter().copied())
}

pub fn three_box() -> Result<ScenarioReport> {
    let boxes = OrthonormalBasis::standard(3)?.relabeled(["1", "2", "3"])?;
    let a = StateVector::from_real(&[1.0, 1.0, 1.0])?;
    let flip = ActionSpectrum::new(boxes.clone(), vec![0.0, 0.0, PI])?;
    let basis_b = final_basis(&["b", "b'", "b''"], &OrthonormalBasis::fourier(3)?, &flip)?;
    let b = basis_b.vector(0).clone();
    let kd = kd_joint(&a, &boxes, &basis_b)?;
    let third = 1.0 / 9.0;

    let two_minus_three = StateVector::from_real(&[0.0, 1.0, -1.0])?;
    let two_plus_three = StateVector::from_real(&[0.0, 1.0, 1.0])?;
    let p_b = marginals(&kd)?.b[0];
    let u = unitary_from_actions(&flip);

    let mut checks = vec![
        Check::real(
            "b = (|1> + |2> - |3>)/sqrt3",
            1.0,
            inner(&StateVector::from_real(&[1.0, 1.0, -1.0])?, &b)?.norm_sqr(),
            TOL,
        ),
        Check::complex("P(1,b|a)", re(third), kd.entry(0, 0), TOL),
        Check::complex("P(2,b|a)", re(third), kd.entry(1, 0), TOL),
        Check::complex("P(3,b|a)", re(-third), kd.entry(2, 0), TOL),
        Check::real("P(b|a)", third, p_b, TOL),
        Check::real("overlap from KD with phases (0,0,pi)", 1.0, overlap_from_kd(&kd, &flip, 0)?, TOL),
        Check::real("direct overlap with phases (0,0,pi)", 1.0, overlap_direct(&a, &b, &u)?, TOL),
        Check::holds("phases (0,0,pi) are half-periodic", is_half_periodic(&flip)),
        Check::real("|2>-|3> orthogonal to a", 0.0, inner(&two_minus_three, &a)?.norm(), TOL),
        Check::real("|2>+|3> orthogonal to b", 0.0, inner(&two_plus_three, &b)?.norm(), TOL),
        Check::complex("P(2,b|a) + P(3,b|a) cancels", re(0.0), kd.entry(1, 0) + kd.entry(2, 0), TOL),
        Check::complex("P(1,b|a) + P(3,b|a) cancels", re(0.0), kd.entry(0, 0) + kd.entry(2, 0), TOL),
        Check::complex(
            "weak value of box 1",
            re(1.0),
            weak_value(&a, &b, &projector(boxes.vector(0)))?,
            TOL,
        ),
        Check::complex(
            "weak value of box 3",
            re(-1.0),
            weak_value(&a, &b, &projector(boxes.vector(2)))?,
            TOL,
        ),
        Check::real("optimal action of box 3", PI, optimal_action(&kd, 2, 0)?, TOL),
    ];
    checks.push(Check::real(
        "total negativity",
        third,
        super::negativity(&kd).total_negativity,
        TOL,
    ));

    let mut report = ScenarioReport::new("three-box", kd, checks);
    report.quantities = vec![
        ("P(b|a)".into(), p_b),
        ("P(3,b|a)".into(), report.kd.entry(2, 0).re),
    ];
    report.violated_inequality = Some("positive path assignment: P(3,b|a) >= 0".into());
    report.transformation = Some(flip);
    Ok(report)
}

pub fn cheshire_cat() -> Result<ScenarioReport> {
    let paths = OrthonormalBasis::standard(4)?.relabeled(["p1,H", "p1,V", "p2,H", "p2,V"])?;
    let a = StateVector::from_real(&[1.0; 4])?;
    let flip = ActionSpectrum::new(paths.clone(), vec![0.0, 0.0, 0.0, PI])?;
    let hadamard = OrthonormalBasis::from_vectors(
        [
            [1.0, 1.0, 1.0, 1.0],
            [1.0, -1.0, 1.0, -1.0],
            [1.0, 1.0, -1.0, -1.0],
            [1.0, -1.0, -1.0, 1.0],
        ]
        .iter()
        .map(|row| StateVector::from_real(row))
        .collect::<Result<Vec<_>>>()?,
    )?;
    let basis_b = final_basis(&["b", "b'", "b''", "b'''"], &hadamard, &flip)?;
    let b = basis_b.vector(0).clone();
    let kd = kd_joint(&a, &paths, &basis_b)?;
    let eighth = 0.125;

    let p_b = marginals(&kd)?.b[0];
    let col = |m: usize| kd.entry(m, 0).re;
    let path_p1 = (col(0) + col(1)) / p_b;
    let path_p2 = (col(2) + col(3)) / p_b;
    let pol_h = (col(0) + col(2)) / p_b;
    let pol_v = (col(1) + col(3)) / p_b;
    let smile_p1 = (col(0) - col(1)) / p_b;
    let smile_p2 = (col(2) - col(3)) / p_b;

    let checks = vec![
        Check::complex("P(p1,H;b|a)", re(eighth), kd.entry(0, 0), TOL),
        Check::complex("P(p1,V;b|a)", re(eighth), kd.entry(1, 0), TOL),
        Check::complex("P(p2,H;b|a)", re(eighth), kd.entry(2, 0), TOL),
        Check::complex("P(p2,V;b|a)", re(-eighth), kd.entry(3, 0), TOL),
        Check::real("P(b|a)", 0.25, p_b, TOL),
        Check::real("conditional weight of path p1", 1.0, path_p1, TOL),
        Check::real("conditional weight of path p2", 0.0, path_p2, TOL),
        Check::real("conditional weight of H", 1.0, pol_h, TOL),
        Check::real("conditional weight of V", 0.0, pol_v, TOL),
        Check::real("smile P(H)-P(V) in p1", 0.0, smile_p1, TOL),
        Check::real("smile P(H)-P(V) in p2", 1.0, smile_p2, TOL),
        Check::real("overlap from KD with pi on (p2,V)", 1.0, overlap_from_kd(&kd, &flip, 0)?, TOL),
        Check::real(
            "direct overlap with pi on (p2,V)",
            1.0,
            overlap_direct(&a, &b, &unitary_from_actions(&flip))?,
            TOL,
        ),
        Check::holds("pi on (p2,V) is half-periodic", is_half_periodic(&flip)),
        Check::real("optimal action of (p2,V)", PI, optimal_action(&kd, 3, 0)?, TOL),
    ];

    let mut report = ScenarioReport::new("cheshire-cat", kd, checks);
    report.quantities = vec![
        ("P(b|a)".into(), p_b),
        ("path weight p1".into(), path_p1),
        ("path weight p2".into(), path_p2),
        ("smile weight p2".into(), smile_p2),
    ];
    report.violated_inequality =
        Some("positive joint assignment of path and polarization".into());
    report.transformation = Some(flip);
    Ok(report)
}
