//! Two overlapping two-path interferometers with the inner-inner
//! combination removed.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::{Check, ScenarioReport};
use crate::error::Result;
use crate::kdq::{
    is_half_periodic, kd_joint, marginals, overlap_direct, overlap_from_kd, unitary_from_actions,
    ActionSpectrum,
};
use crate::qcore::{inner, tensor_state, OrthonormalBasis, StateVector, TOL};

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn paths(i: usize) -> Result<OrthonormalBasis> {
    OrthonormalBasis::standard(2)?.relabeled([format!("O{i}"), format!("I{i}")])
}

/// `b_i = (|O_i> - |I_i>)/sqrt2` is the dark port, `c_i` the bright one.
fn outputs(i: usize) -> Result<OrthonormalBasis> {
    OrthonormalBasis::with_labels(
        [format!("b{i}"), format!("c{i}")],
        vec![
            StateVector::from_real(&[1.0, -1.0])?,
            StateVector::from_real(&[1.0, 1.0])?,
        ],
    )
}

pub fn hardy() -> Result<ScenarioReport> {
    let basis_m = paths(1)?.tensor(&paths(2)?)?;
    let basis_b = outputs(1)?.tensor(&outputs(2)?)?;
    // O1O2 + O1I2 + I1O2
    let a = StateVector::from_real(&[1.0, 1.0, 1.0, 0.0])?;
    let kd = kd_joint(&a, &basis_m, &basis_b)?;
    let twelfth = 1.0 / 12.0;

    let oo = kd.entry(0, 0);
    let oi = kd.entry(1, 0);
    let io = kd.entry(2, 0);
    let ii = kd.entry(3, 0);
    let p_b = marginals(&kd)?.b[0];

    let b1 = outputs(1)?.vector(0).clone();
    let b2 = outputs(2)?.vector(0).clone();
    let o = paths(1)?.vector(0).clone();
    let p_b1_o2 = inner(&tensor_state(&b1, &o)?, &a)?.norm_sqr();
    let p_o1_b2 = inner(&tensor_state(&o, &b2)?, &a)?.norm_sqr();

    // phase flip of the inner arm in both interferometers
    let flip = ActionSpectrum::new(basis_m.clone(), vec![0.0, PI, PI, 0.0])?;
    let u = unitary_from_actions(&flip);
    let b = basis_b.vector(0);
    let p_b_u = overlap_direct(&a, b, &u)?;
    let root = -(p_b * p_b_u).sqrt();

    let checks = vec![
        Check::real("P(b1,b2|a)", twelfth, p_b, TOL),
        Check::complex("P(O1,O2;b1,b2|a)", re(-twelfth), oo, TOL),
        Check::complex("P(O1,I2;b1,b2|a)", re(twelfth), oi, TOL),
        Check::complex("P(I1,O2;b1,b2|a)", re(twelfth), io, TOL),
        Check::complex("P(I1,I2;b1,b2|a)", re(0.0), ii, TOL),
        Check::complex("sum of the four joint probabilities", re(p_b), oo + oi + io + ii, TOL),
        Check::complex("P(O1,O2) + P(O1,I2) = 0", re(0.0), oo + oi, TOL),
        Check::complex("P(O1,O2) + P(I1,O2) = 0", re(0.0), oo + io, TOL),
        Check::real("P(b1,O2|a) directly", 0.0, p_b1_o2, TOL),
        Check::real("P(O1,b2|a) directly", 0.0, p_o1_b2, TOL),
        Check::holds("double phase flip is half-periodic", is_half_periodic(&flip)),
        Check::real("P(b|U(a)) direct", 0.75, p_b_u, TOL),
        Check::real("P(b|U(a)) from KD", 0.75, overlap_from_kd(&kd, &flip, 0)?, TOL),
        Check::real("-sqrt(P(b|a) P(b|U(a)))", -0.25, root, TOL),
        Check::complex("P(O1,O2) - P(O1,I2) - P(I1,O2)", re(root), oo - oi - io, TOL),
    ];

    let mut report = ScenarioReport::new("hardy", kd, checks);
    report.quantities = vec![
        ("P(b1,b2|a)".into(), p_b),
        ("P(O1,O2;b1,b2|a)".into(), oo.re),
        ("P(b|U(a))".into(), p_b_u),
    ];
    report.violated_inequality =
        Some("positive joint assignment of paths and output ports".into());
    report.transformation = Some(flip);
    Ok(report)
}
