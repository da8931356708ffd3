//! Three coplanar spin directions of a single qubit.
//!
//! The preparation points along `0`, the intermediate spin along `theta`,
//! the final spin along `2 theta`. A half turn about the intermediate axis
//! maps the preparation exactly onto the final direction.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::{Check, ScenarioReport};
use crate::error::{Error, Result};
use crate::kdq::{
    is_half_periodic, kd_joint, marginals, optimal_action, overlap_direct, overlap_from_kd,
    unitary_from_actions, ActionSpectrum,
};
use crate::qcore::{bloch_state, inner, pauli, Axis, OrthonormalBasis, Operator, TOL};

/// `P(sigma_m = -1, sigma_b = +1 | sigma_a = +1) = cos(theta) (cos(theta) - 1) / 2`.
pub fn leggett_garg_closed_form(theta: f64) -> f64 {
    0.5 * theta.cos() * (theta.cos() - 1.0)
}

fn spin_basis(theta: f64) -> Result<OrthonormalBasis> {
    OrthonormalBasis::with_labels(
        ["+1", "-1"],
        vec![bloch_state(theta, 0.0), bloch_state(theta + PI, 0.0)],
    )
}

fn spin_along(theta: f64) -> Operator {
    &(theta.cos() * &pauli(Axis::Z)) + &(theta.sin() * &pauli(Axis::X))
}

pub fn leggett_garg(theta: f64) -> Result<ScenarioReport> {
    if !(theta > 0.0 && theta < PI) {
        return Err(Error::InvalidParameter(format!(
            "theta = {theta} must lie in (0, pi)"
        )));
    }
    let a = bloch_state(0.0, 0.0);
    let basis_m = spin_basis(theta)?;
    let basis_b = spin_basis(2.0 * theta)?;
    let b = basis_b.vector(0);
    let kd = kd_joint(&a, &basis_m, &basis_b)?;
    let entry = kd.entry(1, 0);
    let closed = leggett_garg_closed_form(theta);

    // expectation values of the two spins and their product in the preparation
    let sigma_m = spin_along(theta);
    let sigma_b = spin_along(2.0 * theta);
    let e_b = sigma_b.expectation(&a)?.re;
    let e_m = sigma_m.expectation(&a)?.re;
    let e_mb = (&sigma_m * &sigma_b).expectation(&a)?.re;
    let via_expectations = 0.25 * (1.0 + e_b - e_m - e_mb);

    // half turn about the m axis
    let flip = ActionSpectrum::new(basis_m.clone(), vec![0.0, PI])?;
    let u = unitary_from_actions(&flip);
    let p_b = marginals(&kd)?.b[0];
    let p_b_u = overlap_direct(&a, b, &u)?;
    // sum_m P(m,b|a) e^{-i phi(m)} = <a|b><b|U|a>; its sign fixes the root
    let amplitude = inner(&a, b)? * u.matrix_element(b, &a)?;
    let difference = amplitude.re.signum() * (p_b * p_b_u).sqrt();
    let via_transformation = 0.5 * (p_b - difference);

    let mut checks = vec![
        Check::real("expectation-value route = closed form", closed, via_expectations, TOL),
        Check::real("transformation route = closed form", closed, via_transformation, TOL),
        Check::complex(
            "KD entry (m=-1, b=+1) = closed form",
            Complex64::new(closed, 0.0),
            entry,
            TOL,
        ),
        Check::real("P(b|a) = cos^2(theta)", theta.cos().powi(2), p_b, TOL),
        Check::real("P(b|U(a)) after half turn about m", 1.0, p_b_u, TOL),
        Check::holds("half turn is half-periodic", is_half_periodic(&flip)),
        Check::holds(
            "joint probability negative iff theta < pi/2",
            if theta < PI / 2.0 { entry.re < 0.0 } else { entry.re >= -TOL },
        ),
    ];
    checks.push(match overlap_from_kd(&kd, &flip, 0) {
        Ok(v) => Check::real("overlap from KD table = direct overlap", p_b_u, v, TOL),
        Err(Error::UndefinedOverlap(_)) => {
            Check::holds("overlap from KD table undefined since P(b|a) = 0", p_b <= TOL)
        }
        Err(e) => return Err(e),
    });
    if entry.norm() > TOL {
        let phase = optimal_action(&kd, 1, 0)?;
        let expected = if entry.re < 0.0 { PI } else { 0.0 };
        checks.push(Check::real("optimal action of (m=-1, b=+1)", expected, phase, TOL));
    }

    let mut report = ScenarioReport::new("leggett-garg", kd, checks);
    report.quantities = vec![
        ("theta".into(), theta),
        ("joint probability P(m=-1,b=+1|a=+1)".into(), entry.re),
        ("P(b|a)".into(), p_b),
        ("P(b|U(a))".into(), p_b_u),
    ];
    if entry.re < -TOL {
        report.violated_inequality = Some("Leggett-Garg: P(m=-1,b=+1|a=+1) >= 0".into());
    }
    report.transformation = Some(flip);
    Ok(report)
}

/// Scans `steps` interior grid points of `(0, pi/2)` and returns the angle
/// with the most negative engine value of `P(m=-1, b=+1 | a=+1)`.
pub fn most_negative_angle(steps: usize) -> Result<(f64, f64)> {
    if steps == 0 {
        return Err(Error::InvalidParameter("steps must be positive".into()));
    }
    let a = bloch_state(0.0, 0.0);
    let mut best = (f64::NAN, f64::INFINITY);
    for k in 1..=steps {
        let theta = k as f64 * (PI / 2.0) / (steps + 1) as f64;
        let kd = kd_joint(&a, &spin_basis(theta)?, &spin_basis(2.0 * theta)?)?;
        let value = kd.entry(1, 0).re;
        if value < best.1 {
            best = (theta, value);
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn maximal_violation_at_sixty_degrees() {
        let r = leggett_garg(PI / 3.0).unwrap();
        assert!(r.passed(), "{:?}", r.failed_checks().collect::<Vec<_>>());
        let p = r.quantity("joint probability P(m=-1,b=+1|a=+1)").unwrap();
        assert!((p + 0.125).abs() < TOL);
        assert!(r.violated_inequality.is_some());
    }

    #[test]
    fn right_angle_gives_zero() {
        let r = leggett_garg(PI / 2.0).unwrap();
        assert!(r.passed());
        assert!(r.kd.entry(1, 0).norm() < TOL);
        assert!(r.violated_inequality.is_none());
    }

    #[test]
    fn quarter_turn_value() {
        // 0.5 * (sqrt2/2) * (sqrt2/2 - 1)
        let expected = 0.5 * std::f64::consts::FRAC_1_SQRT_2 * (std::f64::consts::FRAC_1_SQRT_2 - 1.0);
        assert!((expected + 0.103_553_390_593_273_76).abs() < 1e-15);
        let r = leggett_garg(PI / 4.0).unwrap();
        assert!((r.kd.entry(1, 0).re - expected).abs() < TOL);
    }

    #[test]
    fn obtuse_angles_pass_all_routes() {
        for theta in [1.7, 2.3, 3.0] {
            let r = leggett_garg(theta).unwrap();
            assert!(r.passed(), "theta={theta}: {:?}", r.failed_checks().collect::<Vec<_>>());
            assert!(r.kd.entry(1, 0).re > 0.0);
        }
    }

    #[test]
    fn rejects_out_of_range() {
        for theta in [0.0, PI, -1.0, f64::NAN] {
            assert!(matches!(leggett_garg(theta), Err(Error::InvalidParameter(_))));
        }
    }
}
