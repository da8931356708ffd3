//! Kirkwood–Dirac joint quasi-probabilities and their relation to unitary
//! transformations.
//!
//! For a preparation `a`, an intermediate basis `M` and a final basis `B`,
//! the joint quasi-probability is
//!
//! ```text
//! P(m, b | a) = Tr(|b><b|m><m|a><a|) = <b|m><m|a><a|b>
//! ```
//!
//! Row sums give `|<m|a>|^2`, column sums give `|<b|a>|^2`. Phases of the
//! entries are action phases: for a unitary `U = sum_m |m><m| e^{-i phi(m)}`
//! the transition probability `|<b|U|a>|^2` equals
//! `|sum_m P(m,b|a) e^{-i phi(m)}|^2 / P(b|a)`, and it is maximal when
//! `phi(m) = Arg P(m,b|a)`.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qcore::{inner, projector, OrthonormalBasis, Operator, StateVector, TOL};

/// Reduces an angle to `(-pi, pi]`.
pub fn wrap_phase(phi: f64) -> f64 {
    let r = phi.rem_euclid(2.0 * PI);
    if r > PI {
        r - 2.0 * PI
    } else {
        r
    }
}

/// `Arg(z)` in `(-pi, pi]`.
fn arg(z: Complex64) -> f64 {
    let a = z.arg();
    if a <= -PI {
        PI
    } else {
        a
    }
}

/// Eigenbasis of a generator together with the action phase `S(m)/hbar`
/// assigned to each eigenvector.
#[derive(Clone, Debug, PartialEq)]
pub struct ActionSpectrum {
    basis: OrthonormalBasis,
    phase: Vec<f64>,
}

impl ActionSpectrum {
    pub fn new(basis: OrthonormalBasis, phase: Vec<f64>) -> Result<Self> {
        if phase.len() != basis.dim() {
            return Err(Error::DimensionMismatch {
                expected: basis.dim(),
                got: phase.len(),
            });
        }
        if phase.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite("action phases"));
        }
        let phase = phase.into_iter().map(wrap_phase).collect();
        Ok(Self { basis, phase })
    }

    pub fn basis(&self) -> &OrthonormalBasis {
        &self.basis
    }

    /// Phases reduced to `(-pi, pi]`.
    pub fn phases(&self) -> &[f64] {
        &self.phase
    }
}

/// Complex joint quasi-probability table `P(m, b | a)`, indexed `[m][b]`.
///
/// Only [`kd_joint`] builds these, so the marginal identities hold for every
/// instance up to round-off.
#[derive(Clone, Debug, PartialEq)]
pub struct KDDistribution {
    state_a: StateVector,
    basis_m: OrthonormalBasis,
    basis_b: OrthonormalBasis,
    table: DMatrix<Complex64>,
}

impl KDDistribution {
    pub fn state(&self) -> &StateVector {
        &self.state_a
    }

    pub fn basis_m(&self) -> &OrthonormalBasis {
        &self.basis_m
    }

    pub fn basis_b(&self) -> &OrthonormalBasis {
        &self.basis_b
    }

    pub fn dim(&self) -> usize {
        self.table.nrows()
    }

    pub fn table(&self) -> &DMatrix<Complex64> {
        &self.table
    }

    pub fn entry(&self, m: usize, b: usize) -> Complex64 {
        self.table[(m, b)]
    }

    /// Entry addressed by basis labels.
    pub fn get(&self, m_label: &str, b_label: &str) -> Result<Complex64> {
        Ok(self.table[(self.basis_m.index_of(m_label)?, self.basis_b.index_of(b_label)?)])
    }

    /// Complex column sum `sum_m P(m, b | a)`.
    pub fn column_sum(&self, b: usize) -> Complex64 {
        self.table.column(b).sum()
    }

    /// Complex row sum `sum_b P(m, b | a)`.
    pub fn row_sum(&self, m: usize) -> Complex64 {
        self.table.row(m).sum()
    }

    /// Post-selection probability `P(b|a) = |<b|a>|^2`, computed from the table.
    pub fn post_selection_probability(&self, b: usize) -> f64 {
        self.column_sum(b).re
    }

    /// Verifies normalization and both marginal identities against Born
    /// probabilities computed directly from the states.
    pub fn check_invariants(&self) -> Result<()> {
        let total = self.table.sum();
        if (total - 1.0).norm() > TOL {
            return Err(Error::InvariantViolation(format!(
                "table sums to {total}, expected 1"
            )));
        }
        for (m, v) in self.basis_m.vectors().iter().enumerate() {
            let born = inner(v, &self.state_a)?.norm_sqr();
            let got = self.row_sum(m);
            if (got - born).norm() > TOL || got.re < -TOL {
                return Err(Error::InvariantViolation(format!(
                    "row {} sums to {got}, expected {born}",
                    self.basis_m.label(m)
                )));
            }
        }
        for (b, v) in self.basis_b.vectors().iter().enumerate() {
            let born = inner(v, &self.state_a)?.norm_sqr();
            let got = self.column_sum(b);
            if (got - born).norm() > TOL || got.re < -TOL {
                return Err(Error::InvariantViolation(format!(
                    "column {} sums to {got}, expected {born}",
                    self.basis_b.label(b)
                )));
            }
        }
        Ok(())
    }
}

/// `P(m, b | a) = <b|m><m|a><a|b>` for all pairs `(m, b)`.
pub fn kd_joint(
    a: &StateVector,
    basis_m: &OrthonormalBasis,
    basis_b: &OrthonormalBasis,
) -> Result<KDDistribution> {
    let d = a.dim();
    for dim in [basis_m.dim(), basis_b.dim()] {
        if dim != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: dim,
            });
        }
    }
    let ma: Vec<Complex64> = basis_m
        .vectors()
        .iter()
        .map(|m| inner(m, a))
        .collect::<Result<_>>()?;
    let ab: Vec<Complex64> = basis_b
        .vectors()
        .iter()
        .map(|b| inner(a, b))
        .collect::<Result<_>>()?;
    let mut table = DMatrix::zeros(d, d);
    for (mi, m) in basis_m.vectors().iter().enumerate() {
        for (bi, b) in basis_b.vectors().iter().enumerate() {
            table[(mi, bi)] = inner(b, m)? * ma[mi] * ab[bi];
        }
    }
    Ok(KDDistribution {
        state_a: a.clone(),
        basis_m: basis_m.clone(),
        basis_b: basis_b.clone(),
        table,
    })
}

/// Born marginals of a KD table.
#[derive(Clone, Debug, PartialEq)]
pub struct Marginals {
    /// `P(m|a)`, one entry per intermediate outcome.
    pub m: Vec<f64>,
    /// `P(b|a)`, one entry per final outcome.
    pub b: Vec<f64>,
}

fn checked_probability(z: Complex64, what: &str) -> Result<f64> {
    if z.im.abs() > TOL || z.re < -TOL || z.re > 1.0 + TOL {
        return Err(Error::InvariantViolation(format!(
            "{what} = {z} is not a probability"
        )));
    }
    Ok(z.re.clamp(0.0, 1.0))
}

fn checked_total(p: &[f64], what: &str) -> Result<()> {
    let s: f64 = p.iter().sum();
    if (s - 1.0).abs() > TOL {
        return Err(Error::InvariantViolation(format!(
            "{what} marginal sums to {s}"
        )));
    }
    Ok(())
}

/// Row and column sums, checked to be real probabilities within [`TOL`] and
/// then clamped to `[0, 1]`.
pub fn marginals(kd: &KDDistribution) -> Result<Marginals> {
    let d = kd.dim();
    let m = (0..d)
        .map(|i| checked_probability(kd.row_sum(i), kd.basis_m.label(i)))
        .collect::<Result<Vec<_>>>()?;
    let b = (0..d)
        .map(|j| checked_probability(kd.column_sum(j), kd.basis_b.label(j)))
        .collect::<Result<Vec<_>>>()?;
    checked_total(&m, "m")?;
    checked_total(&b, "b")?;
    Ok(Marginals { m, b })
}

/// `<b|A|a> / <b|a>`.
pub fn weak_value(a: &StateVector, b: &StateVector, op: &Operator) -> Result<Complex64> {
    let ba = inner(b, a)?;
    if ba.norm() <= TOL {
        return Err(Error::OrthogonalSelection(ba.norm()));
    }
    Ok(op.matrix_element(b, a)? / ba)
}

/// `U = sum_m |m><m| e^{-i phi(m)}`.
pub fn unitary_from_actions(spectrum: &ActionSpectrum) -> Operator {
    let d = spectrum.basis.dim();
    spectrum
        .basis
        .vectors()
        .iter()
        .zip(&spectrum.phase)
        .fold(Operator::zeros(d), |acc, (m, &phi)| {
            &acc + &projector(m).scaled(Complex64::from_polar(1.0, -phi))
        })
}

/// `P(b | U(a)) = |<b|U|a>|^2`.
pub fn overlap_direct(a: &StateVector, b: &StateVector, u: &Operator) -> Result<f64> {
    let dev = u.unitarity_deviation();
    if dev > TOL {
        return Err(Error::NotUnitary(dev));
    }
    Ok(u.matrix_element(b, a)?.norm_sqr())
}

fn check_index(index: usize, dim: usize) -> Result<()> {
    if index >= dim {
        return Err(Error::IndexOutOfRange { index, dim });
    }
    Ok(())
}

/// `|sum_m P(m,b|a) e^{-i phi(m)}|^2 / P(b|a)`: the transition probability
/// under the unitary generated by `spectrum`, computed from the table alone.
pub fn overlap_from_kd(kd: &KDDistribution, spectrum: &ActionSpectrum, b: usize) -> Result<f64> {
    check_index(b, kd.dim())?;
    if !spectrum.basis.same_projectors(&kd.basis_m, TOL) {
        return Err(Error::BasisMismatch);
    }
    let p_b = kd.post_selection_probability(b);
    if p_b <= TOL {
        return Err(Error::UndefinedOverlap(p_b));
    }
    let amp: Complex64 = (0..kd.dim())
        .map(|m| kd.entry(m, b) * Complex64::from_polar(1.0, -spectrum.phase[m]))
        .sum();
    Ok(amp.norm_sqr() / p_b)
}

/// Action phase that maximizes the transition probability: `Arg P(m,b|a)`
/// in `(-pi, pi]`.
pub fn optimal_action(kd: &KDDistribution, m: usize, b: usize) -> Result<f64> {
    check_index(m, kd.dim())?;
    check_index(b, kd.dim())?;
    let z = kd.entry(m, b);
    if z.norm() <= TOL {
        return Err(Error::UndefinedPhase {
            m: kd.basis_m.label(m).to_owned(),
            b: kd.basis_b.label(b).to_owned(),
        });
    }
    Ok(arg(z))
}

/// Optimal phases for a whole column; entries with vanishing modulus get 0,
/// since they do not contribute to the sum.
pub fn optimal_spectrum(kd: &KDDistribution, b: usize) -> Result<ActionSpectrum> {
    check_index(b, kd.dim())?;
    let phase = (0..kd.dim())
        .map(|m| optimal_action(kd, m, b).unwrap_or(0.0))
        .collect();
    ActionSpectrum::new(kd.basis_m.clone(), phase)
}

/// True when all phase differences are `0` or `pi` mod `2 pi`, i.e. `U^2`
/// is proportional to the identity.
pub fn is_half_periodic(spectrum: &ActionSpectrum) -> bool {
    let Some(&first) = spectrum.phase.first() else {
        return true;
    };
    let reference = Complex64::from_polar(1.0, -2.0 * first);
    spectrum
        .phase
        .iter()
        .all(|&p| (Complex64::from_polar(1.0, -2.0 * p) - reference).norm() <= TOL)
}

#[derive(Clone, Debug, PartialEq)]
pub struct NegativityReport {
    /// `sum max(0, -Re P)` over all cells.
    pub total_negativity: f64,
    pub min_real: f64,
    /// `(m label, b label)` of the most negative real part.
    pub argmin: (String, String),
    /// Largest `|Arg P|` among entries with modulus above [`TOL`].
    pub max_abs_phase: f64,
}

pub fn negativity(kd: &KDDistribution) -> NegativityReport {
    let mut total = 0.0;
    let mut min_real = f64::INFINITY;
    let mut argmin = (0, 0);
    let mut max_abs_phase: f64 = 0.0;
    for m in 0..kd.dim() {
        for b in 0..kd.dim() {
            let z = kd.entry(m, b);
            total += (-z.re).max(0.0);
            if z.re < min_real {
                min_real = z.re;
                argmin = (m, b);
            }
            if z.norm() > TOL {
                max_abs_phase = max_abs_phase.max(arg(z).abs());
            }
        }
    }
    NegativityReport {
        total_negativity: total,
        min_real,
        argmin: (
            kd.basis_m.label(argmin.0).to_owned(),
            kd.basis_b.label(argmin.1).to_owned(),
        ),
        max_abs_phase,
    }
}

/// Rebuilds `|a><a|` as `sum_{m,b} P(m,b|a) / <b|m> |m><b|`.
pub fn reconstruct_state(kd: &KDDistribution) -> Result<Operator> {
    let d = kd.dim();
    let mut rho = DMatrix::zeros(d, d);
    for (mi, m) in kd.basis_m.vectors().iter().enumerate() {
        for (bi, b) in kd.basis_b.vectors().iter().enumerate() {
            let bm = inner(b, m)?;
            if bm.norm() <= TOL {
                return Err(Error::IllPosedReconstruction {
                    m: kd.basis_m.label(mi).to_owned(),
                    b: kd.basis_b.label(bi).to_owned(),
                });
            }
            let weight = kd.entry(mi, bi) / bm;
            rho += (m.as_vector() * b.as_vector().adjoint()).map(|z| z * weight);
        }
    }
    Operator::from_matrix(rho)
}

/// True when a nonvanishing entry's real part is negative exactly when its
/// phase exceeds a quarter turn.
pub fn sign_matches_phase(z: Complex64) -> bool {
    z.norm() <= TOL || ((z.re < 0.0) == (arg(z).abs() > FRAC_PI_2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{bloch_state, pauli, Axis};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn three_box() -> (StateVector, OrthonormalBasis, OrthonormalBasis) {
        let a = StateVector::from_real(&[1.0, 1.0, 1.0]).unwrap();
        let b = StateVector::from_real(&[1.0, 1.0, -1.0]).unwrap();
        let b1 = StateVector::from_real(&[1.0, -1.0, 0.0]).unwrap();
        let b2 = StateVector::from_real(&[1.0, 1.0, 2.0]).unwrap();
        let basis_b = OrthonormalBasis::with_labels(["b", "b1", "b2"], vec![b, b1, b2]).unwrap();
        let boxes = OrthonormalBasis::standard(3).unwrap().relabeled(["1", "2", "3"]).unwrap();
        (a, boxes, basis_b)
    }

    fn qubit_z() -> OrthonormalBasis {
        OrthonormalBasis::standard(2).unwrap()
    }

    fn qubit_x() -> OrthonormalBasis {
        OrthonormalBasis::from_vectors(vec![bloch_state(PI / 2.0, 0.0), bloch_state(PI / 2.0, PI)]).unwrap()
    }

    #[test]
    fn wrap_phase_range() {
        assert_eq!(wrap_phase(-PI), PI);
        assert_eq!(wrap_phase(PI), PI);
        assert!((wrap_phase(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-15);
        assert_eq!(wrap_phase(0.0), 0.0);
    }

    #[test]
    fn joint_eigenstate_table() {
        let z = OrthonormalBasis::standard(3).unwrap();
        let kd = kd_joint(z.vector(0), &z, &z).unwrap();
        for m in 0..3 {
            for b in 0..3 {
                let expected = if m == 0 && b == 0 { 1.0 } else { 0.0 };
                assert_eq!(kd.entry(m, b), c(expected, 0.0));
            }
        }
        let mg = marginals(&kd).unwrap();
        assert_eq!(mg.m, vec![1.0, 0.0, 0.0]);
        assert_eq!(mg.b, vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn commuting_preparation_is_classical() {
        let m = OrthonormalBasis::random(&mut ChaCha8Rng::seed_from_u64(3), 3).unwrap();
        let b = OrthonormalBasis::random(&mut ChaCha8Rng::seed_from_u64(4), 3).unwrap();
        let a = m.vector(1).clone();
        let kd = kd_joint(&a, &m, &b).unwrap();
        for mi in 0..3 {
            for bi in 0..3 {
                let expected = if mi == 1 { inner(b.vector(bi), &a).unwrap().norm_sqr() } else { 0.0 };
                assert!((kd.entry(mi, bi) - expected).norm() < TOL);
            }
        }
        assert!(negativity(&kd).total_negativity < TOL);
    }

    #[test]
    fn three_box_column() {
        let (a, m, b) = three_box();
        let kd = kd_joint(&a, &m, &b).unwrap();
        let expected = [1.0 / 9.0, 1.0 / 9.0, -1.0 / 9.0];
        for (mi, e) in expected.iter().enumerate() {
            assert!((kd.entry(mi, 0) - e).norm() < TOL);
        }
        let mg = marginals(&kd).unwrap();
        assert!((mg.b[0] - 1.0 / 9.0).abs() < TOL);
        let neg = negativity(&kd);
        assert!((neg.min_real + 1.0 / 9.0).abs() < TOL);
        assert!((neg.total_negativity - 1.0 / 9.0).abs() < TOL);
        assert_eq!(neg.argmin, ("3".to_owned(), "b".to_owned()));
        assert!((optimal_action(&kd, 2, 0).unwrap() - PI).abs() < TOL);
        assert_eq!(optimal_action(&kd, 0, 0).unwrap(), 0.0);
    }

    #[test]
    fn three_box_weak_values() {
        let (a, m, b) = three_box();
        let post = b.vector(0);
        let w3 = weak_value(&a, post, &projector(m.vector(2))).unwrap();
        let w1 = weak_value(&a, post, &projector(m.vector(0))).unwrap();
        assert!((w3 - c(-1.0, 0.0)).norm() < TOL);
        assert!((w1 - c(1.0, 0.0)).norm() < TOL);
        let kd = kd_joint(&a, &m, &b).unwrap();
        assert!((w3 - kd.entry(2, 0) / kd.column_sum(0)).norm() < TOL);
    }

    #[test]
    fn weak_value_without_post_selection_is_expectation() {
        let a = bloch_state(0.9, 0.3);
        let op = pauli(Axis::X);
        let w = weak_value(&a, &a, &op).unwrap();
        assert!(w.im.abs() < TOL);
        assert!((w - op.expectation(&a).unwrap()).norm() < TOL);
        let e0 = StateVector::basis(2, 0).unwrap();
        let e1 = StateVector::basis(2, 1).unwrap();
        assert!(matches!(weak_value(&e0, &e1, &op), Err(Error::OrthogonalSelection(_))));
    }

    #[test]
    fn unitary_from_actions_examples() {
        let z = qubit_z();
        let id = unitary_from_actions(&ActionSpectrum::new(z.clone(), vec![0.0, 0.0]).unwrap());
        assert!(id.max_abs_diff(&Operator::identity(2)).unwrap() < TOL);
        let flip = unitary_from_actions(&ActionSpectrum::new(z, vec![0.0, PI]).unwrap());
        assert!(flip.max_abs_diff(&pauli(Axis::Z)).unwrap() < TOL);

        let rot = unitary_from_actions(&ActionSpectrum::new(qubit_x(), vec![0.0, PI]).unwrap());
        assert!(rot.unitarity_deviation() < TOL);
        let z_flip = unitary_from_actions(&ActionSpectrum::new(qubit_z(), vec![0.0, PI]).unwrap());
        for theta in [0.3, 1.0, 2.2] {
            // half turn about x: polar angle theta -> pi - theta
            let out = rot.apply_normalized(&bloch_state(theta, 0.0)).unwrap();
            let mirrored = bloch_state(PI - theta, 0.0);
            assert!(projector(&out).max_abs_diff(&projector(&mirrored)).unwrap() < TOL);
            // half turn about z: theta -> -theta
            let out = z_flip.apply_normalized(&bloch_state(theta, 0.0)).unwrap();
            let mirrored = bloch_state(-theta, 0.0);
            assert!(projector(&out).max_abs_diff(&projector(&mirrored)).unwrap() < TOL);
        }
    }

    #[test]
    fn overlap_direct_rejects_non_unitary() {
        let a = bloch_state(0.2, 0.0);
        let p = projector(&a);
        assert!(matches!(overlap_direct(&a, &a, &p), Err(Error::NotUnitary(_))));
        let b = bloch_state(1.2, 0.4);
        let got = overlap_direct(&a, &b, &Operator::identity(2)).unwrap();
        assert!((got - inner(&b, &a).unwrap().norm_sqr()).abs() < TOL);
    }

    #[test]
    fn leggett_garg_spin_flip_overlap() {
        let theta = PI / 3.0;
        let a = bloch_state(0.0, 0.0);
        let b = bloch_state(2.0 * theta, 0.0);
        let m = OrthonormalBasis::with_labels(["+1", "-1"], vec![bloch_state(theta, 0.0), bloch_state(theta + PI, 0.0)]).unwrap();
        let flip = ActionSpectrum::new(m.clone(), vec![0.0, PI]).unwrap();
        let u = unitary_from_actions(&flip);
        assert!((overlap_direct(&a, &b, &u).unwrap() - 1.0).abs() < TOL);
        let bb = OrthonormalBasis::with_labels(["+1", "-1"], vec![b, bloch_state(2.0 * theta + PI, 0.0)]).unwrap();
        let kd = kd_joint(&a, &m, &bb).unwrap();
        assert!((optimal_action(&kd, 1, 0).unwrap() - PI).abs() < TOL);
        assert!((kd.entry(1, 0).re + 0.125).abs() < TOL);
    }

    #[test]
    fn overlap_from_kd_examples() {
        let (a, m, b) = three_box();
        let kd = kd_joint(&a, &m, &b).unwrap();
        let flat = ActionSpectrum::new(m.clone(), vec![0.0; 3]).unwrap();
        assert!((overlap_from_kd(&kd, &flat, 0).unwrap() - 1.0 / 9.0).abs() < TOL);
        let s = ActionSpectrum::new(m.clone(), vec![0.0, 0.0, PI]).unwrap();
        assert!((overlap_from_kd(&kd, &s, 0).unwrap() - 1.0).abs() < TOL);
        assert!(is_half_periodic(&s));

        let other = ActionSpectrum::new(OrthonormalBasis::fourier(3).unwrap(), vec![0.0; 3]).unwrap();
        assert_eq!(overlap_from_kd(&kd, &other, 0), Err(Error::BasisMismatch));

        let z = OrthonormalBasis::standard(3).unwrap();
        let kd0 = kd_joint(z.vector(0), &m, &z).unwrap();
        assert!(matches!(
            overlap_from_kd(&kd0, &flat, 1),
            Err(Error::UndefinedOverlap(_))
        ));
    }

    #[test]
    fn optimal_action_rejects_zero_entry() {
        let z = OrthonormalBasis::standard(2).unwrap();
        let kd = kd_joint(z.vector(0), &z, &z).unwrap();
        assert!(matches!(optimal_action(&kd, 1, 1), Err(Error::UndefinedPhase { .. })));
        assert!(matches!(optimal_action(&kd, 2, 0), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn half_periodicity() {
        let z = qubit_z();
        assert!(is_half_periodic(&ActionSpectrum::new(z.clone(), vec![0.0, PI]).unwrap()));
        assert!(!is_half_periodic(&ActionSpectrum::new(z.clone(), vec![0.0, PI / 2.0]).unwrap()));
        assert!(is_half_periodic(&ActionSpectrum::new(z, vec![0.4, 0.4 - PI]).unwrap()));
    }

    #[test]
    fn reconstruction_examples() {
        let y_plus = StateVector::new(vec![c(FRAC_1_SQRT_2, 0.0), c(0.0, FRAC_1_SQRT_2)]).unwrap();
        let kd = kd_joint(&y_plus, &qubit_z(), &qubit_x()).unwrap();
        let rho = reconstruct_state(&kd).unwrap();
        assert!(rho.max_abs_diff(&projector(&y_plus)).unwrap() < TOL);

        let a = qubit_z().vector(1).clone();
        let kd = kd_joint(&a, &qubit_z(), &qubit_x()).unwrap();
        assert!(reconstruct_state(&kd).unwrap().max_abs_diff(&projector(&a)).unwrap() < TOL);

        let kd = kd_joint(&a, &qubit_z(), &qubit_z()).unwrap();
        assert_eq!(
            reconstruct_state(&kd),
            Err(Error::IllPosedReconstruction { m: "0".into(), b: "1".into() })
        );
    }

    #[test]
    fn negativity_fields() {
        let (a, m, b) = three_box();
        let kd = kd_joint(&a, &m, &b).unwrap();
        let n = negativity(&kd);
        assert!(n.total_negativity > 0.0 && n.min_real < 0.0);
        assert!(n.max_abs_phase > FRAC_PI_2);
        let by_hand: f64 = kd.table().iter().map(|z| (-z.re).max(0.0)).sum();
        assert_eq!(n.total_negativity, by_hand);
    }

    fn random_setup(seed: u64, d: usize) -> (StateVector, OrthonormalBasis, OrthonormalBasis, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = StateVector::random(&mut rng, d).unwrap();
        let m = OrthonormalBasis::random(&mut rng, d).unwrap();
        let b = OrthonormalBasis::random(&mut rng, d).unwrap();
        let phases = (0..d).map(|_| rng.random_range(-PI..PI)).collect();
        (a, m, b, phases)
    }

    proptest! {
        #[test]
        fn marginal_identities(seed in any::<u64>(), d in 2usize..=5) {
            let (a, m, b, _) = random_setup(seed, d);
            let kd = kd_joint(&a, &m, &b).unwrap();
            prop_assert!(kd.check_invariants().is_ok());
            prop_assert!(marginals(&kd).is_ok());
        }

        #[test]
        fn kd_overlap_matches_direct(seed in any::<u64>(), d in 2usize..=5) {
            let (a, m, b, phases) = random_setup(seed, d);
            let kd = kd_joint(&a, &m, &b).unwrap();
            let s = ActionSpectrum::new(m.clone(), phases).unwrap();
            let u = unitary_from_actions(&s);
            for bi in 0..d {
                if kd.post_selection_probability(bi) > TOL {
                    let via_kd = overlap_from_kd(&kd, &s, bi).unwrap();
                    let direct = overlap_direct(&a, b.vector(bi), &u).unwrap();
                    prop_assert!((via_kd - direct).abs() < 1e-9);
                }
            }
        }

        #[test]
        fn table_ignores_basis_phases(seed in any::<u64>(), d in 2usize..=4, phi in -PI..PI) {
            let (a, m, b, _) = random_setup(seed, d);
            let kd = kd_joint(&a, &m, &b).unwrap();
            let mut mv = m.vectors().to_vec();
            mv[0] = mv[0].with_global_phase(phi);
            let mut bv = b.vectors().to_vec();
            bv[d - 1] = bv[d - 1].with_global_phase(-2.0 * phi);
            let kd2 = kd_joint(&a.with_global_phase(phi), &OrthonormalBasis::from_vectors(mv).unwrap(), &OrthonormalBasis::from_vectors(bv).unwrap()).unwrap();
            for (x, y) in kd.table().iter().zip(kd2.table().iter()) {
                prop_assert!((x - y).norm() < TOL);
            }
        }

        #[test]
        fn half_periodic_unitary_squares_to_identity(seed in any::<u64>(), d in 2usize..=5, offset in -PI..PI) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let basis = OrthonormalBasis::random(&mut rng, d).unwrap();
            let phases = (0..d).map(|_| offset + if rng.random::<bool>() { PI } else { 0.0 }).collect();
            let s = ActionSpectrum::new(basis, phases).unwrap();
            prop_assert!(is_half_periodic(&s));
            let u = unitary_from_actions(&s);
            let sq = &u * &u;
            let global = sq.entry(0, 0);
            prop_assert!(sq.max_abs_diff(&Operator::identity(d).scaled(global)).unwrap() < TOL);
        }
    }
}
