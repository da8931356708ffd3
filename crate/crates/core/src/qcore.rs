//! Dense complex linear algebra for small Hilbert spaces.
//!
//! Everything here works with plain `O(d^3)` dense arithmetic on dimensions
//! `1..=MAX_DIM`. Values are immutable once constructed. Tensor products
//! use the convention that the left factor is system 1 and carries the slow
//! index: `(u ⊗ v)[i * v.dim() + j] = u[i] * v[j]`.

use std::collections::HashSet;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Complex amplitude / probability carrier.
pub type ComplexScalar = Complex64;

/// Largest supported Hilbert space dimension.
pub const MAX_DIM: usize = 16;

/// Tolerance for analytic identities.
pub const TOL: f64 = 1e-10;

/// Amplitudes below this modulus are ignored when fixing the global phase.
const PHASE_FLOOR: f64 = 1e-12;

fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 || dim > MAX_DIM {
        return Err(Error::UnsupportedDimension(dim));
    }
    Ok(())
}

fn same_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

fn all_finite<'a>(mut it: impl Iterator<Item = &'a Complex64>) -> bool {
    it.all(|z| z.re.is_finite() && z.im.is_finite())
}

/// A normalized pure state.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amp: DVector<Complex64>,
}

impl StateVector {
    /// Normalizes `amps`. The global phase is left untouched.
    pub fn new(amps: Vec<Complex64>) -> Result<Self> {
        Self::from_dvector(DVector::from_vec(amps))
    }

    /// Normalizes `amps` and rotates the global phase so that the first
    /// significant amplitude is real and positive.
    pub fn canonical(amps: Vec<Complex64>) -> Result<Self> {
        Ok(Self::new(amps)?.with_canonical_phase())
    }

    pub fn from_real(amps: &[f64]) -> Result<Self> {
        Self::new(amps.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// Standard basis vector `e_k`.
    pub fn basis(dim: usize, k: usize) -> Result<Self> {
        check_dim(dim)?;
        if k >= dim {
            return Err(Error::IndexOutOfRange { index: k, dim });
        }
        let mut amp = DVector::zeros(dim);
        amp[k] = Complex64::new(1.0, 0.0);
        Ok(Self { amp })
    }

    pub fn from_dvector(v: DVector<Complex64>) -> Result<Self> {
        check_dim(v.len())?;
        if !all_finite(v.iter()) {
            return Err(Error::NonFinite("state amplitudes"));
        }
        let norm = v.norm();
        if !norm.is_finite() {
            return Err(Error::NonFinite("state norm"));
        }
        if norm <= f64::MIN_POSITIVE {
            return Err(Error::ZeroVector);
        }
        Ok(Self {
            amp: v.unscale(norm),
        })
    }

    /// Haar-random state drawn from normalized complex Gaussian amplitudes.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Result<Self> {
        let amps = (0..dim)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        Self::new(amps)
    }

    pub fn dim(&self) -> usize {
        self.amp.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        self.amp.as_slice()
    }

    pub fn as_vector(&self) -> &DVector<Complex64> {
        &self.amp
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amp.norm_squared()
    }

    pub fn with_canonical_phase(&self) -> Self {
        match self.amp.iter().find(|z| z.norm() > PHASE_FLOOR) {
            Some(first) => {
                let rot = first.conj() / first.norm();
                Self {
                    amp: self.amp.map(|z| z * rot),
                }
            }
            None => self.clone(),
        }
    }

    /// Multiplies every amplitude by `e^{i phi}`.
    pub fn with_global_phase(&self, phi: f64) -> Self {
        let rot = Complex64::from_polar(1.0, phi);
        Self {
            amp: self.amp.map(|z| z * rot),
        }
    }
}

impl fmt::Display for StateVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, z) in self.amp.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{z}")?;
        }
        write!(f, ")")
    }
}

/// Square complex matrix with `entry(row, col) = <row|A|col>`.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    mat: DMatrix<Complex64>,
}

impl Operator {
    pub fn from_matrix(mat: DMatrix<Complex64>) -> Result<Self> {
        check_dim(mat.nrows())?;
        same_dim(mat.nrows(), mat.ncols())?;
        if !all_finite(mat.iter()) {
            return Err(Error::NonFinite("operator entries"));
        }
        Ok(Self { mat })
    }

    /// Builds an operator from row-major entries.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let dim = rows.len();
        check_dim(dim)?;
        for row in rows {
            same_dim(dim, row.len())?;
        }
        Self::from_matrix(DMatrix::from_fn(dim, dim, |r, c| rows[r][c]))
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let rows: Vec<Vec<Complex64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    /// # Panics
    /// If `dim` is zero or exceeds [`MAX_DIM`].
    pub fn identity(dim: usize) -> Self {
        assert!(dim > 0 && dim <= MAX_DIM, "unsupported dimension {dim}");
        Self {
            mat: DMatrix::identity(dim, dim),
        }
    }

    /// # Panics
    /// If `dim` is zero or exceeds [`MAX_DIM`].
    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0 && dim <= MAX_DIM, "unsupported dimension {dim}");
        Self {
            mat: DMatrix::zeros(dim, dim),
        }
    }

    /// Matrix with i.i.d. complex Gaussian entries.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self {
            mat: DMatrix::from_fn(dim, dim, |_, _| {
                Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
            }),
        })
    }

    /// Random Hermitian matrix `(G + G^dag) / 2`.
    pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Result<Self> {
        let g = Self::random(rng, dim)?;
        Ok(Self {
            mat: (&g.mat + g.mat.adjoint()).unscale(2.0),
        })
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.mat[(row, col)]
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.mat
    }

    pub fn adjoint(&self) -> Self {
        Self {
            mat: self.mat.adjoint(),
        }
    }

    pub fn trace(&self) -> Complex64 {
        self.mat.trace()
    }

    pub fn checked_mul(&self, rhs: &Operator) -> Result<Operator> {
        same_dim(self.dim(), rhs.dim())?;
        Ok(Self {
            mat: &self.mat * &rhs.mat,
        })
    }

    /// `A|v>`, not renormalized.
    pub fn apply(&self, v: &StateVector) -> Result<DVector<Complex64>> {
        same_dim(self.dim(), v.dim())?;
        Ok(&self.mat * &v.amp)
    }

    /// `A|v>` renormalized to a state.
    pub fn apply_normalized(&self, v: &StateVector) -> Result<StateVector> {
        StateVector::from_dvector(self.apply(v)?)
    }

    /// `<u|A|v>`.
    pub fn matrix_element(&self, u: &StateVector, v: &StateVector) -> Result<Complex64> {
        same_dim(u.dim(), v.dim())?;
        Ok(u.amp.dotc(&self.apply(v)?))
    }

    /// `<v|A|v>`.
    pub fn expectation(&self, v: &StateVector) -> Result<Complex64> {
        self.matrix_element(v, v)
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self {
            mat: self.mat.map(|z| z * c),
        }
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Operator) -> Result<f64> {
        same_dim(self.dim(), other.dim())?;
        Ok(self
            .mat
            .iter()
            .zip(other.mat.iter())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max))
    }

    /// Largest entrywise modulus of `U^dag U - I`.
    pub fn unitarity_deviation(&self) -> f64 {
        let prod = self.adjoint().checked_mul(self).expect("same dimension");
        prod.max_abs_diff(&Self::identity(self.dim()))
            .expect("same dimension")
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        self.max_abs_diff(&self.adjoint()).expect("same dimension")
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident, $op:tt) => {
        /// # Panics
        /// On dimension mismatch; use the checked methods where inputs are untrusted.
        impl $tr<&Operator> for &Operator {
            type Output = Operator;
            fn $method(self, rhs: &Operator) -> Operator {
                assert_eq!(self.dim(), rhs.dim(), "operator dimension mismatch");
                Operator { mat: &self.mat $op &rhs.mat }
            }
        }
        impl $tr<Operator> for Operator {
            type Output = Operator;
            fn $method(self, rhs: Operator) -> Operator {
                &self $op &rhs
            }
        }
    };
}

binop!(Add, add, +);
binop!(Sub, sub, -);
binop!(Mul, mul, *);

impl Mul<&Operator> for f64 {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        rhs.scaled(Complex64::new(self, 0.0))
    }
}

impl Mul<Operator> for f64 {
    type Output = Operator;
    fn mul(self, rhs: Operator) -> Operator {
        self * &rhs
    }
}

impl Neg for &Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        self.scaled(Complex64::new(-1.0, 0.0))
    }
}

/// `<u|v> = sum_k conj(u_k) v_k`.
pub fn inner(u: &StateVector, v: &StateVector) -> Result<Complex64> {
    same_dim(u.dim(), v.dim())?;
    Ok(u.amp.dotc(&v.amp))
}

/// `|v><v|`.
pub fn projector(v: &StateVector) -> Operator {
    Operator {
        mat: &v.amp * v.amp.adjoint(),
    }
}

pub fn tensor_state(u: &StateVector, v: &StateVector) -> Result<StateVector> {
    check_dim(u.dim() * v.dim())?;
    Ok(StateVector {
        amp: u.amp.kronecker(&v.amp),
    })
}

pub fn tensor_op(a: &Operator, b: &Operator) -> Result<Operator> {
    check_dim(a.dim() * b.dim())?;
    Ok(Operator {
        mat: a.mat.kronecker(&b.mat),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

pub fn pauli(axis: Axis) -> Operator {
    let o = Complex64::new(0.0, 0.0);
    let l = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    let rows = match axis {
        Axis::X => [[o, l], [l, o]],
        Axis::Y => [[o, -i], [i, o]],
        Axis::Z => [[l, o], [o, -l]],
    };
    Operator {
        mat: DMatrix::from_fn(2, 2, |r, c| rows[r][c]),
    }
}

/// `+1` eigenstate of `cos(theta) Z + sin(theta) cos(phi) X + sin(theta) sin(phi) Y`,
/// returned as `(cos(theta/2), e^{i phi} sin(theta/2))`.
pub fn bloch_state(theta: f64, phi: f64) -> StateVector {
    let (s, c) = (theta / 2.0).sin_cos();
    StateVector {
        amp: DVector::from_vec(vec![
            Complex64::new(c, 0.0),
            Complex64::from_polar(s, phi),
        ]),
    }
}

/// `Tr(ops[0] ops[1] ... ops[n-1])`, multiplied left to right.
pub fn product_trace(ops: &[&Operator]) -> Result<Complex64> {
    let (first, rest) = ops.split_first().ok_or(Error::EmptyProduct)?;
    let mut acc = (*first).clone();
    for op in rest {
        acc = acc.checked_mul(op)?;
    }
    Ok(acc.trace())
}

/// A complete, labeled orthonormal basis.
#[derive(Clone, Debug, PartialEq)]
pub struct OrthonormalBasis {
    labels: Vec<String>,
    vectors: Vec<StateVector>,
}

impl OrthonormalBasis {
    pub fn new(labels: Vec<String>, vectors: Vec<StateVector>) -> Result<Self> {
        let dim = vectors.first().map(StateVector::dim).unwrap_or(0);
        check_dim(dim)?;
        same_dim(dim, vectors.len())?;
        for v in &vectors {
            same_dim(dim, v.dim())?;
        }
        if labels.len() != dim {
            return Err(Error::LabelCount {
                expected: dim,
                got: labels.len(),
            });
        }
        let mut seen = HashSet::new();
        for l in &labels {
            if !seen.insert(l.as_str()) {
                return Err(Error::DuplicateLabel(l.clone()));
            }
        }
        for i in 0..dim {
            for j in i..dim {
                let ov = vectors[i].amp.dotc(&vectors[j].amp);
                let target = if i == j { 1.0 } else { 0.0 };
                let deviation = (ov - target).norm();
                if deviation > TOL {
                    return Err(Error::NotOrthonormal { i, j, deviation });
                }
            }
        }
        Ok(Self { labels, vectors })
    }

    /// Basis with labels `"0"`, `"1"`, ...
    pub fn from_vectors(vectors: Vec<StateVector>) -> Result<Self> {
        let labels = (0..vectors.len()).map(|k| k.to_string()).collect();
        Self::new(labels, vectors)
    }

    pub fn with_labels<S: Into<String>>(
        labels: impl IntoIterator<Item = S>,
        vectors: Vec<StateVector>,
    ) -> Result<Self> {
        Self::new(labels.into_iter().map(Into::into).collect(), vectors)
    }

    pub fn standard(dim: usize) -> Result<Self> {
        let vectors = (0..dim)
            .map(|k| StateVector::basis(dim, k))
            .collect::<Result<Vec<_>>>()?;
        Self::from_vectors(vectors)
    }

    /// Discrete Fourier basis; vector `k` has amplitudes `e^{2 pi i jk/d} / sqrt(d)`.
    pub fn fourier(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        let vectors = (0..dim)
            .map(|k| {
                StateVector::new(
                    (0..dim)
                        .map(|j| {
                            let angle = 2.0 * std::f64::consts::PI * (j * k) as f64 / dim as f64;
                            Complex64::from_polar(1.0, angle)
                        })
                        .collect(),
                )
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_vectors(vectors)
    }

    /// Columns of a Haar-random unitary.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Result<Self> {
        let g = Operator::random(rng, dim)?;
        let qr = g.mat.qr();
        let (q, r) = (qr.q(), qr.r());
        let vectors = (0..dim)
            .map(|k| {
                let d = r[(k, k)];
                let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
                StateVector::from_dvector(q.column(k).map(|z| z * phase))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_vectors(vectors)
    }

    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn vectors(&self) -> &[StateVector] {
        &self.vectors
    }

    pub fn vector(&self, index: usize) -> &StateVector {
        &self.vectors[index]
    }

    pub fn label(&self, index: usize) -> &str {
        &self.labels[index]
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_owned()))
    }

    pub fn by_label(&self, label: &str) -> Result<&StateVector> {
        Ok(&self.vectors[self.index_of(label)?])
    }

    /// Largest entrywise modulus of `sum_i |v_i><v_i| - I`.
    pub fn completeness_deviation(&self) -> f64 {
        let sum = self
            .vectors
            .iter()
            .fold(Operator::zeros(self.dim()), |acc, v| &acc + &projector(v));
        sum.max_abs_diff(&Operator::identity(self.dim()))
            .expect("same dimension")
    }

    /// Product basis, labels joined as `"left,right"`, left factor slow.
    pub fn tensor(&self, other: &OrthonormalBasis) -> Result<Self> {
        let mut labels = Vec::with_capacity(self.dim() * other.dim());
        let mut vectors = Vec::with_capacity(self.dim() * other.dim());
        for (l1, v1) in self.labels.iter().zip(&self.vectors) {
            for (l2, v2) in other.labels.iter().zip(&other.vectors) {
                labels.push(format!("{l1},{l2}"));
                vectors.push(tensor_state(v1, v2)?);
            }
        }
        Self::new(labels, vectors)
    }

    /// Applies `u` to every vector, keeping the labels.
    pub fn transformed(&self, u: &Operator) -> Result<Self> {
        let vectors = self
            .vectors
            .iter()
            .map(|v| u.apply_normalized(v))
            .collect::<Result<Vec<_>>>()?;
        Self::new(self.labels.clone(), vectors)
    }

    pub fn relabeled<S: Into<String>>(&self, labels: impl IntoIterator<Item = S>) -> Result<Self> {
        Self::with_labels(labels, self.vectors.clone())
    }

    /// True when both bases define the same projectors in the same order.
    pub fn same_projectors(&self, other: &OrthonormalBasis, tol: f64) -> bool {
        self.dim() == other.dim()
            && self.vectors.iter().zip(&other.vectors).all(|(u, v)| {
                projector(u)
                    .max_abs_diff(&projector(v))
                    .map(|d| d <= tol)
                    .unwrap_or(false)
            })
    }
}
