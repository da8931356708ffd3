use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("dimension {0} is outside the supported range 1..={max}", max = crate::qcore::MAX_DIM)]
    UnsupportedDimension(usize),

    #[error("operator product is empty")]
    EmptyProduct,

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("cannot normalize a zero vector")]
    ZeroVector,

    #[error("basis vectors {i} and {j} are not orthonormal (|<v_i|v_j> - delta_ij| = {deviation:e})")]
    NotOrthonormal { i: usize, j: usize, deviation: f64 },

    #[error("duplicate basis label `{0}`")]
    DuplicateLabel(String),

    #[error("expected {expected} labels, got {got}")]
    LabelCount { expected: usize, got: usize },

    #[error("unknown label `{0}`")]
    UnknownLabel(String),

    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("operator is not unitary (max |U^dag U - I| = {0:e})")]
    NotUnitary(f64),

    #[error("pre- and post-selection are orthogonal (|<b|a>| = {0:e})")]
    OrthogonalSelection(f64),

    #[error("post-selection probability {0:e} is too small; overlap is undefined")]
    UndefinedOverlap(f64),

    #[error("post-selection probability {0:e} is too small to condition on")]
    VanishingPostSelection(f64),

    #[error("entry ({m}, {b}) has vanishing modulus; its phase is undefined")]
    UndefinedPhase { m: String, b: String },

    #[error("reconstruction is ill-posed: <{b}|{m}> vanishes")]
    IllPosedReconstruction { m: String, b: String },

    #[error("action spectrum basis differs from the distribution's intermediate basis")]
    BasisMismatch,

    #[error("marginal invariant violated: {0}")]
    InvariantViolation(String),

    #[error("joint eigenspace is degenerate or empty: {0}")]
    DegenerateEigenspace(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
