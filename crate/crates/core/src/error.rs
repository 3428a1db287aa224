use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension {0} is not supported (need d >= 2)")]
    DimensionTooSmall(usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("matrix is not symmetric: asymmetry residual {residual:e} exceeds {limit:e}")]
    Asymmetric { residual: f64, limit: f64 },

    #[error("Jacobi eigensolver did not converge within {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("distortion constant K = {0} must exceed 1")]
    InvalidK(f64),

    #[error("point coincides with the stretch center")]
    DegeneratePoint,

    #[error("point lies on center lambda_{0}")]
    OnLambda(usize),

    #[error("lambda set must contain at least one center")]
    EmptyLambdaSet,

    #[error("centers lambda_{first} and lambda_{second} are closer than {min_separation:e}")]
    DuplicateCenters {
        first: usize,
        second: usize,
        min_separation: f64,
    },

    #[error("invalid scale ladder: {0}")]
    InvalidLadder(&'static str),

    #[error("direction is not a unit vector (norm {0})")]
    NotUnit(f64),

    #[error("every rung of the scale ladder was degenerate")]
    AllRungsDegenerate,

    #[error("spectrum out of range: {0}")]
    SpectrumOutOfRange(String),

    #[error("determinant routes disagree: product {product:e} vs expansion {expansion:e}")]
    InconsistentExpansion { product: f64, expansion: f64 },

    #[error("index {index} out of range 1..={len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
