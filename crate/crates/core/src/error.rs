use thiserror::Error;

/// Errors raised by the divergence routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("natural parameter {0:?} lies outside the natural parameter space")]
    DomainViolation(Vec<f64>),

    #[error("order {k} exceeds the cancellation guard k_max = {k_max}")]
    OrderTooLarge { k: usize, k_max: usize },

    #[error("unknown generator: {0}")]
    UnknownGenerator(String),

    #[error("alpha-divergence is singular at alpha = {0}")]
    SingularAlpha(f64),

    #[error("generator {generator} has no derivatives at {point}")]
    OutsideDerivativeDomain { generator: String, point: f64 },

    #[error("generator {0} is not analytic and has no Taylor expansion")]
    NotAnalytic(String),

    #[error("invalid ratio interval [{m}, {big_m}]")]
    InvalidInterval { m: f64, big_m: f64 },

    #[error("quadrature oracle supports dimension <= {max}, got {got}")]
    UnsupportedDimension { got: usize, max: usize },

    #[error("non-finite summand at {0}")]
    NonFiniteSummand(String),
}

pub type Result<T> = std::result::Result<T, Error>;
