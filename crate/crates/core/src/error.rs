use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("coordinate {index} is not strictly positive ({value})")]
    NonPositive { index: usize, value: f64 },

    #[error("coordinate {index} is not finite")]
    NonFinite { index: usize },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("exponential map underflowed to zero at coordinate {coord}")]
    ExpUnderflow { coord: usize },

    #[error("exponential map overflowed at coordinate {coord}")]
    ExpOverflow { coord: usize },

    #[error("mirror step infeasible: denominator {denominator} <= 0 at coordinate {coord}")]
    StepInfeasible { coord: usize, denominator: f64 },

    #[error("direction is not a descent direction (slope {slope})")]
    NotDescent { slope: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("objective undefined: {0}")]
    Domain(String),

    #[error("hessian-vector product not available for this objective")]
    NoHessian,

    #[error("i/o error: {0}")]
    Io(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
