use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid design: {0}")]
    InvalidDesign(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("covariance matrix singular after jitter escalation (nugget reached {0:e})")]
    SingularCovariance(f64),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for failures of the numerics (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Numerical(_) | Error::SingularCovariance(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
