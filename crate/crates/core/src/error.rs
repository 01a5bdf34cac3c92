use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("size limit exceeded: {what} needs {requested}, limit is {limit}")]
    Size {
        what: &'static str,
        requested: u128,
        limit: u128,
    },

    #[error("operation requires the {expected} weight family")]
    Family { expected: &'static str },

    #[error("degenerate linear part: norm {norm:e} is below {tolerance:e}")]
    DegenerateLinearPart { norm: f64, tolerance: f64 },

    #[error(
        "eigen-decomposition did not converge after {sweeps} sweeps (off-diagonal {residual:e})"
    )]
    EigenFailure { sweeps: usize, residual: f64 },

    #[error("matrix is not orthogonal: max |U^T U - I| = {residual:e}")]
    NotOrthogonal { residual: f64 },

    #[error(
        "construction matrix does not reproduce the Brownian covariance: residual {residual:e}"
    )]
    BadConstruction { residual: f64 },

    #[error("non-finite value {value} at {location}")]
    NonFinite { value: f64, location: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn dim(expected: usize, found: usize) -> Self {
        Error::DimensionMismatch { expected, found }
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn parse(msg: impl Into<String>) -> Self {
        Error::Parse(msg.into())
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::dim(expected, found))
    }
}
