//! Error types shared across the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Operands have incompatible or unexpected shapes.
    #[error("shape error: {0}")]
    Shape(String),

    /// A caller-supplied parameter is out of range.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// Ensemble validation failed; every violated invariant is listed.
    #[error("invalid ensemble: {}", .0.join("; "))]
    Validation(Vec<String>),

    /// A density matrix violates hermiticity, unit trace, or positivity.
    #[error("invalid density matrix: {0}")]
    Density(String),

    /// The underlying eigensolver or factorization failed.
    #[error("numeric failure: {0}")]
    Numeric(String),

    /// Two independent computation routes disagree beyond tolerance.
    #[error("consistency check failed: {0}")]
    Consistency(String),

    /// Malformed input document.
    #[error("parse error: {0}")]
    Parse(String),

    /// Requested builtin ensemble does not exist.
    #[error("unknown builtin ensemble `{0}`")]
    UnknownBuiltin(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<ndarray_linalg::error::LinalgError> for Error {
    fn from(e: ndarray_linalg::error::LinalgError) -> Self {
        Error::Numeric(e.to_string())
    }
}
