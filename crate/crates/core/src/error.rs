use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("invalid configuration: {0}")]
    Validation(String),
    #[error("{routine} did not converge after {iterations} iterations")]
    NonConvergence {
        routine: &'static str,
        iterations: usize,
        /// Whatever was computed before giving up (deflated eigenvalues, last solver state).
        partial: Vec<num_complex::Complex64>,
    },
    #[error("matrix is singular to working precision ({0})")]
    Singular(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("enumeration too large: {size} exceeds cap {cap}")]
    TooLarge { size: u128, cap: u128 },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, LabError>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(LabError::Validation(msg.into()))
}
