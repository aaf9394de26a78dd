use thiserror::Error;

pub type Result<T, E = PiagError> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PiagError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid configuration: {0}")]
    InvalidConfiguration(String),

    /// Non-finite values or runaway objective at the given iteration.
    #[error("iteration diverged at k = {iteration}: {reason}")]
    Divergence { iteration: usize, reason: String },

    /// No reference solution can be produced for this problem.
    #[error("not available: {0}")]
    NotAvailable(String),

    #[error("problem generation failed: {0}")]
    Generation(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl PiagError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        PiagError::InvalidArgument(msg.into())
    }
}
