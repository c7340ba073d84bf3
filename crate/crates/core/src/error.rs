use thiserror::Error;

/// Errors raised by the solvers, data ingestion and diagnostics.
#[derive(Debug, Error)]
pub enum Error {
    /// A numeric parameter is outside its admissible range.
    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    /// Input data violates a structural requirement (non-finite values, bad labels, ...).
    #[error("invalid data: {0}")]
    Data(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("cannot partition {rows} rows into {blocks} blocks")]
    Partition { rows: usize, blocks: usize },

    /// An iterate became non-finite or exceeded the divergence bound.
    #[error("solver diverged at iteration {iteration}")]
    Diverged { iteration: usize },

    #[error("parse error on line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("model selection failed: {0}")]
    Selection(String),

    #[error("system too large for dense diagnostics ({dim} > {limit})")]
    Oversize { dim: usize, limit: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Parameter {
            name,
            reason: reason.into(),
        }
    }
}
