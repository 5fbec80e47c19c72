use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("zero-dimensional {0} is not allowed")]
    EmptyDimension(&'static str),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// A solver configuration violates one of the convergence conditions.
    #[error("configuration rejected: {0}")]
    Config(String),

    #[error("product reformulation requires at least one composed block")]
    EmptyReformulation,

    /// NaN or infinity appeared in an intermediate quantity.
    #[error("non-finite value produced at stage `{stage}`")]
    NumericalFailure { stage: String },

    #[error("shape error: {0}")]
    Shape(String),
}

pub(crate) fn check_len(context: &'static str, expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            context,
            expected,
            actual,
        })
    }
}
