use thiserror::Error;

/// Every fallible operation in the crate reports one of these.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("index {index} out of range 1..={n}")]
    IndexOutOfRange { index: u32, n: u32 },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("syntax error at column {column}: {message}")]
    Syntax { column: usize, message: String },

    #[error("degenerate form: {0}")]
    DegenerateForm(String),

    #[error("diagram is not of the expected shape: {0}")]
    Shape(String),

    #[error("oracle check failed: {0}")]
    Oracle(String),

    #[error("contradictory hypotheses: {0}")]
    Contradiction(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
