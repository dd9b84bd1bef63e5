use thiserror::Error;

/// Errors shared across the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// Input violates a precondition (dimension mismatch, empty data, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// A requested operation is not defined for this process variant.
    #[error("unsupported process variant: {0}")]
    UnsupportedVariant(String),
    /// A closed-form bound was queried outside its hypotheses.
    #[error("inapplicable: {0}")]
    Inapplicable(String),
    /// Signal processing failed to find a usable feature in the data.
    #[error("no peak found: {0}")]
    NoPeak(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
