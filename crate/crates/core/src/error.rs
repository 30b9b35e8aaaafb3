//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid configuration or input that violates a documented contract.
    #[error("{0}")]
    Validation(String),

    /// A file could not be parsed; `line` is 1-based and includes the header.
    #[error("line {line}: {msg}")]
    Parse { line: u64, msg: String },

    /// Min-max normalization is undefined on a constant channel.
    #[error("channel {0} is constant (max == min); cannot min-max normalize")]
    DegenerateChannel(String),

    /// Array/matrix dimensions do not line up.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// A serialized model file is malformed or of an unsupported version.
    #[error("model format: {0}")]
    ModelFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Wraps a formatted message as a validation error.
    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }
}
