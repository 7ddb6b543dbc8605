//! Crate-wide error type.
//!
//! The variants mirror the exit-code contract of the CLI: configuration
//! errors (bad shapes, invalid settings) are distinct from input errors
//! (unreadable or malformed data), which are distinct from runtime failures.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid configuration: dimension mismatches, out-of-range settings.
    #[error("configuration error: {0}")]
    Config(String),

    /// Malformed or inconsistent input data.
    #[error("input error: {0}")]
    Input(String),

    /// A file did not conform to its declared format.
    #[error("format error: {0}")]
    Format(String),

    /// Line-oriented parse failure (manifests, RTTM).
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// Training diverged or produced non-finite values.
    #[error("training error: {0}")]
    Train(String),

    /// A numeric evaluation produced a non-finite result.
    #[error("evaluation error: {0}")]
    Eval(String),

    /// Internal invariant violation; indicates a bug, not bad input.
    #[error("internal error: {0}")]
    Internal(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub fn format(msg: impl Into<String>) -> Self {
        Error::Format(msg.into())
    }

    pub fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    pub fn train(msg: impl Into<String>) -> Self {
        Error::Train(msg.into())
    }

    pub fn eval(msg: impl Into<String>) -> Self {
        Error::Eval(msg.into())
    }

    pub fn internal(msg: impl Into<String>) -> Self {
        Error::Internal(msg.into())
    }
}
