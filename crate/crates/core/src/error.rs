use thiserror::Error;

/// Errors raised anywhere in the suite.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parameter out of domain: {0}")]
    ParameterDomain(String),

    #[error("argument out of domain: {0}")]
    OutOfDomain(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("incompatible combination: {0}")]
    Incompatible(String),

    #[error("numeric divergence at step {step}: {detail}")]
    Divergence {
        step: usize,
        detail: String,
        last_finite: Vec<f64>,
    },

    #[error("invalid state: {0}")]
    State(String),

    #[error("parse error in {file} at line {line}: {msg}")]
    Parse {
        file: String,
        line: usize,
        msg: String,
    },

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::ParameterDomain(msg.into())
    }

    /// True for failures caused by non-finite numerics.
    pub fn is_divergence(&self) -> bool {
        matches!(self, Error::Divergence { .. })
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
