use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Operands of a coordinatewise operation disagree on dimension.
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    /// A precondition of an operation was not met.
    #[error("contract violation: {0}")]
    Contract(String),

    /// Division by zero, non-finite input, or similar.
    #[error("domain error: {0}")]
    Domain(String),

    /// The step size reached or exceeded beta, so `beta - gamma` is not a valid divisor.
    #[error("ill-posed step: gamma = {gamma} must stay below beta = {beta}")]
    WellPosedness { gamma: f64, beta: f64 },

    /// `1 - alpha * gamma` vanished in the momentum variant.
    #[error("singular coefficient: 1 - alpha*gamma = 0 (alpha = {alpha}, gamma = {gamma})")]
    SingularCoefficient { alpha: f64, gamma: f64 },

    /// A state coordinate became NaN or infinite.
    #[error("diverged at step {step}")]
    Divergence { step: u64 },

    #[error("config error in `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("parse error at line {line}, column `{column}`: {message}")]
    Parse {
        line: usize,
        column: String,
        message: String,
    },

    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } | Error::Parse { .. } | Error::WellPosedness { .. } => 2,
            Error::Io { .. } => 3,
            _ => 1,
        }
    }
}
