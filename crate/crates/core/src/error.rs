use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("qubit index {index} out of range for {n_qubits} qubits")]
    QubitOutOfRange { index: usize, n_qubits: usize },

    #[error("duplicate target qubit {0}")]
    DuplicateTarget(usize),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("training diverged at epoch {epoch}: loss = {loss}")]
    Training { epoch: usize, loss: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error("invalid value for `{key}`: {reason}")]
    Validation { key: String, reason: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: malformed file: {reason}")]
    Format { path: PathBuf, reason: String },

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the CLI: 2 config/validation, 3 numeric/training,
    /// 4 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Stage { source, .. } => source.exit_code(),
            Error::Io { .. } | Error::Format { .. } => 4,
            Error::Numeric(_) | Error::Training { .. } => 3,
            Error::InvalidArgument(_)
            | Error::Capacity(_)
            | Error::DimensionMismatch { .. }
            | Error::QubitOutOfRange { .. }
            | Error::DuplicateTarget(_)
            | Error::Config(_)
            | Error::Validation { .. } => 2,
        }
    }
}
