use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the model, estimators, bounds and harness.
#[derive(Debug, Error)]
pub enum Error {
    /// Geometry has no defined range or angle (colocated UE and stripe).
    #[error("geometry domain error: {0}")]
    Domain(String),

    /// A covariance matrix could not be factorized as positive definite.
    #[error("covariance factorization failed at pivot {pivot}: matrix is not positive definite")]
    Factorization { pivot: usize },

    /// A Fisher information block is numerically singular.
    #[error("singular Fisher information block `{block}`")]
    SingularFim { block: &'static str },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// Correlation sum vanished, so the common phase offset is undefined.
    #[error("phase offset undefined: cross-stripe correlation sum is zero")]
    UndefinedPhase,

    #[error("zero signature norm")]
    ZeroSignature,

    #[error("initialization failed: {0}")]
    Initialization(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error on {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    /// Process exit code for the CLI: 1 config, 2 numerical, 3 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 1,
            Error::Io { .. } | Error::Csv { .. } => 3,
            _ => 2,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
