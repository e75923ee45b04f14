use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("pagerank did not converge after {iterations} iterations (last L1 residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("requested {requested} Laplacian eigenvectors but only {available} nontrivial eigenpairs are available")]
    NotEnoughEigenpairs { requested: usize, available: usize },

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("backbone limit violated: {0}")]
    LimitViolation(String),

    #[error("bridge timed out after {0:?} waiting for a reply")]
    BridgeTimeout(std::time::Duration),

    #[error("bridge error: {0}")]
    Bridge(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn parse(path: impl Into<PathBuf>, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            msg: msg.into(),
        }
    }

    /// Process exit code for the command-line front end: 1 input, 2 numeric, 3 bridge.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } | Error::Parse { .. } | Error::InvalidInput(_) => 1,
            Error::NoConvergence { .. } | Error::NotEnoughEigenpairs { .. } | Error::Numeric(_) => 2,
            Error::LimitViolation(_) | Error::BridgeTimeout(_) | Error::Bridge(_) => 3,
            Error::Stage { source, .. } => source.exit_code(),
        }
    }

    /// Attributes the error to a pipeline stage.
    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}
