use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    /// Input violates a documented precondition or type invariant.
    #[error("validation error: {0}")]
    Validation(String),

    /// A text file could not be parsed.
    #[error("parse error in {path} line {line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    /// Between-class scatter or between-set covariance vanished during fusion.
    #[error("degenerate fusion: {0}")]
    DegenerateFusion(String),

    /// The SVM solver hit its iteration cap.
    #[error("solver did not converge after {iterations} updates (max KKT violation {violation:e}){context}")]
    NonConvergence {
        iterations: usize,
        violation: f64,
        context: String,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("image error on {path}: {message}")]
    Image { path: PathBuf, message: String },

    #[error("serialization error: {0}")]
    Serde(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the command-line driver.
    ///
    /// 2 validation, 3 numerical non-convergence, 4 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Validation(_) | Error::Parse { .. } | Error::DegenerateFusion(_) => 2,
            Error::NonConvergence { .. } => 3,
            Error::Io { .. } | Error::Image { .. } | Error::Serde(_) => 4,
        }
    }

    /// Prefix the error with the pipeline stage that produced it.
    pub fn in_stage(self, stage: &str) -> Self {
        match self {
            Error::Validation(m) => Error::Validation(format!("{stage}: {m}")),
            Error::DegenerateFusion(m) => Error::DegenerateFusion(format!("{stage}: {m}")),
            Error::NonConvergence {
                iterations,
                violation,
                context,
            } => Error::NonConvergence {
                iterations,
                violation,
                context: format!("{context} [{stage}]"),
            },
            Error::Serde(m) => Error::Serde(format!("{stage}: {m}")),
            other => other,
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serde(e.to_string())
    }
}
