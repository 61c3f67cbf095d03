use std::io;
use std::path::PathBuf;

use arcflow::FlowError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    /// Parse or type error at a JSON location.
    #[error("{origin}:{line}:{column}: at `{field}`: {message}")]
    Config {
        origin: String,
        line: usize,
        column: usize,
        field: String,
        message: String,
    },
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Flow(#[from] FlowError),
    /// The run finished but ended abnormally; outputs were still written.
    #[error("run ended with {0}")]
    RunFailed(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status: 2 for usage and configuration problems, 1 for
    /// failures during a run.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config { .. } | Self::Invalid(_) | Self::Usage(_) => 2,
            Self::Io { .. } | Self::Flow(_) | Self::RunFailed(_) => 1,
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
