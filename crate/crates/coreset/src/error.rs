use std::path::PathBuf;

use coreset_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}, line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("{0}")]
    Core(#[from] CoreError),

    /// Invalid generator parameters or malformed data.
    #[error("{0}")]
    Data(String),

    /// Invalid experiment configuration or a run with no successful trials.
    #[error("{0}")]
    Experiment(String),

    #[error("{0}")]
    Invalid(String),
}

impl Error {
    /// The subsystem an error originates from, used to prefix CLI messages.
    pub fn module(&self) -> &'static str {
        match self {
            Error::Io { .. } | Error::Parse { .. } | Error::Json { .. } | Error::Data(_) => "data",
            Error::Experiment(_) => "evaluation",
            Error::Invalid(_) => "cli",
            Error::Core(e) => match e {
                CoreError::DimensionMismatch { .. }
                | CoreError::Domain { .. }
                | CoreError::NonFinite { .. }
                | CoreError::InvalidSpec(_)
                | CoreError::NotPositiveDefinite { .. }
                | CoreError::NotSymmetric { .. } => "divergences",
                CoreError::TooFewPoints { .. } => "sampling",
                CoreError::PartitionLimit { .. } | CoreError::NonPositiveReference(_) => "evaluation",
                CoreError::InvalidParameter(_) => "clustering",
            },
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
