use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, HbfError>;

#[derive(Debug, Error)]
pub enum HbfError {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("channel carries no multipath parameters")]
    MissingPaths,

    #[error("parse error at line {line}{}: {message}", column.map(|c| format!(", column {c}")).unwrap_or_default())]
    Parse {
        line: usize,
        column: Option<usize>,
        message: String,
    },

    #[error("degenerate channel: rank {rank} is below the {required} streams requested")]
    DegenerateChannel { rank: usize, required: usize },

    #[error("degenerate analog precoder: {0}")]
    DegenerateAnalog(String),

    #[error("combiner is rank deficient")]
    SingularCombiner,

    #[error("unsupported mode: {0}")]
    UnsupportedMode(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl HbfError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HbfError::Io {
            path: path.into(),
            source,
        }
    }
}
