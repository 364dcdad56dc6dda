use std::io;
use std::path::PathBuf;

/// Errors surfaced by ingestion, file formats, evaluation and the service.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("config error: {0}")]
    Config(String),
    #[error("format error at line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("line {line}: {source}")]
    GraphAt { line: usize, source: ars_core::Error },
    #[error(transparent)]
    Graph(#[from] ars_core::Error),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("service error: {0}")]
    Service(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(line: usize, message: impl Into<String>) -> Self {
        Error::Format {
            line,
            message: message.into(),
        }
    }

    /// True for errors caused by the data being queried rather than by the
    /// way the tool was invoked.
    pub fn is_domain(&self) -> bool {
        matches!(self, Error::Graph(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
