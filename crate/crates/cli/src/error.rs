use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

/// Failures surfaced by the file formats, the benchmark driver and the CLI.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{0}")]
    Usage(String),
    #[error("{}:{line}: {message}", path.as_deref().map_or_else(|| "<input>".into(), |p| p.display().to_string()))]
    Parse { path: Option<PathBuf>, line: usize, message: String },
    #[error("{0}")]
    Data(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
}

impl Error {
    /// Process exit code: 1 usage, 2 data/parse, 3 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) => 1,
            Error::Parse { .. } | Error::Data(_) => 2,
            Error::Io { .. } => 3,
        }
    }

    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse { path: None, line, message: message.into() }
    }

    pub(crate) fn data(err: impl std::fmt::Display) -> Self {
        Error::Data(err.to_string())
    }

    /// Attaches `path` to a parse error that has none yet.
    pub fn in_file(self, path: &Path) -> Self {
        match self {
            Error::Parse { path: None, line, message } => {
                Error::Parse { path: Some(path.to_path_buf()), line, message }
            }
            other => other,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) trait IoContext<T> {
    fn at(self, path: &Path) -> Result<T>;
}

impl<T> IoContext<T> for io::Result<T> {
    fn at(self, path: &Path) -> Result<T> {
        self.map_err(|source| Error::Io { path: path.to_path_buf(), source })
    }
}
