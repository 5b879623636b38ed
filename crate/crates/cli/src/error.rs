use std::path::Path;

use sdid_core::ErrorKind;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] sdid_core::Error),

    /// Some model rows failed; the report was still written.
    #[error("{message}")]
    Rows { kind: ErrorKind, message: String },
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            CliError::Config(_) | CliError::Io { .. } => ErrorKind::Input,
            CliError::Core(e) => e.kind(),
            CliError::Rows { kind, .. } => *kind,
        }
    }

    /// 2 input, 3 non-convergence, 4 identification.
    pub fn exit_code(&self) -> i32 {
        exit_code(self.kind())
    }
}

pub fn exit_code(kind: ErrorKind) -> i32 {
    match kind {
        ErrorKind::Input => 2,
        ErrorKind::NonConvergence => 3,
        ErrorKind::Identification => 4,
    }
}
