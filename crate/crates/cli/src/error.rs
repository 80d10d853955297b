use std::path::PathBuf;

use thiserror::Error;

/// Process exit statuses.
pub mod exit {
    pub const OK: i32 = 0;
    pub const VERIFICATION_FAILED: i32 = 1;
    pub const SCHEMA: i32 = 2;
    pub const MISSING_FILE: i32 = 3;
    pub const COMPUTATION: i32 = 4;
    pub const OUTPUT: i32 = 5;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {message}")]
    Schema { path: String, message: String },
    #[error("{}: file not found", .0.display())]
    MissingFile(PathBuf),
    #[error("{}: {source}", .path.display())]
    Read { path: PathBuf, source: std::io::Error },
    #[error("{}: {source}", .path.display())]
    Write { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Core(#[from] warpsym::Error),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn schema(path: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Schema { path: path.into(), message: message.into() }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Schema { .. } | CliError::Usage(_) => exit::SCHEMA,
            CliError::MissingFile(_) | CliError::Read { .. } => exit::MISSING_FILE,
            CliError::Write { .. } => exit::OUTPUT,
            CliError::Core(warpsym::Error::Parse { .. }) => exit::SCHEMA,
            CliError::Core(_) => exit::COMPUTATION,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
