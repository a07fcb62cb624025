use std::path::PathBuf;

use thiserror::Error;

/// Failures of a command or request, with the exit code they map to.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid scenario JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid `{field}`: {message}")]
    Invalid { field: String, message: String },
    #[error("layer grid not found: {path}")]
    GridNotFound { field: String, path: String },
    #[error("{0}")]
    Core(#[from] pylon_core::Error),
    #[error("internal error: {0}")]
    Internal(String),
}

pub type CliResult<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn invalid(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self::Invalid { field: field.into(), message: message.into() }
    }

    /// 2 for bad input, 3 for infeasible problems, 4 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Read { .. } | Self::Json(_) | Self::Invalid { .. } | Self::GridNotFound { .. } => 2,
            Self::Core(e) if e.is_infeasible() => 3,
            Self::Core(e) if e.is_validation() => 2,
            _ => 4,
        }
    }

    /// Name of the offending input field, when one is known.
    pub fn field(&self) -> Option<String> {
        match self {
            Self::Invalid { field, .. } | Self::GridNotFound { field, .. } => Some(field.clone()),
            Self::Core(pylon_core::Error::InvalidParameter { field, .. }) => Some((*field).to_string()),
            Self::Core(pylon_core::Error::Forbidden { which } | pylon_core::Error::OutOfBounds { which, .. }) => {
                Some((*which).to_string())
            }
            _ => None,
        }
    }
}
