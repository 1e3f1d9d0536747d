use std::path::PathBuf;

use cutsched_core::Error as CoreError;
use thiserror::Error;

/// Exit status for invalid input (bad file, bad flag, failed validation).
pub const EXIT_VALIDATION: u8 = 2;
/// Exit status when a job fits no device, even after cutting.
pub const EXIT_UNSCHEDULABLE: u8 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {}: {source}", path.display())]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot write {}: {source}", path.display())]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}:{line}: {msg}", path.display())]
    Parse { path: PathBuf, line: usize, msg: String },
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Core(#[from] CoreError),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(CoreError::Unschedulable { .. }) => EXIT_UNSCHEDULABLE,
            CliError::Write { .. } => 1,
            _ => EXIT_VALIDATION,
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;

/// Message of a core error without its category prefix, for line-level
/// parse diagnostics.
pub(crate) fn bare_message(e: &CoreError) -> String {
    match e {
        CoreError::Validation(msg) => msg.clone(),
        other => other.to_string(),
    }
}
