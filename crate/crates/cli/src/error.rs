use std::path::PathBuf;

use hitpredict_core::Error as CoreError;
use hitpredict_ingest::IngestError;
use thiserror::Error;

pub type Result<T, E = CliError> = std::result::Result<T, E>;

/// Exit status for bad flags, config files, schemas or empty inputs.
pub const EXIT_CONFIG: i32 = 2;
/// Exit status when the API stayed unreachable after all retries.
pub const EXIT_TRANSPORT: i32 = 3;
/// Exit status when training data holds a single class.
pub const EXIT_SINGLE_CLASS: i32 = 4;
pub const EXIT_OTHER: i32 = 1;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] CoreError),

    #[error(transparent)]
    Ingest(#[from] IngestError),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_CONFIG,
            CliError::Io { .. } => EXIT_OTHER,
            CliError::Core(e) => core_code(e),
            CliError::Ingest(e) => match e {
                IngestError::Credential { .. }
                | IngestError::MissingCredentials(_)
                | IngestError::UnknownPlaylist(_)
                | IngestError::Config(_) => EXIT_CONFIG,
                IngestError::RetriesExhausted { .. } | IngestError::Refused(_) => EXIT_TRANSPORT,
                IngestError::Core(e) => core_code(e),
                _ => EXIT_OTHER,
            },
        }
    }
}

fn core_code(e: &CoreError) -> i32 {
    match e {
        CoreError::SingleClass(_) => EXIT_SINGLE_CLASS,
        CoreError::Io { .. } => EXIT_OTHER,
        _ => EXIT_CONFIG,
    }
}
