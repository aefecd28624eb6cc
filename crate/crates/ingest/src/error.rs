use thiserror::Error;

pub type Result<T, E = IngestError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum IngestError {
    /// The token endpoint rejected the client credentials.
    #[error("credential error: token endpoint answered {status}: {message}")]
    Credential { status: u16, message: String },

    #[error("missing credentials: {0}")]
    MissingCredentials(String),

    #[error("unknown playlist `{0}`")]
    UnknownPlaylist(String),

    /// Every allowed attempt failed with a network error, 429 or 5xx.
    #[error("giving up on {method} {url} after {attempts} attempts: {last}")]
    RetriesExhausted {
        method: String,
        url: String,
        attempts: u32,
        last: String,
    },

    #[error("{method} {url} answered {status}")]
    Http {
        method: String,
        url: String,
        status: u16,
    },

    /// A payload could not be decoded. `id` names the track when known.
    #[error("parse error{}: {message}", id.as_ref().map(|i| format!(" for track {i}")).unwrap_or_default())]
    Parse { id: Option<String>, message: String },

    #[error("validation error for track {id}: {message}")]
    Validation { id: String, message: String },

    /// The transport refused the request outright (fixture miss, offline guard).
    #[error("transport refused request: {0}")]
    Refused(String),

    #[error("invalid client configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] hitpredict_core::Error),
}

impl IngestError {
    pub(crate) fn parse(id: Option<&str>, message: impl Into<String>) -> Self {
        IngestError::Parse {
            id: id.map(str::to_owned),
            message: message.into(),
        }
    }
}
