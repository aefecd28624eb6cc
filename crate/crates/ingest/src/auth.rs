use std::fmt;
use std::time::{Duration, SystemTime};

use crate::error::{IngestError, Result};

/// Tokens are treated as expired this long before their stated expiry.
pub const REFRESH_MARGIN: Duration = Duration::from_secs(30);

pub const CLIENT_ID_VAR: &str = "SPOTIFY_CLIENT_ID";
pub const CLIENT_SECRET_VAR: &str = "SPOTIFY_CLIENT_SECRET";

/// Client-credentials pair. `Debug` never prints the secret.
#[derive(Clone, PartialEq, Eq)]
pub struct ApiCredentials {
    client_id: String,
    client_secret: String,
}

impl ApiCredentials {
    pub fn new(client_id: impl Into<String>, client_secret: impl Into<String>) -> Result<Self> {
        let (client_id, client_secret) = (client_id.into(), client_secret.into());
        if client_id.trim().is_empty() {
            return Err(IngestError::MissingCredentials("client id is empty".into()));
        }
        if client_secret.trim().is_empty() {
            return Err(IngestError::MissingCredentials("client secret is empty".into()));
        }
        Ok(ApiCredentials {
            client_id,
            client_secret,
        })
    }

    /// Reads `SPOTIFY_CLIENT_ID` and `SPOTIFY_CLIENT_SECRET`.
    pub fn from_env() -> Result<Self> {
        let get = |name: &str| {
            std::env::var(name)
                .map_err(|_| IngestError::MissingCredentials(format!("{name} is not set")))
        };
        ApiCredentials::new(get(CLIENT_ID_VAR)?, get(CLIENT_SECRET_VAR)?)
    }

    pub fn client_id(&self) -> &str {
        &self.client_id
    }

    pub(crate) fn basic_auth(&self) -> String {
        use base64::Engine;
        let raw = format!("{}:{}", self.client_id, self.client_secret);
        format!("Basic {}", base64::engine::general_purpose::STANDARD.encode(raw))
    }
}

impl fmt::Debug for ApiCredentials {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ApiCredentials")
            .field("client_id", &self.client_id)
            .field("client_secret", &"<redacted>")
            .finish()
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct AccessToken {
    pub token: String,
    pub expires_at: SystemTime,
}

impl AccessToken {
    pub fn is_valid_at(&self, now: SystemTime) -> bool {
        now + REFRESH_MARGIN < self.expires_at
    }
}

impl fmt::Debug for AccessToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AccessToken")
            .field("token", &"<redacted>")
            .field("expires_at", &self.expires_at)
            .finish()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct PlaylistRef {
    pub playlist_id: String,
    #[serde(default)]
    pub description: String,
}

impl PlaylistRef {
    pub fn new(playlist_id: impl Into<String>, description: impl Into<String>) -> Result<Self> {
        let playlist_id = playlist_id.into();
        if playlist_id.trim().is_empty() {
            return Err(IngestError::Config("playlist id is empty".into()));
        }
        Ok(PlaylistRef {
            playlist_id,
            description: description.into(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn secret_stays_out_of_debug() {
        let c = ApiCredentials::new("id-1", "s3cr3t").unwrap();
        assert!(!format!("{c:?}").contains("s3cr3t"));
        assert_eq!(c.basic_auth(), "Basic aWQtMTpzM2NyM3Q=");
    }

    #[test]
    fn empty_credentials_rejected() {
        assert!(ApiCredentials::new("", "x").is_err());
        assert!(ApiCredentials::new("x", " ").is_err());
        assert!(PlaylistRef::new("", "").is_err());
    }

    #[test]
    fn refresh_margin() {
        let t0 = SystemTime::UNIX_EPOCH + Duration::from_secs(1000);
        let tok = AccessToken {
            token: "t".into(),
            expires_at: t0 + Duration::from_secs(3600),
        };
        assert!(tok.is_valid_at(t0));
        assert!(tok.is_valid_at(t0 + Duration::from_secs(3569)));
        assert!(!tok.is_valid_at(t0 + Duration::from_secs(3570)));
    }
}
