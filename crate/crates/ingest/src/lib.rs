//! Spotify Web API client that turns playlists into track record files.
//!
//! All HTTP goes through a [`Transport`], so the same code runs against the
//! live API ([`UreqTransport`]) or recorded transcripts ([`FixtureTransport`]).

mod auth;
mod build;
mod client;
mod clock;
mod error;
pub mod fixture;
mod transport;

pub use auth::{AccessToken, ApiCredentials, PlaylistRef, CLIENT_ID_VAR, CLIENT_SECRET_VAR, REFRESH_MARGIN};
pub use build::{build_dataset, load_records, save_records, BuildOutput, BuildSummary, YearFilter};
pub use client::{
    release_year, Batch, ClientConfig, IngestFailure, RetryPolicy, SpotifyClient, TrackInfo,
    AUDIO_FEATURES_BATCH, DEFAULT_API_BASE, DEFAULT_TOKEN_URL, PLAYLIST_PAGE_SIZE, TRACKS_BATCH,
};
pub use clock::{Clock, SystemClock, VirtualClock};
pub use error::{IngestError, Result};
pub use fixture::{FixtureTransport, Transcript};
pub use transport::{HttpRequest, HttpResponse, OfflineTransport, Transport, TransportError, UreqTransport};
