use std::collections::BTreeMap;
use std::sync::{Arc, Mutex};
use std::time::Duration;

use hitpredict_core::dataset::{check_popularity, AudioFeatures};
use serde::Deserialize;
use serde_json::Value;

use crate::auth::{AccessToken, ApiCredentials, PlaylistRef};
use crate::clock::Clock;
use crate::error::{IngestError, Result};
use crate::transport::{HttpRequest, HttpResponse, Transport, TransportError};

pub const DEFAULT_API_BASE: &str = "https://api.spotify.com";
pub const DEFAULT_TOKEN_URL: &str = "https://accounts.spotify.com/api/token";

/// Most ids the audio-features endpoint accepts per call.
pub const AUDIO_FEATURES_BATCH: usize = 100;
/// Most ids the tracks endpoint accepts per call.
pub const TRACKS_BATCH: usize = 50;
pub const PLAYLIST_PAGE_SIZE: usize = 100;

const MAX_PAGES: usize = 10_000;

/// Retries for 429, 5xx and network failures. A 429 waits for its
/// `Retry-After` header; everything else backs off exponentially.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RetryPolicy {
    /// Total attempts per request, including the first.
    pub max_attempts: u32,
    pub base_delay: Duration,
    pub max_delay: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            max_attempts: 5,
            base_delay: Duration::from_secs(1),
            max_delay: Duration::from_secs(32),
        }
    }
}

impl RetryPolicy {
    /// Delay after the `failures`-th consecutive failure (1-based).
    pub fn backoff(&self, failures: u32) -> Duration {
        let factor = 2u32.saturating_pow(failures.saturating_sub(1));
        self.base_delay.saturating_mul(factor).min(self.max_delay)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClientConfig {
    pub api_base: String,
    pub token_url: String,
    pub retry: RetryPolicy,
    /// Batch requests allowed in flight at once.
    pub concurrency: usize,
}

impl Default for ClientConfig {
    fn default() -> Self {
        ClientConfig {
            api_base: DEFAULT_API_BASE.into(),
            token_url: DEFAULT_TOKEN_URL.into(),
            retry: RetryPolicy::default(),
            concurrency: 1,
        }
    }
}

/// Track metadata from the tracks endpoint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrackInfo {
    pub popularity: i32,
    pub title: String,
    pub artist: String,
    pub release_year: Option<i32>,
}

/// Results of a batched lookup. `skipped` holds ids the API answered with
/// null; `rejected` holds ids whose payload failed to parse or validate.
#[derive(Debug, Clone, PartialEq)]
pub struct Batch<T> {
    pub found: BTreeMap<String, T>,
    pub skipped: Vec<String>,
    pub rejected: Vec<(String, IngestFailure)>,
}

impl<T> Default for Batch<T> {
    fn default() -> Self {
        Batch {
            found: BTreeMap::new(),
            skipped: Vec::new(),
            rejected: Vec::new(),
        }
    }
}

impl<T> Batch<T> {
    fn absorb(&mut self, other: Batch<T>) {
        self.found.extend(other.found);
        self.skipped.extend(other.skipped);
        self.rejected.extend(other.rejected);
    }

    /// Fails on the first rejected id.
    fn strict(self) -> Result<Self> {
        match self.rejected.into_iter().next() {
            Some((id, IngestFailure::Parse(message))) => Err(IngestError::Parse {
                id: Some(id),
                message,
            }),
            Some((id, IngestFailure::Invalid(message))) => {
                Err(IngestError::Validation { id, message })
            }
            None => Ok(Batch {
                found: self.found,
                skipped: self.skipped,
                rejected: Vec::new(),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IngestFailure {
    Parse(String),
    Invalid(String),
}

pub struct SpotifyClient {
    transport: Arc<dyn Transport>,
    clock: Arc<dyn Clock>,
    credentials: ApiCredentials,
    config: ClientConfig,
    token: Mutex<Option<AccessToken>>,
}

#[derive(Deserialize)]
struct TokenPayload {
    access_token: String,
    expires_in: u64,
}

#[derive(Deserialize)]
struct PlaylistPage {
    items: Vec<PlaylistItem>,
    next: Option<String>,
}

#[derive(Deserialize)]
struct PlaylistItem {
    track: Option<TrackStub>,
    #[serde(default)]
    is_local: bool,
}

#[derive(Deserialize)]
struct TrackStub {
    id: Option<String>,
    #[serde(default)]
    is_local: bool,
}

#[derive(Deserialize)]
struct TrackPayload {
    name: String,
    popularity: i64,
    #[serde(default)]
    artists: Vec<ArtistPayload>,
    album: Option<AlbumPayload>,
}

#[derive(Deserialize)]
struct ArtistPayload {
    name: String,
}

#[derive(Deserialize)]
struct AlbumPayload {
    release_date: Option<String>,
}

/// Year from a `YYYY`, `YYYY-MM` or `YYYY-MM-DD` release date.
pub fn release_year(date: &str) -> Option<i32> {
    let head = date.get(..4)?;
    if !head.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    head.parse().ok().filter(|&y| y >= 1900)
}

impl SpotifyClient {
    pub fn new(
        credentials: ApiCredentials,
        config: ClientConfig,
        transport: Arc<dyn Transport>,
        clock: Arc<dyn Clock>,
    ) -> Result<Self> {
        if config.concurrency == 0 {
            return Err(IngestError::Config("concurrency must be at least 1".into()));
        }
        if config.retry.max_attempts == 0 {
            return Err(IngestError::Config("max_attempts must be at least 1".into()));
        }
        Ok(SpotifyClient {
            transport,
            clock,
            credentials,
            config,
            token: Mutex::new(None),
        })
    }

    pub fn config(&self) -> &ClientConfig {
        &self.config
    }

    pub fn clock(&self) -> &dyn Clock {
        self.clock.as_ref()
    }

    /// Requests a fresh token with the client-credentials grant and caches it.
    pub fn authenticate(&self) -> Result<AccessToken> {
        let mut slot = self.token.lock().expect("token lock");
        let token = self.request_token()?;
        *slot = Some(token.clone());
        Ok(token)
    }

    /// The cached token, refreshed first if it is within the expiry margin.
    /// Refreshes are serialized by the cache lock.
    pub fn token(&self) -> Result<AccessToken> {
        let mut slot = self.token.lock().expect("token lock");
        match slot.as_ref() {
            Some(t) if t.is_valid_at(self.clock.now()) => Ok(t.clone()),
            _ => {
                let token = self.request_token()?;
                *slot = Some(token.clone());
                Ok(token)
            }
        }
    }

    fn invalidate_token(&self) {
        *self.token.lock().expect("token lock") = None;
    }

    fn request_token(&self) -> Result<AccessToken> {
        log::debug!("requesting access token for client {}", self.credentials.client_id());
        let resp = self.execute(
            || {
                Ok(HttpRequest::post(&self.config.token_url, "grant_type=client_credentials")
                    .header("Authorization", self.credentials.basic_auth())
                    .header("Content-Type", "application/x-www-form-urlencoded"))
            },
            false,
        )?;
        if (400..500).contains(&resp.status) {
            let message = serde_json::from_str::<Value>(&resp.body)
                .ok()
                .and_then(|v| v.get("error_description").or(v.get("error")).cloned())
                .and_then(|v| v.as_str().map(str::to_owned))
                .unwrap_or_else(|| "credentials rejected".into());
            return Err(IngestError::Credential {
                status: resp.status,
                message,
            });
        }
        check_ok("POST", &self.config.token_url, &resp)?;
        let payload: TokenPayload = serde_json::from_str(&resp.body)
            .map_err(|e| IngestError::parse(None, format!("token response: {e}")))?;
        Ok(AccessToken {
            token: payload.access_token,
            expires_at: self.clock.now() + Duration::from_secs(payload.expires_in),
        })
    }

    /// Sends a request, retrying 429, 5xx and network failures per the retry
    /// policy. A 401 on an authorized call drops the cached token and retries
    /// once with a fresh one. Other statuses are returned to the caller.
    fn execute(
        &self,
        build: impl Fn() -> Result<HttpRequest>,
        authorized: bool,
    ) -> Result<HttpResponse> {
        let retry = self.config.retry;
        let mut failures = 0u32;
        let mut refreshed = false;
        loop {
            let mut request = build()?;
            if authorized {
                request = request.header("Authorization", format!("Bearer {}", self.token()?.token));
            }
            log::debug!("{} {}", request.method, request.url);
            let (last, delay) = match self.transport.send(&request) {
                Err(TransportError::Refused(m)) => return Err(IngestError::Refused(m)),
                Err(TransportError::Network(m)) => (m, None),
                Ok(r) if r.status == 429 => {
                    let wait = r
                        .header("retry-after")
                        .and_then(|v| v.trim().parse::<u64>().ok())
                        .map(Duration::from_secs);
                    ("429 Too Many Requests".to_owned(), wait)
                }
                Ok(r) if r.status >= 500 => (format!("status {}", r.status), None),
                Ok(r) if r.status == 401 && authorized && !refreshed => {
                    refreshed = true;
                    self.invalidate_token();
                    continue;
                }
                Ok(r) => return Ok(r),
            };
            failures += 1;
            if failures >= retry.max_attempts {
                return Err(IngestError::RetriesExhausted {
                    method: request.method,
                    url: request.url,
                    attempts: failures,
                    last,
                });
            }
            let wait = delay.unwrap_or_else(|| retry.backoff(failures));
            log::warn!("{} {}: {last}; retrying in {wait:?}", request.method, request.url);
            self.clock.sleep(wait);
        }
    }

    fn get(&self, url: &str) -> Result<HttpResponse> {
        self.execute(|| Ok(HttpRequest::get(url)), true)
    }

    /// Track ids of a playlist in playlist order, following pagination.
    /// Missing and local tracks are skipped.
    pub fn fetch_playlist_tracks(&self, playlist: &PlaylistRef) -> Result<Vec<String>> {
        let mut url = format!(
            "{}/v1/playlists/{}/tracks?offset=0&limit={PLAYLIST_PAGE_SIZE}",
            self.config.api_base, playlist.playlist_id
        );
        let mut ids = Vec::new();
        for _ in 0..MAX_PAGES {
            let resp = self.get(&url)?;
            if resp.status == 404 {
                return Err(IngestError::UnknownPlaylist(playlist.playlist_id.clone()));
            }
            check_ok("GET", &url, &resp)?;
            let page: PlaylistPage = serde_json::from_str(&resp.body).map_err(|e| {
                IngestError::parse(None, format!("playlist {} page: {e}", playlist.playlist_id))
            })?;
            ids.extend(page.items.into_iter().filter_map(|item| {
                let track = item.track?;
                if item.is_local || track.is_local {
                    return None;
                }
                track.id.filter(|id| !id.is_empty())
            }));
            match page.next {
                Some(next) => url = next,
                None => {
                    log::info!("playlist {}: {} tracks", playlist.playlist_id, ids.len());
                    return Ok(ids);
                }
            }
        }
        Err(IngestError::Config(format!(
            "playlist {} exceeded {MAX_PAGES} pages",
            playlist.playlist_id
        )))
    }

    /// Runs `fetch` over `ids` in chunks of `size`, keeping up to
    /// `concurrency` chunks in flight.
    fn batched<T: Send>(
        &self,
        ids: &[String],
        size: usize,
        fetch: impl Fn(&[String]) -> Result<Batch<T>> + Sync,
    ) -> Result<Batch<T>> {
        if ids.is_empty() {
            return Err(IngestError::Config("no track ids to fetch".into()));
        }
        let chunks: Vec<&[String]> = ids.chunks(size).collect();
        let mut out = Batch::default();
        for wave in chunks.chunks(self.config.concurrency) {
            let results: Vec<Result<Batch<T>>> = if wave.len() == 1 {
                vec![fetch(wave[0])]
            } else {
                std::thread::scope(|s| {
                    let handles: Vec<_> = wave.iter().map(|c| s.spawn(|| fetch(c))).collect();
                    handles
                        .into_iter()
                        .map(|h| h.join().expect("batch worker panicked"))
                        .collect()
                })
            };
            for r in results {
                out.absorb(r?);
            }
        }
        Ok(out)
    }

    /// Entries of a batch response array, paired with the requested ids.
    fn batch_entries(&self, path: &str, key: &str, chunk: &[String]) -> Result<Vec<(String, Value)>> {
        let url = format!("{}{path}?ids={}", self.config.api_base, chunk.join(","));
        let resp = self.get(&url)?;
        check_ok("GET", &url, &resp)?;
        let first = chunk.first().map(String::as_str);
        let mut body: Value = serde_json::from_str(&resp.body)
            .map_err(|e| IngestError::parse(first, format!("batch response is not JSON: {e}")))?;
        let Some(Value::Array(entries)) = body.get_mut(key).map(Value::take) else {
            return Err(IngestError::parse(first, format!("batch response lacks `{key}` array")));
        };
        if entries.len() != chunk.len() {
            return Err(IngestError::parse(
                first,
                format!("asked for {} ids, got {} entries", chunk.len(), entries.len()),
            ));
        }
        Ok(chunk.iter().cloned().zip(entries).collect())
    }

    pub(crate) fn audio_features_lenient(&self, ids: &[String]) -> Result<Batch<AudioFeatures>> {
        self.batched(ids, AUDIO_FEATURES_BATCH, |chunk| {
            let mut batch = Batch::default();
            for (id, entry) in self.batch_entries("/v1/audio-features", "audio_features", chunk)? {
                if entry.is_null() {
                    batch.skipped.push(id);
                    continue;
                }
                match serde_json::from_value::<AudioFeatures>(entry) {
                    Err(e) => batch.rejected.push((id, IngestFailure::Parse(e.to_string()))),
                    Ok(f) => match f.validate() {
                        Err(e) => batch.rejected.push((id, IngestFailure::Invalid(e.to_string()))),
                        Ok(()) => {
                            batch.found.insert(id, f);
                        }
                    },
                }
            }
            Ok(batch)
        })
    }

    pub(crate) fn popularity_lenient(&self, ids: &[String]) -> Result<Batch<TrackInfo>> {
        self.batched(ids, TRACKS_BATCH, |chunk| {
            let mut batch = Batch::default();
            for (id, entry) in self.batch_entries("/v1/tracks", "tracks", chunk)? {
                if entry.is_null() {
                    batch.skipped.push(id);
                    continue;
                }
                let t = match serde_json::from_value::<TrackPayload>(entry) {
                    Ok(t) => t,
                    Err(e) => {
                        batch.rejected.push((id, IngestFailure::Parse(e.to_string())));
                        continue;
                    }
                };
                let popularity = i32::try_from(t.popularity).unwrap_or(i32::MAX);
                if let Err(e) = check_popularity(popularity) {
                    batch.rejected.push((id, IngestFailure::Invalid(e.to_string())));
                    continue;
                }
                let artist = t.artists.iter().map(|a| a.name.as_str()).collect::<Vec<_>>().join(", ");
                let release_year = t.album.and_then(|a| a.release_date).as_deref().and_then(release_year);
                batch.found.insert(
                    id,
                    TrackInfo {
                        popularity,
                        title: t.name,
                        artist,
                        release_year,
                    },
                );
            }
            Ok(batch)
        })
    }

    /// Audio features for `ids`, at most 100 ids per call. Ids answered
    /// with null land in `skipped`; an unparseable or out-of-range entry is
    /// an error naming its id.
    pub fn fetch_audio_features(&self, ids: &[String]) -> Result<Batch<AudioFeatures>> {
        self.audio_features_lenient(ids)?.strict()
    }

    /// Popularity and metadata for `ids`, at most 50 ids per call.
    pub fn fetch_track_popularity(&self, ids: &[String]) -> Result<Batch<TrackInfo>> {
        self.popularity_lenient(ids)?.strict()
    }
}

fn check_ok(method: &str, url: &str, resp: &HttpResponse) -> Result<()> {
    if (200..300).contains(&resp.status) {
        Ok(())
    } else {
        Err(IngestError::Http {
            method: method.into(),
            url: url.into(),
            status: resp.status,
        })
    }
}
