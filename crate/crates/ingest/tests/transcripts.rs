use std::net::TcpListener;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use hitpredict_ingest::fixture::{Exchange, RecordedRequest, RecordedResponse};
use hitpredict_ingest::{
    build_dataset, load_records, save_records, ApiCredentials, ClientConfig, Clock, FixtureTransport,
    IngestError, OfflineTransport, PlaylistRef, SpotifyClient, Transcript, VirtualClock,
    YearFilter, AUDIO_FEATURES_BATCH, TRACKS_BATCH,
};

fn fixture(name: &str) -> Transcript {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name);
    Transcript::load(&path).unwrap()
}

fn transcript(names: &[&str]) -> Transcript {
    names
        .iter()
        .fold(fixture("token.json"), |acc, n| acc.merge(fixture(n)))
}

struct Harness {
    transport: Arc<FixtureTransport>,
    clock: Arc<VirtualClock>,
    client: SpotifyClient,
}

fn harness_with(t: Transcript, config: ClientConfig) -> Harness {
    let transport = Arc::new(FixtureTransport::new(t));
    let clock = Arc::new(VirtualClock::default());
    let client = SpotifyClient::new(
        ApiCredentials::new("fixture-id", "fixture-secret").unwrap(),
        config,
        transport.clone(),
        clock.clone(),
    )
    .unwrap();
    Harness {
        transport,
        clock,
        client,
    }
}

fn harness(names: &[&str]) -> Harness {
    harness_with(transcript(names), ClientConfig::default())
}

fn playlist(id: &str) -> PlaylistRef {
    PlaylistRef::new(id, "fixture").unwrap()
}

fn ids(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i:04}")).collect()
}

#[test]
fn authenticate_returns_fixture_token() {
    let h = harness(&[]);
    let before = h.clock.now();
    let tok = h.client.authenticate().unwrap();
    assert_eq!(tok.token, "tok-1");
    assert_eq!(tok.expires_at.duration_since(before).unwrap(), Duration::from_secs(3600));
    let req = &h.transport.requests()[0];
    assert_eq!(req.method, "POST");
    assert!(req.header("authorization").unwrap().starts_with("Basic "));
}

#[test]
fn bad_secret_is_a_credential_error() {
    let h = harness_with(fixture("token_bad_secret.json"), ClientConfig::default());
    let err = h.client.authenticate().unwrap_err();
    assert!(matches!(err, IngestError::Credential { status: 400, .. }), "{err}");
    assert!(!err.to_string().contains("fixture-secret"));
}

#[test]
fn expired_token_triggers_one_reauthentication() {
    let h = harness(&["playlist_empty.json", "playlist_mixed.json"]);
    h.client.fetch_playlist_tracks(&playlist("pl-empty")).unwrap();
    h.clock.advance(Duration::from_secs(3600));
    h.client.fetch_playlist_tracks(&playlist("pl-mixed")).unwrap();
    assert_eq!(h.transport.requests_to("/api/token").len(), 2);
    for r in h.transport.requests_to("/v1/") {
        assert_eq!(r.header("authorization"), Some("Bearer tok-1"));
    }
}

#[test]
fn cached_token_is_reused() {
    let h = harness(&["playlist_empty.json", "playlist_mixed.json"]);
    h.client.fetch_playlist_tracks(&playlist("pl-empty")).unwrap();
    h.clock.advance(Duration::from_secs(3500));
    h.client.fetch_playlist_tracks(&playlist("pl-mixed")).unwrap();
    assert_eq!(h.transport.requests_to("/api/token").len(), 1);
}

#[test]
fn pagination_follows_next() {
    let h = harness(&["playlist_two_pages.json"]);
    let got = h.client.fetch_playlist_tracks(&playlist("pl-two-pages")).unwrap();
    assert_eq!(got, ids("pg", 137));
    let pages = h.transport.requests_to("/v1/playlists");
    assert_eq!(pages.len(), 2);
    assert_eq!(pages[1].query["offset"], "100");
}

#[test]
fn empty_null_and_local_entries() {
    let h = harness(&["playlist_empty.json", "playlist_mixed.json"]);
    assert!(h.client.fetch_playlist_tracks(&playlist("pl-empty")).unwrap().is_empty());
    let got = h.client.fetch_playlist_tracks(&playlist("pl-mixed")).unwrap();
    assert_eq!(got, vec!["mx0001", "mx0002"]);
}

#[test]
fn unknown_playlist() {
    let h = harness(&["playlist_missing.json"]);
    let err = h.client.fetch_playlist_tracks(&playlist("pl-missing")).unwrap_err();
    assert!(matches!(err, IngestError::UnknownPlaylist(ref id) if id == "pl-missing"));
}

#[test]
fn rate_limit_waits_retry_after_once() {
    let h = harness(&["playlist_rate_limited.json"]);
    let got = h.client.fetch_playlist_tracks(&playlist("pl-rate-limited")).unwrap();
    assert_eq!(got, ids("rl", 5));
    assert_eq!(h.clock.sleeps(), vec![Duration::from_secs(3)]);
    assert_eq!(h.transport.requests_to("/v1/playlists").len(), 2);
}

fn always_429(n: usize) -> Transcript {
    let mut t = fixture("token.json");
    for _ in 0..n {
        t.exchanges.push(Exchange {
            request: RecordedRequest {
                method: "GET".into(),
                path: "/v1/playlists/pl-busy/tracks".into(),
                query: [("offset", "0"), ("limit", "100")]
                    .into_iter()
                    .map(|(k, v)| (k.to_owned(), v.to_owned()))
                    .collect(),
            },
            response: RecordedResponse {
                status: 429,
                headers: [("Retry-After".to_owned(), "2".to_owned())].into(),
                body: serde_json::Value::Null,
            },
            repeat: false,
        });
    }
    t
}

#[test]
fn retries_are_bounded() {
    let h = harness_with(always_429(10), ClientConfig::default());
    let err = h.client.fetch_playlist_tracks(&playlist("pl-busy")).unwrap_err();
    assert!(matches!(err, IngestError::RetriesExhausted { attempts: 5, .. }), "{err}");
    assert_eq!(h.transport.requests_to("/v1/playlists").len(), 5);
    assert_eq!(h.clock.sleeps(), vec![Duration::from_secs(2); 4]);
}

#[test]
fn audio_features_batches_of_100() {
    let h = harness(&["audio_features_250.json"]);
    let want = ids("af", 250);
    let got = h.client.fetch_audio_features(&want).unwrap();
    assert_eq!(got.found.len(), 250);
    let calls = h.transport.requests_to("/v1/audio-features");
    let sizes: Vec<usize> = calls.iter().map(|r| r.query["ids"].split(',').count()).collect();
    assert_eq!(sizes, vec![100, 100, 50]);
    assert!(sizes.iter().all(|&s| s <= AUDIO_FEATURES_BATCH));
}

#[test]
fn popularity_batches_of_50() {
    let h = harness(&["tracks_120.json"]);
    let got = h.client.fetch_track_popularity(&ids("tr", 120)).unwrap();
    assert_eq!(got.found.len(), 120);
    let sizes: Vec<usize> = h
        .transport
        .requests_to("/v1/tracks")
        .iter()
        .map(|r| r.query["ids"].split(',').count())
        .collect();
    assert_eq!(sizes, vec![50, 50, 20]);
    assert!(sizes.iter().all(|&s| s <= TRACKS_BATCH));
}

#[test]
fn concurrent_batches_give_same_result() {
    let config = ClientConfig {
        concurrency: 3,
        ..ClientConfig::default()
    };
    let h = harness_with(transcript(&["audio_features_250.json"]), config);
    let got = h.client.fetch_audio_features(&ids("af", 250)).unwrap();
    let sequential = harness(&["audio_features_250.json"]);
    assert_eq!(got, sequential.client.fetch_audio_features(&ids("af", 250)).unwrap());
    assert_eq!(h.transport.requests_to("/api/token").len(), 1);
}

#[test]
fn feature_echo_and_null_skip() {
    let h = harness(&["audio_features_single.json"]);
    let one = h.client.fetch_audio_features(&["one-dance".to_string()]).unwrap();
    assert_eq!(one.found["one-dance"].danceability, 0.73);
    let two = h
        .client
        .fetch_audio_features(&["one-dance".to_string(), "gone".to_string()])
        .unwrap();
    assert_eq!(two.skipped, vec!["gone"]);
    assert_eq!(two.found.len(), 1);
    let err = h.client.fetch_audio_features(&["broken".to_string()]).unwrap_err();
    assert!(matches!(err, IngestError::Parse { id: Some(ref id), .. } if id == "broken"), "{err}");
}

#[test]
fn popularity_values_and_bounds() {
    let h = harness(&["tracks_popularity.json"]);
    let top = h.client.fetch_track_popularity(&["top-track".to_string()]).unwrap();
    let info = &top.found["top-track"];
    assert_eq!(info.popularity, 82);
    assert_eq!(info.release_year, Some(2019));
    let err = h.client.fetch_track_popularity(&["bad-pop".to_string()]).unwrap_err();
    assert!(matches!(err, IngestError::Validation { ref id, .. } if id == "bad-pop"), "{err}");
}

#[test]
fn build_union_join_and_filter() {
    let lists = [playlist("pl-overlap-a"), playlist("pl-overlap-b")];
    let h = harness(&["build_overlap.json"]);
    let out = build_dataset(&h.client, &lists, None).unwrap();
    assert_eq!(out.summary.playlist_tracks, 110);
    assert_eq!(out.summary.unique_ids, 100);
    assert_eq!(out.summary.missing_features, 3);
    assert_eq!(out.summary.dropped, 3);
    assert_eq!(out.records.len(), 97);
    assert!(out.records.iter().any(|r| r.track_id == "ov0007"));
    for r in &out.records {
        r.validate().unwrap();
    }
    let mut seen: Vec<&str> = out.records.iter().map(|r| r.track_id.as_str()).collect();
    seen.sort_unstable();
    seen.dedup();
    assert_eq!(seen.len(), out.records.len());

    let h = harness(&["build_overlap.json"]);
    let filter: YearFilter = "2010..".parse().unwrap();
    let out = build_dataset(&h.client, &lists, Some(filter)).unwrap();
    assert!(out.records.iter().all(|r| r.track_id != "ov0007"));
    assert_eq!(out.records.len(), 96);
    assert_eq!(out.summary.outside_year_filter, 1);
}

#[test]
fn build_requires_a_playlist() {
    let h = harness(&[]);
    assert!(build_dataset(&h.client, &[], None).is_err());
}

#[test]
fn offline_run_opens_no_connection() {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let local = format!("http://{}", listener.local_addr().unwrap());
    let config = ClientConfig {
        api_base: local.clone(),
        token_url: format!("{local}/api/token"),
        ..ClientConfig::default()
    };
    let h = harness_with(transcript(&["build_overlap.json"]), config.clone());
    let lists = [playlist("pl-overlap-a"), playlist("pl-overlap-b")];
    let out = build_dataset(&h.client, &lists, None).unwrap();
    assert_eq!(out.records.len(), 97);

    let offline = SpotifyClient::new(
        ApiCredentials::new("id", "secret").unwrap(),
        config,
        Arc::new(OfflineTransport),
        Arc::new(VirtualClock::default()),
    )
    .unwrap();
    assert!(matches!(offline.authenticate(), Err(IngestError::Refused(_))));

    listener.set_nonblocking(true).unwrap();
    let pending = listener.accept();
    assert!(
        matches!(pending, Err(ref e) if e.kind() == std::io::ErrorKind::WouldBlock),
        "a connection reached the local endpoint"
    );
}

#[test]
fn records_round_trip_through_files() {
    let h = harness(&["build_overlap.json"]);
    let lists = [playlist("pl-overlap-a"), playlist("pl-overlap-b")];
    let out = build_dataset(&h.client, &lists, None).unwrap();
    let dir = tempfile::tempdir().unwrap();
    for name in ["records.csv", "records.jsonl"] {
        let path = dir.path().join(name);
        save_records(&out.records, &path).unwrap();
        assert_eq!(load_records(&path).unwrap(), out.records);
    }
}
