use std::path::Path;
use std::sync::Arc;
use std::time::SystemTime;

use hitpredict_core::dataset::io;
use hitpredict_ingest::{
    build_dataset, ApiCredentials, Clock, ClientConfig, FixtureTransport, IngestError, PlaylistRef,
    RetryPolicy, SpotifyClient, SystemClock, Transcript, Transport, UreqTransport, VirtualClock,
    YearFilter, CLIENT_ID_VAR, CLIENT_SECRET_VAR,
};
use serde_json::json;

use crate::args::IngestArgs;
use crate::error::{CliError, Result};
use crate::manifest::RunManifest;
use crate::output::{to_json, FileDigest, Outputs};

/// One playlist id per line; text after the id is its description.
pub fn read_playlists(path: &Path) -> Result<Vec<PlaylistRef>> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let lists = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(|l| {
            let (id, description) = l.split_once(char::is_whitespace).unwrap_or((l, ""));
            Ok(PlaylistRef::new(id, description.trim())?)
        })
        .collect::<Result<Vec<_>>>()?;
    if lists.is_empty() {
        return Err(CliError::usage(format!("{} lists no playlists", path.display())));
    }
    Ok(lists)
}

pub fn run(a: &IngestArgs) -> Result<()> {
    let playlists = read_playlists(&a.playlists)?;
    let year_filter = a.year_filter.as_deref().map(str::parse::<YearFilter>).transpose()?;

    let (transport, clock, credentials): (Arc<dyn Transport>, Arc<dyn Clock>, _) = match &a.offline_fixtures {
        Some(dir) => {
            let transcript = Transcript::load_dir(dir)?;
            let credentials = ApiCredentials::from_env()
                .or_else(|_| ApiCredentials::new("offline", "offline"))?;
            let clock = VirtualClock::starting_at(SystemTime::now());
            (Arc::new(FixtureTransport::new(transcript)), Arc::new(clock), credentials)
        }
        None => {
            let credentials = ApiCredentials::from_env().map_err(|e| match e {
                IngestError::MissingCredentials(why) => CliError::usage(format!(
                    "{why}; set {CLIENT_ID_VAR} and {CLIENT_SECRET_VAR}, or pass --offline-fixtures"
                )),
                other => other.into(),
            })?;
            (Arc::new(UreqTransport::default()), Arc::new(SystemClock), credentials)
        }
    };
    let config = ClientConfig {
        api_base: a.api_base.trim_end_matches('/').to_owned(),
        token_url: a.token_url.clone(),
        retry: RetryPolicy {
            max_attempts: a.max_attempts,
            ..RetryPolicy::default()
        },
        concurrency: a.concurrency,
    };
    let client = SpotifyClient::new(credentials, config, transport, clock)?;
    let built = build_dataset(&client, &playlists, year_filter)?;
    if built.records.is_empty() {
        return Err(CliError::usage("the playlists yielded no complete track records"));
    }

    let mut outputs = Outputs::default();
    outputs.add(&a.out, io::encode_records(&built.records, io::FileFormat::from_path(&a.out))?);
    if let Some(path) = &a.summary {
        outputs.add(path, to_json(&built.summary)?);
    }
    if let Some(path) = &a.manifest {
        let mut m = RunManifest::new(
            "ingest",
            json!({
                "playlists": playlists,
                "year_filter": year_filter.map(|f| f.to_string()),
                "offline": a.offline_fixtures.is_some(),
                "summary": built.summary,
            }),
        );
        m.inputs.push(FileDigest::read(&a.playlists)?);
        m.outputs = outputs.digests();
        outputs.add(path, to_json(&m)?);
    }
    outputs.commit()?;
    let s = &built.summary;
    println!(
        "{} playlists, {} entries, {} unique ids; dropped {} ({} without popularity, {} without features, {} invalid); {} duplicates removed; {} outside year filter; wrote {} records to {}",
        s.playlists,
        s.playlist_tracks,
        s.unique_ids,
        s.dropped,
        s.missing_popularity,
        s.missing_features,
        s.rejected,
        s.duplicates_removed,
        s.outside_year_filter,
        s.records,
        a.out.display()
    );
    Ok(())
}
