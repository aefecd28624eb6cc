use std::collections::HashSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::time::UNIX_EPOCH;

use hitpredict_core::dataset::{deduplicate, io, TrackRecord};
use serde::{Deserialize, Serialize};

use crate::auth::PlaylistRef;
use crate::client::SpotifyClient;
use crate::error::{IngestError, Result};

/// Inclusive release-year bounds. Tracks without a year never pass a filter.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct YearFilter {
    pub from: Option<i32>,
    pub to: Option<i32>,
}

impl YearFilter {
    pub fn accepts(&self, year: Option<i32>) -> bool {
        match year {
            None => false,
            Some(y) => self.from.is_none_or(|f| y >= f) && self.to.is_none_or(|t| y <= t),
        }
    }
}

/// Parses `2010..`, `..2019` or `2010..2019` (both ends inclusive).
impl FromStr for YearFilter {
    type Err = IngestError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || IngestError::Config(format!("year filter `{s}` is not FROM.., ..TO or FROM..TO"));
        let (a, b) = s.trim().split_once("..").ok_or_else(bad)?;
        let parse = |t: &str| -> Result<Option<i32>> {
            let t = t.trim().trim_start_matches('=');
            if t.is_empty() {
                Ok(None)
            } else {
                t.parse().map(Some).map_err(|_| bad())
            }
        };
        let filter = YearFilter {
            from: parse(a)?,
            to: parse(b)?,
        };
        match filter {
            YearFilter { from: None, to: None } => Err(bad()),
            YearFilter { from: Some(f), to: Some(t) } if f > t => Err(bad()),
            ok => Ok(ok),
        }
    }
}

impl fmt::Display for YearFilter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |v: Option<i32>| v.map(|y| y.to_string()).unwrap_or_default();
        write!(f, "{}..{}", show(self.from), show(self.to))
    }
}

/// Counts describing what happened to every playlist entry.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildSummary {
    pub playlists: usize,
    /// Playlist entries, duplicates included.
    pub playlist_tracks: usize,
    pub unique_ids: usize,
    pub missing_popularity: usize,
    pub missing_features: usize,
    /// Ids whose payload failed to parse or validate.
    pub rejected: usize,
    /// Ids dropped for any of the three reasons above.
    pub dropped: usize,
    pub duplicates_removed: usize,
    pub outside_year_filter: usize,
    pub records: usize,
    /// Unix seconds at which the snapshot was taken.
    pub fetched_at: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BuildOutput {
    pub records: Vec<TrackRecord>,
    pub summary: BuildSummary,
}

/// Union of playlist tracks, joined with popularity and audio features,
/// deduplicated and optionally filtered by release year. Tracks missing
/// either payload are dropped and counted; only authentication and
/// exhausted retries abort the build.
pub fn build_dataset(
    client: &SpotifyClient,
    playlists: &[PlaylistRef],
    year_filter: Option<YearFilter>,
) -> Result<BuildOutput> {
    if playlists.is_empty() {
        return Err(IngestError::Config("at least one playlist is required".into()));
    }
    let mut summary = BuildSummary {
        playlists: playlists.len(),
        fetched_at: client
            .clock()
            .now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
        ..BuildSummary::default()
    };

    let mut seen = HashSet::new();
    let mut ids = Vec::new();
    for p in playlists {
        let tracks = client.fetch_playlist_tracks(p)?;
        summary.playlist_tracks += tracks.len();
        ids.extend(tracks.into_iter().filter(|id| seen.insert(id.clone())));
    }
    summary.unique_ids = ids.len();
    if ids.is_empty() {
        return Ok(BuildOutput {
            records: Vec::new(),
            summary,
        });
    }

    let info = client.popularity_lenient(&ids)?;
    let features = client.audio_features_lenient(&ids)?;
    let rejected: HashSet<&str> = info
        .rejected
        .iter()
        .chain(&features.rejected)
        .map(|(id, why)| {
            log::warn!("dropping track {id}: {why:?}");
            id.as_str()
        })
        .collect();

    let mut joined = Vec::with_capacity(ids.len());
    for id in &ids {
        if rejected.contains(id.as_str()) {
            summary.rejected += 1;
            continue;
        }
        let (Some(t), Some(f)) = (info.found.get(id), features.found.get(id)) else {
            if !info.found.contains_key(id) {
                summary.missing_popularity += 1;
            } else {
                summary.missing_features += 1;
            }
            continue;
        };
        let record =
            TrackRecord::from_parts(id, &t.title, &t.artist, t.release_year, t.popularity, *f);
        match record.validate() {
            Ok(()) => joined.push(record),
            Err(e) => {
                log::warn!("dropping track {id}: {e}");
                summary.rejected += 1;
            }
        }
    }
    summary.dropped = summary.missing_popularity + summary.missing_features + summary.rejected;

    let unique = deduplicate(&joined);
    summary.duplicates_removed = joined.len() - unique.len();
    let records: Vec<TrackRecord> = match year_filter {
        Some(filter) => unique.into_iter().filter(|r| filter.accepts(r.release_year)).collect(),
        None => unique,
    };
    summary.outside_year_filter = joined.len() - summary.duplicates_removed - records.len();
    summary.records = records.len();
    Ok(BuildOutput { records, summary })
}

/// Writes records as CSV, or JSON lines for `.jsonl`/`.ndjson` paths.
pub fn save_records(records: &[TrackRecord], path: &Path) -> Result<()> {
    Ok(io::write_records(path, records)?)
}

pub fn load_records(path: &Path) -> Result<Vec<TrackRecord>> {
    Ok(io::read_records(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn year_filter_parsing() {
        let f: YearFilter = "2010..".parse().unwrap();
        assert_eq!(f, YearFilter { from: Some(2010), to: None });
        assert!(f.accepts(Some(2010)));
        assert!(!f.accepts(Some(2008)));
        assert!(!f.accepts(None));
        let g: YearFilter = "2000..=2005".parse().unwrap();
        assert!(g.accepts(Some(2005)) && !g.accepts(Some(2006)));
        assert_eq!(g.to_string(), "2000..2005");
        assert!("..".parse::<YearFilter>().is_err());
        assert!("2010".parse::<YearFilter>().is_err());
        assert!("2010..2000".parse::<YearFilter>().is_err());
    }
}
