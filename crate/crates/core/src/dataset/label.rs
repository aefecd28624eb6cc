use std::collections::HashMap;
use std::collections::HashSet;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::record::{check_popularity, TrackRecord, N_FEATURES};
use crate::error::{Error, Result};

/// Popularity cut-off above which a track counts as a hit.
pub const DEFAULT_HIT_THRESHOLD: i32 = 47;

pub const SCHEMA_VERSION: u32 = 1;

/// 1 iff `popularity > threshold`; the threshold itself is a non-hit.
pub fn label_hit(popularity: i32, threshold: i32) -> Result<u8> {
    check_popularity(popularity)?;
    Ok(u8::from(popularity > threshold))
}

/// `(non-hits, hits)`.
pub fn class_distribution(labels: &[u8]) -> (usize, usize) {
    let hits = labels.iter().filter(|&&l| l == 1).count();
    (labels.len() - hits, hits)
}

fn normalize(s: &str) -> String {
    s.split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

/// Drops repeated track ids (first occurrence wins), then keeps only the most
/// popular record per case-folded, whitespace-collapsed `(title, artist)`.
/// Equal popularity keeps the earliest record. Survivors stay in input order.
pub fn deduplicate(records: &[TrackRecord]) -> Vec<TrackRecord> {
    let mut seen_ids = HashSet::new();
    let unique: Vec<&TrackRecord> = records
        .iter()
        .filter(|r| seen_ids.insert(r.track_id.as_str()))
        .collect();

    let mut best: HashMap<(String, String), usize> = HashMap::new();
    for (i, r) in unique.iter().enumerate() {
        let key = (normalize(&r.title), normalize(&r.artist));
        best.entry(key)
            .and_modify(|j| {
                if r.popularity > unique[*j].popularity {
                    *j = i;
                }
            })
            .or_insert(i);
    }
    let keep: HashSet<usize> = best.into_values().collect();
    unique
        .into_iter()
        .enumerate()
        .filter(|(i, _)| keep.contains(i))
        .map(|(_, r)| r.clone())
        .collect()
}

/// A record together with its binary hit label, as stored in labeled files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledTrack {
    #[serde(flatten)]
    pub record: TrackRecord,
    pub hit: u8,
}

impl LabeledTrack {
    pub fn label(record: TrackRecord, threshold: i32) -> Result<Self> {
        let hit = label_hit(record.popularity, threshold)?;
        Ok(LabeledTrack { record, hit })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledRow {
    pub features: [f64; N_FEATURES],
    pub label: u8,
}

/// Feature vectors and hit labels in file order.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub rows: Vec<LabeledRow>,
    pub schema_version: u32,
    pub source: String,
}

impl LabeledDataset {
    pub fn from_tracks(tracks: &[LabeledTrack], source: impl Into<String>) -> Result<Self> {
        let rows = tracks
            .iter()
            .map(|t| {
                if t.hit > 1 {
                    return Err(Error::validation(format!(
                        "track {}: hit label {} is not 0 or 1",
                        t.record.track_id, t.hit
                    )));
                }
                Ok(LabeledRow {
                    features: t.record.features(),
                    label: t.hit,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(LabeledDataset {
            rows,
            schema_version: SCHEMA_VERSION,
            source: source.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn labels(&self) -> Vec<u8> {
        self.rows.iter().map(|r| r.label).collect()
    }

    pub fn feature_matrix(&self) -> Array2<f64> {
        self.select_features(&(0..self.rows.len()).collect::<Vec<_>>())
    }

    /// Rows at `indices`, in that order.
    pub fn select_features(&self, indices: &[usize]) -> Array2<f64> {
        let mut m = Array2::zeros((indices.len(), N_FEATURES));
        for (out, &i) in indices.iter().enumerate() {
            for (j, v) in self.rows[i].features.iter().enumerate() {
                m[[out, j]] = *v;
            }
        }
        m
    }

    pub fn select_labels(&self, indices: &[usize]) -> Vec<u8> {
        indices.iter().map(|&i| self.rows[i].label).collect()
    }
}
