use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of audio features used as model inputs.
pub const N_FEATURES: usize = 13;

/// Model input columns, in the fixed order used by every feature vector.
pub const FEATURE_NAMES: [&str; N_FEATURES] = [
    "danceability",
    "energy",
    "key",
    "loudness",
    "mode",
    "speechiness",
    "acousticness",
    "instrumentalness",
    "liveness",
    "valence",
    "tempo",
    "duration_ms",
    "time_signature",
];

/// Header of the canonical records file.
pub const RECORD_COLUMNS: [&str; 18] = [
    "track_id",
    "title",
    "artist",
    "release_year",
    "popularity",
    "danceability",
    "energy",
    "key",
    "loudness",
    "mode",
    "speechiness",
    "acousticness",
    "instrumentalness",
    "liveness",
    "valence",
    "tempo",
    "duration_ms",
    "time_signature",
];

/// Trailing column of a labeled dataset file.
pub const HIT_COLUMN: &str = "hit";

/// One track with its popularity score and audio features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackRecord {
    pub track_id: String,
    pub title: String,
    pub artist: String,
    /// `None` when the album release date was missing or unparseable.
    pub release_year: Option<i32>,
    pub popularity: i32,
    pub danceability: f64,
    pub energy: f64,
    pub key: i32,
    pub loudness: f64,
    pub mode: i32,
    pub speechiness: f64,
    pub acousticness: f64,
    pub instrumentalness: f64,
    pub liveness: f64,
    pub valence: f64,
    pub tempo: f64,
    pub duration_ms: u64,
    pub time_signature: i32,
}

/// The audio-feature portion of a track, as delivered by the audio-features endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AudioFeatures {
    pub danceability: f64,
    pub energy: f64,
    pub key: i32,
    pub loudness: f64,
    pub mode: i32,
    pub speechiness: f64,
    pub acousticness: f64,
    pub instrumentalness: f64,
    pub liveness: f64,
    pub valence: f64,
    pub tempo: f64,
    pub duration_ms: u64,
    pub time_signature: i32,
}

pub fn check_popularity(popularity: i32) -> Result<()> {
    if (0..=100).contains(&popularity) {
        Ok(())
    } else {
        Err(Error::validation(format!(
            "popularity {popularity} is outside [0, 100]"
        )))
    }
}

impl AudioFeatures {
    pub fn validate(&self) -> Result<()> {
        let unit = [
            ("danceability", self.danceability),
            ("energy", self.energy),
            ("speechiness", self.speechiness),
            ("acousticness", self.acousticness),
            ("instrumentalness", self.instrumentalness),
            ("liveness", self.liveness),
            ("valence", self.valence),
        ];
        for (name, v) in unit {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::validation(format!("{name} {v} is outside [0, 1]")));
            }
        }
        if !(-1..=11).contains(&self.key) {
            return Err(Error::validation(format!("key {} is outside [-1, 11]", self.key)));
        }
        if self.mode != 0 && self.mode != 1 {
            return Err(Error::validation(format!("mode {} is not 0 or 1", self.mode)));
        }
        if !self.loudness.is_finite() {
            return Err(Error::validation("loudness is not finite"));
        }
        if !(self.tempo.is_finite() && self.tempo > 0.0) {
            return Err(Error::validation(format!("tempo {} must be positive", self.tempo)));
        }
        if self.duration_ms == 0 {
            return Err(Error::validation("duration_ms must be positive"));
        }
        if self.time_signature < 0 {
            return Err(Error::validation(format!(
                "time_signature {} is negative",
                self.time_signature
            )));
        }
        Ok(())
    }

    pub fn to_vector(&self) -> [f64; N_FEATURES] {
        [
            self.danceability,
            self.energy,
            f64::from(self.key),
            self.loudness,
            f64::from(self.mode),
            self.speechiness,
            self.acousticness,
            self.instrumentalness,
            self.liveness,
            self.valence,
            self.tempo,
            self.duration_ms as f64,
            f64::from(self.time_signature),
        ]
    }
}

impl TrackRecord {
    pub fn from_parts(
        track_id: impl Into<String>,
        title: impl Into<String>,
        artist: impl Into<String>,
        release_year: Option<i32>,
        popularity: i32,
        f: AudioFeatures,
    ) -> Self {
        TrackRecord {
            track_id: track_id.into(),
            title: title.into(),
            artist: artist.into(),
            release_year,
            popularity,
            danceability: f.danceability,
            energy: f.energy,
            key: f.key,
            loudness: f.loudness,
            mode: f.mode,
            speechiness: f.speechiness,
            acousticness: f.acousticness,
            instrumentalness: f.instrumentalness,
            liveness: f.liveness,
            valence: f.valence,
            tempo: f.tempo,
            duration_ms: f.duration_ms,
            time_signature: f.time_signature,
        }
    }

    pub fn audio_features(&self) -> AudioFeatures {
        AudioFeatures {
            danceability: self.danceability,
            energy: self.energy,
            key: self.key,
            loudness: self.loudness,
            mode: self.mode,
            speechiness: self.speechiness,
            acousticness: self.acousticness,
            instrumentalness: self.instrumentalness,
            liveness: self.liveness,
            valence: self.valence,
            tempo: self.tempo,
            duration_ms: self.duration_ms,
            time_signature: self.time_signature,
        }
    }

    pub fn features(&self) -> [f64; N_FEATURES] {
        self.audio_features().to_vector()
    }

    /// Checks every field bound; the error names the track and the offending field.
    pub fn validate(&self) -> Result<()> {
        if self.track_id.is_empty() {
            return Err(Error::validation("track_id is empty"));
        }
        if let Some(year) = self.release_year {
            if year < 1900 {
                return Err(Error::validation(format!(
                    "track {}: release_year {year} is before 1900",
                    self.track_id
                )));
            }
        }
        check_popularity(self.popularity)
            .and_then(|_| self.audio_features().validate())
            .map_err(|e| match e {
                Error::Validation(msg) => {
                    Error::validation(format!("track {}: {msg}", self.track_id))
                }
                other => other,
            })
    }

    /// Field values in [`RECORD_COLUMNS`] order. Reals use the shortest
    /// representation that parses back to the identical `f64`.
    pub fn to_fields(&self) -> Vec<String> {
        vec![
            self.track_id.clone(),
            self.title.clone(),
            self.artist.clone(),
            self.release_year.map(|y| y.to_string()).unwrap_or_default(),
            self.popularity.to_string(),
            self.danceability.to_string(),
            self.energy.to_string(),
            self.key.to_string(),
            self.loudness.to_string(),
            self.mode.to_string(),
            self.speechiness.to_string(),
            self.acousticness.to_string(),
            self.instrumentalness.to_string(),
            self.liveness.to_string(),
            self.valence.to_string(),
            self.tempo.to_string(),
            self.duration_ms.to_string(),
            self.time_signature.to_string(),
        ]
    }
}

#[cfg(test)]
pub(crate) fn sample_record(id: &str, popularity: i32) -> TrackRecord {
    TrackRecord::from_parts(
        id,
        format!("Title {id}"),
        "Artist",
        Some(2015),
        popularity,
        AudioFeatures {
            danceability: 0.73,
            energy: 0.61,
            key: 5,
            loudness: -6.25,
            mode: 1,
            speechiness: 0.08,
            acousticness: 0.21,
            instrumentalness: 0.0001,
            liveness: 0.12,
            valence: 0.66,
            tempo: 104.987,
            duration_ms: 201_533,
            time_signature: 4,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn feature_vector_follows_column_order() {
        let r = sample_record("a", 50);
        let v = r.features();
        assert_eq!(v[0], 0.73);
        assert_eq!(v[2], 5.0);
        assert_eq!(v[11], 201_533.0);
        assert_eq!(v[12], 4.0);
        assert_eq!(&RECORD_COLUMNS[5..], &FEATURE_NAMES[..]);
    }

    #[test]
    fn rejects_out_of_range_fields() {
        assert!(sample_record("a", 100).validate().is_ok());
        let err = sample_record("a", 101).validate().unwrap_err();
        assert!(err.to_string().contains("101"), "{err}");

        let mut r = sample_record("a", 10);
        r.mode = 2;
        assert!(r.validate().is_err());
        let mut r = sample_record("a", 10);
        r.key = 12;
        assert!(r.validate().is_err());
        let mut r = sample_record("a", 10);
        r.key = -1;
        assert!(r.validate().is_ok());
        let mut r = sample_record("a", 10);
        r.valence = 1.0000001;
        let err = r.validate().unwrap_err();
        assert!(err.to_string().contains("valence"));
        let mut r = sample_record("a", 10);
        r.tempo = 0.0;
        assert!(r.validate().is_err());
    }
}
