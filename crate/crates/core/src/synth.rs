//! Synthetic labeled datasets with a planted audio-feature signal.
//!
//! Popularity is right-skewed with minimum 0, maximum 82 and a mean near 25.
//! Hits lean towards higher danceability, energy and loudness, and most of
//! them sit in a narrow tempo band that a linear model cannot isolate.

use rand::Rng;
use rand_distr::{Beta, Distribution, Normal};

use crate::dataset::{AudioFeatures, LabeledTrack, TrackRecord, DEFAULT_HIT_THRESHOLD};
use crate::error::{Error, Result};
use crate::rng::{self, StreamRng};

pub const DEFAULT_ROWS: usize = 2063;
pub const DEFAULT_HITS: usize = 237;

/// Lowest and highest popularity present in every generated set.
pub const POPULARITY_RANGE: (i32, i32) = (0, 82);

/// Tempo band (BPM) most hits fall in.
pub const HIT_TEMPO_BAND: (f64, f64) = (118.0, 128.0);

struct Sampler {
    rng: StreamRng,
    non_hit_pop: Beta<f64>,
    hit_pop: Beta<f64>,
    std_normal: Normal<f64>,
}

impl Sampler {
    fn new(seed: u64) -> Self {
        Sampler {
            rng: rng::seeded(seed),
            non_hit_pop: Beta::new(1.6, 2.05).expect("valid beta"),
            hit_pop: Beta::new(1.2, 2.5).expect("valid beta"),
            std_normal: Normal::new(0.0, 1.0).expect("valid normal"),
        }
    }

    fn normal(&mut self, mean: f64, sd: f64) -> f64 {
        mean + sd * self.std_normal.sample(&mut self.rng)
    }

    fn unit_normal(&mut self, mean: f64, sd: f64) -> f64 {
        self.normal(mean, sd).clamp(0.0, 1.0)
    }

    fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * rng::unit(&mut self.rng)
    }

    fn popularity(&mut self, hit: bool) -> i32 {
        let (lo, hi) = (DEFAULT_HIT_THRESHOLD, POPULARITY_RANGE.1);
        if hit {
            let span = f64::from(hi - lo - 1);
            lo + 1 + (span * self.hit_pop.sample(&mut self.rng)).round() as i32
        } else {
            (f64::from(lo) * self.non_hit_pop.sample(&mut self.rng)).round() as i32
        }
    }

    fn features(&mut self, hit: bool) -> AudioFeatures {
        let shift = if hit { 1.0 } else { 0.0 };
        let tempo = if hit && self.rng.random_bool(0.8) {
            self.uniform(HIT_TEMPO_BAND.0, HIT_TEMPO_BAND.1)
        } else {
            self.uniform(60.0, 200.0)
        };
        let seconds = self.normal(215.0, 40.0).clamp(60.0, 600.0);
        AudioFeatures {
            danceability: self.unit_normal(0.56 + 0.14 * shift, 0.13),
            energy: self.unit_normal(0.58 + 0.10 * shift, 0.16),
            key: rng::below(&mut self.rng, 12) as i32,
            loudness: self.normal(-8.0 + 2.0 * shift, 2.8).min(0.0),
            mode: i32::from(self.rng.random_bool(0.6)),
            speechiness: self.unit_normal(0.09, 0.07),
            acousticness: self.unit_normal(0.28 - 0.08 * shift, 0.22),
            instrumentalness: (self.uniform(0.0, 1.0).powi(6) * (1.0 - 0.7 * shift)).min(1.0),
            liveness: self.unit_normal(0.18, 0.1),
            valence: self.unit_normal(0.48, 0.2),
            tempo,
            duration_ms: (seconds * 1000.0).round() as u64,
            time_signature: if self.rng.random_bool(0.92) { 4 } else { 3 },
        }
    }
}

/// `n` labeled tracks of which exactly `hits` have popularity above the
/// default threshold. Deterministic for a given seed.
pub fn generate(n: usize, hits: usize, seed: u64) -> Result<Vec<LabeledTrack>> {
    if hits == 0 || hits >= n {
        return Err(Error::Config(format!(
            "synthetic set needs 0 < hits < rows, got {hits} hits in {n} rows"
        )));
    }
    let mut labels: Vec<bool> = (0..n).map(|i| i < hits).collect();
    rng::shuffle(&mut labels, &mut rng::seeded(rng::derive_seed(seed, 0)));

    let mut s = Sampler::new(rng::derive_seed(seed, 1));
    let mut pops: Vec<i32> = labels.iter().map(|&h| s.popularity(h)).collect();
    // Pin the extremes so every set spans the full range.
    if let Some(i) = labels.iter().position(|&h| !h) {
        pops[i] = POPULARITY_RANGE.0;
    }
    if let Some(i) = labels.iter().position(|&h| h) {
        pops[i] = POPULARITY_RANGE.1;
    }

    labels
        .iter()
        .zip(pops)
        .enumerate()
        .map(|(i, (&hit, popularity))| {
            let year = 2010 + rng::below(&mut s.rng, 11) as i32;
            let features = s.features(hit);
            let record = TrackRecord::from_parts(
                format!("syn{i:07}"),
                format!("Synthetic Track {i}"),
                format!("Artist {}", i % 431),
                Some(year),
                popularity,
                features,
            );
            record.validate()?;
            LabeledTrack::label(record, DEFAULT_HIT_THRESHOLD)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{class_distribution, deduplicate};

    #[test]
    fn default_shape() {
        let set = generate(DEFAULT_ROWS, DEFAULT_HITS, 42).unwrap();
        let labels: Vec<u8> = set.iter().map(|t| t.hit).collect();
        assert_eq!(class_distribution(&labels), (1826, 237));
        let pops: Vec<i32> = set.iter().map(|t| t.record.popularity).collect();
        assert_eq!(*pops.iter().min().unwrap(), 0);
        assert_eq!(*pops.iter().max().unwrap(), 82);
        let mean = pops.iter().map(|&p| f64::from(p)).sum::<f64>() / pops.len() as f64;
        assert!((mean - 25.0).abs() < 2.0, "mean {mean}");
        let records: Vec<TrackRecord> = set.iter().map(|t| t.record.clone()).collect();
        assert_eq!(deduplicate(&records).len(), DEFAULT_ROWS);
    }

    #[test]
    fn deterministic() {
        assert_eq!(generate(300, 30, 9).unwrap(), generate(300, 30, 9).unwrap());
        assert_ne!(generate(300, 30, 9).unwrap(), generate(300, 30, 10).unwrap());
    }

    #[test]
    fn rejects_degenerate_counts() {
        assert!(generate(10, 0, 1).is_err());
        assert!(generate(10, 10, 1).is_err());
        assert!(generate(2, 1, 1).is_ok());
    }
}
