mod evaluate;
mod gridsearch;
mod ingest;
mod label;
mod report;
mod synth;
mod train;

use std::path::{Path, PathBuf};

use hitpredict_core::dataset::{io, LabeledDataset, LabeledTrack, SplitPlan, SplitScheme};
use hitpredict_core::learners::Variant;

pub use evaluate::run as evaluate;
pub use gridsearch::run as gridsearch;
pub use ingest::run as ingest;
pub use label::run as label;
pub use report::run as report;
pub use synth::run as synth;
pub use train::run as train;

use crate::args::SplitKind;
use crate::error::{CliError, Result};

fn load_labeled(path: &Path) -> Result<(Vec<LabeledTrack>, LabeledDataset)> {
    let tracks = io::read_labeled(path)?;
    if tracks.is_empty() {
        return Err(CliError::usage(format!("{} has no rows", path.display())));
    }
    let data = LabeledDataset::from_tracks(&tracks, path.display().to_string())?;
    Ok((tracks, data))
}

fn split_plan(kind: Option<SplitKind>, variant: Variant, test_fraction: f64, seed: u64, n_rows: usize) -> SplitPlan {
    let kind = kind.unwrap_or(if variant == Variant::Nn {
        SplitKind::NnTwoWay
    } else {
        SplitKind::ThreeWay
    });
    let scheme = match kind {
        SplitKind::ThreeWay => SplitScheme::ThreeWay,
        SplitKind::Stratified => SplitScheme::Stratified,
        SplitKind::NnTwoWay => SplitScheme::TwoWay { test_fraction },
    };
    SplitPlan {
        scheme,
        seed,
        n_rows,
    }
}

fn parse_set(pairs: &[String]) -> Result<Vec<(String, f64)>> {
    pairs
        .iter()
        .map(|p| {
            let (k, v) = p
                .split_once('=')
                .ok_or_else(|| CliError::usage(format!("--set expects NAME=VALUE, got `{p}`")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| CliError::usage(format!("--set {k}: `{v}` is not a number")))?;
            Ok((k.trim().replace('-', "_"), v))
        })
        .collect()
}

/// `model.json` becomes `model.manifest.json`.
fn manifest_path_for(out: &Path) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}.manifest.json"))
}
