use hitpredict_core::dataset::{class_distribution, io, LabeledTrack};
use serde_json::json;

use crate::args::LabelArgs;
use crate::error::{CliError, Result};
use crate::manifest::RunManifest;
use crate::output::{to_json, FileDigest, Outputs};

pub fn run(a: &LabelArgs) -> Result<()> {
    let records = io::read_records(&a.input)?;
    if records.is_empty() {
        return Err(CliError::usage(format!("{} has no records", a.input.display())));
    }
    let tracks = records
        .into_iter()
        .map(|r| LabeledTrack::label(r, a.threshold))
        .collect::<Result<Vec<_>, _>>()?;
    let mut outputs = Outputs::default();
    outputs.add(&a.out, io::encode_labeled(&tracks, io::FileFormat::from_path(&a.out))?);
    if let Some(path) = &a.manifest {
        let mut m = RunManifest::new("label", json!({"threshold": a.threshold}));
        m.inputs.push(FileDigest::read(&a.input)?);
        m.outputs = outputs.digests();
        outputs.add(path, to_json(&m)?);
    }
    outputs.commit()?;
    let labels: Vec<u8> = tracks.iter().map(|t| t.hit).collect();
    let (non_hits, hits) = class_distribution(&labels);
    println!("{non_hits} non hits, {hits} hits");
    Ok(())
}
