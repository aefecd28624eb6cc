use hitpredict_core::dataset::{class_distribution, io};
use hitpredict_core::synth;
use serde_json::json;

use crate::args::SynthArgs;
use crate::error::Result;
use crate::manifest::RunManifest;
use crate::output::{to_json, Outputs};

pub fn run(a: &SynthArgs) -> Result<()> {
    let tracks = synth::generate(a.n, a.hits, a.seed)?;
    let bytes = io::encode_labeled(&tracks, io::FileFormat::from_path(&a.out))?;
    let mut outputs = Outputs::default();
    outputs.add(&a.out, bytes);
    if let Some(path) = &a.manifest {
        let mut m = RunManifest::new("synth", json!({"n": a.n, "hits": a.hits, "seed": a.seed}));
        m.outputs = outputs.digests();
        outputs.add(path, to_json(&m)?);
    }
    outputs.commit()?;
    let labels: Vec<u8> = tracks.iter().map(|t| t.hit).collect();
    let (non_hits, hits) = class_distribution(&labels);
    println!("wrote {} rows to {}: {non_hits} non hits, {hits} hits", tracks.len(), a.out.display());
    Ok(())
}
