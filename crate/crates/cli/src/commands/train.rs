use hitpredict_core::dataset::SplitIndices;
use hitpredict_core::learners::{require_both_classes, train, ModelDocument, TrainConfig, Variant};
use serde_json::json;

use super::{load_labeled, manifest_path_for, parse_set, split_plan};
use crate::args::TrainArgs;
use crate::error::Result;
use crate::manifest::{RunManifest, SplitSizes};
use crate::output::{to_json, FileDigest, Outputs};

pub fn sizes(parts: &SplitIndices) -> SplitSizes {
    SplitSizes {
        train: parts.train.len(),
        validation: parts.validation.len(),
        test: parts.test.len(),
    }
}

pub fn run(a: &TrainArgs) -> Result<()> {
    let variant: Variant = a.model.into();
    let (_, data) = load_labeled(&a.input)?;
    let labels = data.labels();
    require_both_classes(&labels)?;

    let mut config = TrainConfig::new(variant, a.seed);
    config.decision_threshold = a.decision_threshold;
    config.class_weight = a.class_weight.into();
    for (name, value) in a.params.pairs().into_iter().chain(parse_set(&a.params.set)?) {
        config.set_param(&name, value)?;
    }
    config.validate()?;

    let plan = split_plan(a.split, variant, a.test_fraction, a.seed, data.len());
    let parts = plan.apply(&labels)?;
    let x = data.select_features(&parts.train);
    let y = data.select_labels(&parts.train);
    let trained = train(&config, x.view(), &y)?;
    let doc = ModelDocument::new(trained, Some(plan));

    let mut outputs = Outputs::default();
    outputs.add(&a.out, doc.to_json()?.into_bytes());
    if let Some(path) = &a.export_indices {
        outputs.add(path, to_json(&parts)?);
    }
    let mut manifest = RunManifest::new(
        "train",
        json!({"input": a.input.display().to_string(), "split": plan, "train_config": config}),
    );
    manifest.inputs.push(FileDigest::read(&a.input)?);
    manifest.outputs = outputs.digests();
    manifest.split_sizes = Some(sizes(&parts));
    let manifest_path = a.manifest.clone().unwrap_or_else(|| manifest_path_for(&a.out));
    outputs.add(&manifest_path, to_json(&manifest)?);
    outputs.commit()?;

    println!(
        "trained {variant} on {} rows (train/validation/test {}/{}/{}); model written to {}",
        parts.train.len(),
        parts.train.len(),
        parts.validation.len(),
        parts.test.len(),
        a.out.display()
    );
    Ok(())
}
