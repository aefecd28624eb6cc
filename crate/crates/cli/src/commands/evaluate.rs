use std::path::Path;

use hitpredict_core::dataset::FEATURE_NAMES;
use hitpredict_core::learners::{
    mdi_importance, permutation_importance, FeatureImportance, Model, ModelDocument,
    PERMUTATION_REPEATS,
};
use hitpredict_core::metrics::{evaluate, metrics_summary, ConfusionMatrix};
use serde::Deserialize;

use super::load_labeled;
use crate::args::{EvaluateArgs, Partition};
use crate::error::{CliError, Result};
use crate::output::{to_json, Outputs};
use crate::report::ReportFile;

/// A stored confusion matrix, as shipped in the golden fixtures.
#[derive(Debug, Deserialize)]
struct ConfusionFile {
    model: String,
    #[serde(default)]
    partition: Option<String>,
    confusion: ConfusionMatrix,
}

fn partition_name(p: Partition) -> &'static str {
    match p {
        Partition::Train => "train",
        Partition::Validation => "validation",
        Partition::Test => "test",
    }
}

fn from_confusion(path: &Path) -> Result<ReportFile> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let file: ConfusionFile = serde_json::from_str(&text)
        .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    let metrics = metrics_summary(&file.confusion)?;
    Ok(ReportFile {
        model: file.model,
        partition: file.partition.unwrap_or_else(|| "validation".into()),
        n_samples: file.confusion.total() as usize,
        threshold: None,
        confusion: file.confusion,
        metrics,
        roc: None,
        notes: vec!["computed from a stored confusion matrix".into()],
        feature_importance: None,
    })
}

fn from_model(a: &EvaluateArgs, model: &Path, input: &Path) -> Result<ReportFile> {
    let doc = ModelDocument::load(model)?;
    if doc.feature_names != FEATURE_NAMES {
        return Err(CliError::usage(format!(
            "{} was trained on features {:?}, not the 13 audio features",
            model.display(),
            doc.feature_names
        )));
    }
    let plan = doc.split.ok_or_else(|| {
        CliError::usage(format!("{} carries no split plan to rebuild", model.display()))
    })?;
    let (_, data) = load_labeled(input)?;
    let parts = plan.apply(&data.labels())?;
    let partition = a.partition.unwrap_or(if parts.validation.is_empty() {
        Partition::Test
    } else {
        Partition::Validation
    });
    let rows = match partition {
        Partition::Train => &parts.train,
        Partition::Validation => &parts.validation,
        Partition::Test => &parts.test,
    };
    if rows.is_empty() {
        return Err(CliError::usage(format!(
            "the model's split has no {} rows",
            partition_name(partition)
        )));
    }
    let threshold = a.threshold.unwrap_or(doc.trained.config.decision_threshold);
    let x = data.select_features(rows);
    let y = data.select_labels(rows);
    let evaluation = evaluate(&doc.trained, x.view(), &y, threshold)?;
    let mut report = ReportFile::from_evaluation(doc.variant.name(), partition_name(partition), evaluation);

    if matches!(doc.trained.model, Model::Rf(_) | Model::Xgb(_)) && !a.no_importance {
        let seed = a.seed.unwrap_or(doc.trained.config.seed);
        let permutation =
            permutation_importance(&doc.trained, x.view(), &y, threshold, PERMUTATION_REPEATS, seed)?;
        report.feature_importance = Some(FeatureImportance {
            names: doc.feature_names.clone(),
            mdi: mdi_importance(&doc.trained.model)?,
            permutation: Some(permutation),
        });
    }
    Ok(report)
}

pub fn run(a: &EvaluateArgs) -> Result<()> {
    let report = match (&a.confusion, &a.model, &a.input) {
        (Some(c), _, _) => from_confusion(c)?,
        (None, Some(m), Some(i)) => from_model(a, m, i)?,
        _ => return Err(CliError::usage("evaluate needs --model and --in, or --confusion")),
    };
    let json = to_json(&report)?;
    let mut outputs = Outputs::default();
    if let Some(path) = &a.roc_csv {
        let roc = report.roc.as_ref().ok_or_else(|| {
            CliError::usage("no ROC curve: the evaluated rows contain a single class")
        })?;
        outputs.add(path, roc.to_csv().into_bytes());
    }
    match &a.out {
        Some(path) => outputs.add(path, json),
        None => print!("{}", String::from_utf8_lossy(&json)),
    }
    outputs.commit()?;
    let w = &report.metrics.weighted;
    eprintln!(
        "{} on {} ({} rows): accuracy {:.4} precision {:.4} recall {:.4} f1 {:.4}",
        report.model, report.partition, report.n_samples, w.accuracy, w.precision, w.recall, w.f1
    );
    Ok(())
}
