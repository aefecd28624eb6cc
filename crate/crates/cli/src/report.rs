use std::fmt::Write as _;
use std::path::Path;

use hitpredict_core::learners::FeatureImportance;
use hitpredict_core::metrics::{ConfusionMatrix, EvaluationReport, MetricsSummary, RocCurve};
use serde::Serialize;
use serde_json::Value;

use crate::error::{CliError, Result};

/// The JSON document `evaluate` writes.
#[derive(Debug, Clone, Serialize)]
pub struct ReportFile {
    pub model: String,
    pub partition: String,
    pub n_samples: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    pub confusion: ConfusionMatrix,
    pub metrics: MetricsSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub roc: Option<RocCurve>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub feature_importance: Option<FeatureImportance>,
}

impl ReportFile {
    pub fn from_evaluation(model: &str, partition: &str, e: EvaluationReport) -> Self {
        ReportFile {
            model: model.to_owned(),
            partition: partition.to_owned(),
            n_samples: e.n_samples,
            threshold: Some(e.threshold),
            confusion: e.confusion,
            metrics: e.metrics,
            roc: e.roc,
            notes: e.notes,
            feature_importance: None,
        }
    }
}

/// One table row pulled out of a report file.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub model: String,
    pub partition: String,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub importance: Option<Vec<(String, f64)>>,
}

const METRICS: [&str; 4] = ["accuracy", "precision", "recall", "f1"];

pub fn parse_report(path: &Path, text: &str) -> Result<ReportRow> {
    let v: Value = serde_json::from_str(text)
        .map_err(|e| CliError::usage(format!("{}: not a JSON report: {e}", path.display())))?;
    let missing = |field: &str| CliError::usage(format!("{}: report lacks `{field}`", path.display()));
    let text_field = |name: &str| v.get(name).and_then(Value::as_str).map(str::to_owned).ok_or_else(|| missing(name));
    let weighted = v
        .get("metrics")
        .and_then(|m| m.get("weighted"))
        .ok_or_else(|| missing("metrics.weighted"))?;
    let mut vals = [0.0; 4];
    for (slot, name) in vals.iter_mut().zip(METRICS) {
        *slot = weighted
            .get(name)
            .and_then(Value::as_f64)
            .ok_or_else(|| missing(&format!("metrics.weighted.{name}")))?;
    }
    let importance = match v.get("feature_importance") {
        None | Some(Value::Null) => None,
        Some(fi) => {
            let names = fi.get("names").and_then(Value::as_array);
            let mdi = fi.get("mdi").and_then(Value::as_array);
            let (Some(names), Some(mdi)) = (names, mdi) else {
                return Err(missing("feature_importance.names/mdi"));
            };
            let pairs = names
                .iter()
                .zip(mdi)
                .map(|(n, m)| Some((n.as_str()?.to_owned(), m.as_f64()?)))
                .collect::<Option<Vec<_>>>()
                .ok_or_else(|| missing("feature_importance.names/mdi"))?;
            Some(pairs)
        }
    };
    Ok(ReportRow {
        model: text_field("model")?,
        partition: text_field("partition").unwrap_or_default(),
        accuracy: vals[0],
        precision: vals[1],
        recall: vals[2],
        f1: vals[3],
        importance,
    })
}

pub fn markdown(rows: &[ReportRow]) -> String {
    let mut s = String::new();
    s.push_str("| Model | Partition | Accuracy | Precision | Recall | F1 score |\n");
    s.push_str("|---|---|---|---|---|---|\n");
    for r in rows {
        let _ = writeln!(
            s,
            "| {} | {} | {:.2} | {:.2} | {:.2} | {:.2} |",
            r.model.to_uppercase(),
            r.partition,
            r.accuracy,
            r.precision,
            r.recall,
            r.f1
        );
    }
    let with_importance: Vec<&ReportRow> = rows.iter().filter(|r| r.importance.is_some()).collect();
    if let Some(first) = with_importance.first() {
        s.push_str("\nFeature importance (mean decrease in impurity)\n\n| Feature |");
        for r in &with_importance {
            let _ = write!(s, " {} |", r.model.to_uppercase());
        }
        s.push_str("\n|---|");
        s.push_str(&"---|".repeat(with_importance.len()));
        s.push('\n');
        let names = first.importance.as_ref().expect("filtered");
        for (i, (name, _)) in names.iter().enumerate() {
            let _ = write!(s, "| {name} |");
            for r in &with_importance {
                let v = r.importance.as_ref().and_then(|imp| imp.get(i)).map(|p| p.1);
                let _ = write!(s, " {} |", v.map(|v| format!("{v:.4}")).unwrap_or_default());
            }
            s.push('\n');
        }
    }
    s
}

pub fn csv(rows: &[ReportRow]) -> String {
    let mut s = String::from("model,partition,accuracy,precision,recall,f1\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{:.6},{:.6},{:.6},{:.6}",
            r.model, r.partition, r.accuracy, r.precision, r.recall, r.f1
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    const REPORT: &str = r#"{"model":"rf","partition":"validation",
        "metrics":{"weighted":{"accuracy":0.9,"precision":0.86,"recall":0.9,"f1":0.86}},
        "feature_importance":{"names":["a","b"],"mdi":[0.75,0.25]}}"#;

    #[test]
    fn parses_and_renders() {
        let row = parse_report(Path::new("r.json"), REPORT).unwrap();
        assert_eq!(row.f1, 0.86);
        let md = markdown(std::slice::from_ref(&row));
        assert!(md.contains("| RF | validation | 0.90 | 0.86 | 0.90 | 0.86 |"), "{md}");
        assert!(md.contains("| a | 0.7500 |"));
        assert_eq!(csv(&[row]).lines().count(), 2);
    }

    #[test]
    fn missing_field_is_named() {
        let text = REPORT.replace(r#","f1":0.86"#, "");
        let err = parse_report(Path::new("r.json"), &text).unwrap_err();
        assert!(err.to_string().contains("metrics.weighted.f1"), "{err}");
    }
}
