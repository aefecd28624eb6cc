//! Imbalance-aware evaluation: confusion counts, per-class and
//! support-weighted precision/recall/F1, ROC and AUC.

mod confusion;
mod roc;

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

pub use confusion::{
    metrics_summary, weighted_f1, weighted_metrics, Averaging, ConfusionMatrix, MetricsRow,
    MetricsSummary,
};
pub use roc::{roc, RocCurve, RocPoint};

use crate::error::Result;
use crate::learners::Scorer;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub n_samples: usize,
    pub threshold: f64,
    pub confusion: ConfusionMatrix,
    pub metrics: MetricsSummary,
    /// Absent when the evaluated rows hold a single class.
    pub roc: Option<RocCurve>,
    #[serde(default)]
    pub notes: Vec<String>,
}

impl EvaluationReport {
    pub fn from_scores(y_true: &[u8], scores: &[f64], threshold: f64) -> Result<Self> {
        let y_pred: Vec<u8> = scores.iter().map(|&s| u8::from(s >= threshold)).collect();
        let confusion = ConfusionMatrix::from_predictions(y_true, &y_pred)?;
        let metrics = metrics_summary(&confusion)?;
        let mut notes = Vec::new();
        let roc = if confusion.support(0) > 0 && confusion.support(1) > 0 {
            Some(roc(y_true, scores)?)
        } else {
            notes.push("ROC omitted: evaluated rows contain a single class".to_owned());
            None
        };
        Ok(EvaluationReport {
            n_samples: y_true.len(),
            threshold,
            confusion,
            metrics,
            roc,
            notes,
        })
    }
}

/// Scores every row, thresholds with `score >= threshold`, and aggregates.
pub fn evaluate<S: Scorer + ?Sized>(
    model: &S,
    rows: ArrayView2<'_, f64>,
    y_true: &[u8],
    threshold: f64,
) -> Result<EvaluationReport> {
    let scores = model.score_rows(rows)?;
    EvaluationReport::from_scores(y_true, &scores, threshold)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use ndarray::{array, Array2};

    struct Echo;

    impl Scorer for Echo {
        fn n_features(&self) -> usize {
            1
        }
        fn score(&self, x: &[f64]) -> Result<f64> {
            if x.len() != 1 {
                return Err(Error::Dimension {
                    expected: 1,
                    got: x.len(),
                });
            }
            Ok(x[0])
        }
    }

    struct Constant;

    impl Scorer for Constant {
        fn n_features(&self) -> usize {
            1
        }
        fn score(&self, _: &[f64]) -> Result<f64> {
            Ok(0.5)
        }
    }

    #[test]
    fn perfect_model() {
        let x = array![[0.0], [1.0], [0.0], [1.0]];
        let r = evaluate(&Echo, x.view(), &[0, 1, 0, 1], 0.5).unwrap();
        assert_eq!(r.metrics.weighted.accuracy, 1.0);
        assert_eq!(r.roc.unwrap().auc, 1.0);
    }

    #[test]
    fn constant_model_auc_half() {
        let x = Array2::zeros((6, 1));
        let r = evaluate(&Constant, x.view(), &[0, 1, 0, 0, 1, 0], 0.5).unwrap();
        assert_eq!(r.roc.unwrap().auc, 0.5);
    }

    #[test]
    fn rf_reference_counts_round_to_two_places() {
        // 368 tn, 3 fp, 39 fn, 3 tp
        let mut scores = Vec::new();
        let mut y = Vec::new();
        for (t, s, n) in [(0u8, 0.1, 368), (0, 0.9, 3), (1, 0.2, 39), (1, 0.8, 3)] {
            y.extend(std::iter::repeat_n(t, n));
            scores.extend(std::iter::repeat_n(s, n));
        }
        let x = Array2::from_shape_vec((scores.len(), 1), scores).unwrap();
        let r = evaluate(&Echo, x.view(), &y, 0.5).unwrap();
        assert_eq!(r.confusion, ConfusionMatrix::new(368, 3, 39, 3));
        let w = r.metrics.weighted;
        let two = |v: f64| (v * 100.0).round() / 100.0;
        assert_eq!(
            (two(w.accuracy), two(w.precision), two(w.recall), two(w.f1)),
            (0.90, 0.86, 0.90, 0.86)
        );
    }

    #[test]
    fn single_class_rows_drop_roc() {
        let x = array![[0.2], [0.7]];
        let r = evaluate(&Echo, x.view(), &[0, 0], 0.5).unwrap();
        assert!(r.roc.is_none());
        assert_eq!(r.notes.len(), 1);
    }

    #[test]
    fn report_json_has_all_averagings() {
        let x = array![[0.0], [1.0], [0.6], [0.3]];
        let r = evaluate(&Echo, x.view(), &[0, 1, 0, 1], 0.5).unwrap();
        let v = serde_json::to_value(&r).unwrap();
        for key in ["class_0", "class_1", "weighted"] {
            assert!(v["metrics"][key]["f1"].is_number(), "{key}");
        }
        assert_eq!(v["confusion"]["fn"], 1);
        let back: EvaluationReport = serde_json::from_value(v).unwrap();
        assert_eq!(back.confusion, r.confusion);
    }
}
