use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};

/// Binary confusion counts. Rows are the actual class, columns the predicted
/// class: the actual-negative row is `(tn, fp)`, the actual-positive row `(fn, tp)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tn: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tp: u64,
}

impl ConfusionMatrix {
    pub fn new(tn: u64, fp: u64, fn_: u64, tp: u64) -> Self {
        ConfusionMatrix { tn, fp, fn_, tp }
    }

    pub fn from_predictions(y_true: &[u8], y_pred: &[u8]) -> Result<Self> {
        if y_true.len() != y_pred.len() {
            return Err(Error::validation(format!(
                "label length {} differs from prediction length {}",
                y_true.len(),
                y_pred.len()
            )));
        }
        if y_true.is_empty() {
            return Err(Error::validation("confusion matrix needs at least one sample"));
        }
        let mut cm = ConfusionMatrix::new(0, 0, 0, 0);
        for (i, (&t, &p)) in y_true.iter().zip(y_pred).enumerate() {
            match (t, p) {
                (0, 0) => cm.tn += 1,
                (0, 1) => cm.fp += 1,
                (1, 0) => cm.fn_ += 1,
                (1, 1) => cm.tp += 1,
                _ => {
                    return Err(Error::validation(format!(
                        "entry {i} is not binary (actual {t}, predicted {p})"
                    )))
                }
            }
        }
        Ok(cm)
    }

    pub fn total(&self) -> u64 {
        self.tn + self.fp + self.fn_ + self.tp
    }

    /// Actual-class count.
    pub fn support(&self, class: u8) -> u64 {
        if class == 0 {
            self.tn + self.fp
        } else {
            self.fn_ + self.tp
        }
    }

    pub fn accuracy(&self) -> Result<f64> {
        self.non_empty()?;
        Ok((self.tn + self.tp) as f64 / self.total() as f64)
    }

    fn non_empty(&self) -> Result<()> {
        if self.total() == 0 {
            Err(Error::validation("confusion matrix is empty"))
        } else {
            Ok(())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Averaging {
    PerClass0,
    PerClass1,
    Weighted,
}

/// Serialize reals rounded to 6 decimal places.
pub(crate) fn six_dp<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_f64((x * 1e6).round() / 1e6)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub averaging: Averaging,
    #[serde(serialize_with = "six_dp")]
    pub accuracy: f64,
    #[serde(serialize_with = "six_dp")]
    pub precision: f64,
    #[serde(serialize_with = "six_dp")]
    pub recall: f64,
    #[serde(serialize_with = "six_dp")]
    pub f1: f64,
}

/// Per-class rows, the support-weighted row, and which cells hit 0/0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsSummary {
    pub class_0: MetricsRow,
    pub class_1: MetricsRow,
    pub weighted: MetricsRow,
    pub degenerate_cells: Vec<String>,
}

fn ratio(num: u64, den: u64, cell: &str, degenerate: &mut Vec<String>) -> f64 {
    if den == 0 {
        degenerate.push(cell.to_owned());
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn harmonic(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

fn class_row(cm: &ConfusionMatrix, class: u8, degenerate: &mut Vec<String>) -> MetricsRow {
    let (hit, predicted, actual) = if class == 0 {
        (cm.tn, cm.tn + cm.fn_, cm.tn + cm.fp)
    } else {
        (cm.tp, cm.tp + cm.fp, cm.tp + cm.fn_)
    };
    let precision = ratio(hit, predicted, &format!("precision[class {class}]"), degenerate);
    let recall = ratio(hit, actual, &format!("recall[class {class}]"), degenerate);
    MetricsRow {
        averaging: if class == 0 {
            Averaging::PerClass0
        } else {
            Averaging::PerClass1
        },
        accuracy: (cm.tn + cm.tp) as f64 / cm.total() as f64,
        precision,
        recall,
        f1: harmonic(precision, recall),
    }
}

/// All three averagings. Undefined ratios are reported as 0 and listed in
/// `degenerate_cells`.
pub fn metrics_summary(cm: &ConfusionMatrix) -> Result<MetricsSummary> {
    cm.non_empty()?;
    let mut degenerate = Vec::new();
    let c0 = class_row(cm, 0, &mut degenerate);
    let c1 = class_row(cm, 1, &mut degenerate);
    let n = cm.total() as f64;
    let (w0, w1) = (cm.support(0) as f64, cm.support(1) as f64);
    let avg = |a: f64, b: f64| (w0 * a + w1 * b) / n;
    let weighted = MetricsRow {
        averaging: Averaging::Weighted,
        accuracy: c0.accuracy,
        precision: avg(c0.precision, c1.precision),
        recall: avg(c0.recall, c1.recall),
        f1: avg(c0.f1, c1.f1),
    };
    Ok(MetricsSummary {
        class_0: c0,
        class_1: c1,
        weighted,
        degenerate_cells: degenerate,
    })
}

/// Support-weighted precision, recall and F1, plus accuracy.
pub fn weighted_metrics(cm: &ConfusionMatrix) -> Result<MetricsRow> {
    metrics_summary(cm).map(|s| s.weighted)
}

/// Weighted F1 of hard predictions.
pub fn weighted_f1(y_true: &[u8], y_pred: &[u8]) -> Result<f64> {
    weighted_metrics(&ConfusionMatrix::from_predictions(y_true, y_pred)?).map(|m| m.f1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn counts_follow_actual_rows() {
        assert_eq!(
            ConfusionMatrix::from_predictions(&[0, 1], &[0, 1]).unwrap(),
            ConfusionMatrix::new(1, 0, 0, 1)
        );
        assert_eq!(
            ConfusionMatrix::from_predictions(&[1], &[0]).unwrap(),
            ConfusionMatrix::new(0, 0, 1, 0)
        );
    }

    #[test]
    fn table_three_counts_from_vectors() {
        let mut y_true = Vec::new();
        let mut y_pred = Vec::new();
        for (t, p, n) in [(0u8, 0u8, 369), (0, 1, 2), (1, 0, 41), (1, 1, 1)] {
            y_true.extend(std::iter::repeat_n(t, n));
            y_pred.extend(std::iter::repeat_n(p, n));
        }
        assert_eq!(
            ConfusionMatrix::from_predictions(&y_true, &y_pred).unwrap(),
            ConfusionMatrix::new(369, 2, 41, 1)
        );
    }

    #[test]
    fn input_errors() {
        assert!(ConfusionMatrix::from_predictions(&[0, 1], &[0]).is_err());
        assert!(ConfusionMatrix::from_predictions(&[], &[]).is_err());
        assert!(ConfusionMatrix::from_predictions(&[2], &[0]).is_err());
        assert!(weighted_metrics(&ConfusionMatrix::new(0, 0, 0, 0)).is_err());
    }

    #[test]
    fn lr_matrix_by_hand() {
        // class 0: precision 369/410, recall 369/371, support 371
        // class 1: precision 1/3, recall 1/42, support 42
        let m = weighted_metrics(&ConfusionMatrix::new(369, 2, 41, 1)).unwrap();
        let p0 = 369.0 / 410.0;
        let r0 = 369.0 / 371.0;
        let p1 = 1.0 / 3.0;
        let r1 = 1.0 / 42.0;
        let f = |p: f64, r: f64| 2.0 * p * r / (p + r);
        assert_abs_diff_eq!(m.accuracy, 370.0 / 413.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m.precision, (371.0 * p0 + 42.0 * p1) / 413.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m.f1, (371.0 * f(p0, r0) + 42.0 * f(p1, r1)) / 413.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m.accuracy, 0.8959, epsilon = 5e-5);
        assert_abs_diff_eq!(m.precision, 0.8424, epsilon = 5e-5);
        assert_abs_diff_eq!(m.recall, 0.8959, epsilon = 5e-5);
        assert_abs_diff_eq!(m.f1, 0.8534, epsilon = 5e-5);
    }

    #[test]
    fn perfect_classifier() {
        let s = metrics_summary(&ConfusionMatrix::new(1, 0, 0, 1)).unwrap();
        for row in [s.class_0, s.class_1, s.weighted] {
            assert_eq!((row.accuracy, row.precision, row.recall, row.f1), (1.0, 1.0, 1.0, 1.0));
        }
        assert!(s.degenerate_cells.is_empty());
    }

    #[test]
    fn zero_over_zero_is_flagged() {
        let s = metrics_summary(&ConfusionMatrix::new(10, 0, 3, 0)).unwrap();
        assert_eq!(s.class_1.precision, 0.0);
        assert_eq!(s.class_1.f1, 0.0);
        assert_eq!(s.degenerate_cells, vec!["precision[class 1]".to_string()]);
    }

    #[test]
    fn report_rounds_to_six_places() {
        let m = weighted_metrics(&ConfusionMatrix::new(369, 2, 41, 1)).unwrap();
        let v = serde_json::to_value(m).unwrap();
        assert_eq!(v["precision"].as_f64().unwrap(), 0.842373);
        assert_eq!(v["averaging"], "weighted");
    }

    proptest! {
        #[test]
        fn weighted_recall_is_accuracy(tn in 0u64..500, fp in 0u64..500, fn_ in 0u64..500, tp in 0u64..500) {
            prop_assume!(tn + fp + fn_ + tp > 0);
            let m = weighted_metrics(&ConfusionMatrix::new(tn, fp, fn_, tp)).unwrap();
            prop_assert!((m.recall - m.accuracy).abs() <= 1e-12);
        }

        #[test]
        fn f1_is_harmonic_mean(tn in 1u64..500, fp in 1u64..500, fn_ in 1u64..500, tp in 1u64..500) {
            let s = metrics_summary(&ConfusionMatrix::new(tn, fp, fn_, tp)).unwrap();
            for row in [s.class_0, s.class_1] {
                let h = 2.0 / (1.0 / row.precision + 1.0 / row.recall);
                prop_assert!((row.f1 - h).abs() < 1e-12);
            }
        }
    }
}
