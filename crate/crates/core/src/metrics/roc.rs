use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub fpr: f64,
    pub tpr: f64,
    /// Lowest score classified positive at this point; absent for the origin.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    pub points: Vec<RocPoint>,
    pub auc: f64,
}

/// ROC curve with one step per distinct score, highest first.
///
/// Tied scores move false and true positives together in a single step, so
/// the trapezoid over that step credits ties with one half. The area is
/// accumulated in integer counts and divided once, which makes it identical
/// to the Mann–Whitney estimate `P(pos > neg) + P(tie)/2`.
pub fn roc(y_true: &[u8], scores: &[f64]) -> Result<RocCurve> {
    if y_true.len() != scores.len() {
        return Err(Error::validation(format!(
            "label length {} differs from score length {}",
            y_true.len(),
            scores.len()
        )));
    }
    if let Some(i) = scores.iter().position(|s| !s.is_finite()) {
        return Err(Error::validation(format!("score {i} is not finite")));
    }
    if let Some(i) = y_true.iter().position(|&y| y > 1) {
        return Err(Error::validation(format!("label {i} is not binary")));
    }
    let positives = y_true.iter().filter(|&&y| y == 1).count() as u64;
    let negatives = y_true.len() as u64 - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::validation(
            "ROC needs at least one positive and one negative label",
        ));
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let mut points = vec![RocPoint {
        fpr: 0.0,
        tpr: 0.0,
        threshold: None,
    }];
    let (mut tp, mut fp) = (0u64, 0u64);
    let mut doubled_area: u128 = 0;
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        let (prev_tp, prev_fp) = (tp, fp);
        while i < order.len() && scores[order[i]] == s {
            if y_true[order[i]] == 1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        doubled_area += u128::from(fp - prev_fp) * u128::from(tp + prev_tp);
        points.push(RocPoint {
            fpr: fp as f64 / negatives as f64,
            tpr: tp as f64 / positives as f64,
            threshold: Some(s),
        });
    }
    let auc = doubled_area as f64 / (2 * u128::from(positives) * u128::from(negatives)) as f64;
    Ok(RocCurve { points, auc })
}

impl RocCurve {
    /// Two-column `fpr,tpr` CSV for external plotting.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("fpr,tpr\n");
        for p in &self.points {
            out.push_str(&format!("{},{}\n", p.fpr, p.tpr));
        }
        out
    }
}
