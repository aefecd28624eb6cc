use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use super::{Model, Scorer};
use crate::error::{Error, Result};
use crate::metrics::weighted_f1;
use crate::rng;

/// Permutations drawn per feature for permutation importance.
pub const PERMUTATION_REPEATS: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureImportance {
    pub names: Vec<String>,
    /// Normalized mean decrease in impurity; sums to 1.
    pub mdi: Vec<f64>,
    /// Mean weighted-F1 drop when the feature is shuffled, if a dataset was given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub permutation: Option<Vec<f64>>,
}

impl FeatureImportance {
    /// Names with their MDI value, largest first.
    pub fn ranking(&self) -> Vec<(String, f64)> {
        let mut out: Vec<(String, f64)> = self.names.iter().cloned().zip(self.mdi.iter().copied()).collect();
        out.sort_by(|a, b| b.1.total_cmp(&a.1));
        out
    }
}

/// Split gains summed per feature over all trees, normalized to sum to 1.
/// Gini decrease for forests, loss reduction for boosted trees. A model
/// without any split yields all zeros.
pub fn mdi_importance(model: &Model) -> Result<Vec<f64>> {
    let (trees, n) = match model {
        Model::Rf(f) => (&f.trees, f.n_features),
        Model::Xgb(b) => (&b.trees, b.n_features),
        other => {
            return Err(Error::Unsupported(format!(
                "feature importance needs a tree ensemble, got {}",
                other.variant()
            )))
        }
    };
    let mut total = vec![0.0; n];
    for t in trees {
        for (acc, g) in total.iter_mut().zip(t.gain_by_feature(n)) {
            *acc += g;
        }
    }
    let sum: f64 = total.iter().sum();
    if sum > 0.0 {
        total.iter_mut().for_each(|v| *v /= sum);
    }
    Ok(total)
}

/// For each feature, the mean drop in weighted F1 over `repeats` seeded
/// shuffles of that column. Shuffle `k` of feature `j` uses stream
/// `derive_seed(seed, j * repeats + k)`.
pub fn permutation_importance<S: Scorer + ?Sized>(
    model: &S,
    x: ArrayView2<'_, f64>,
    y: &[u8],
    threshold: f64,
    repeats: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    let f1_of = |rows: ArrayView2<'_, f64>| -> Result<f64> {
        let preds: Vec<u8> = model
            .score_rows(rows)?
            .into_iter()
            .map(|s| u8::from(s >= threshold))
            .collect();
        weighted_f1(y, &preds)
    };
    let baseline = f1_of(x)?;
    let mut work = x.to_owned();
    let mut out = Vec::with_capacity(x.ncols());
    for j in 0..x.ncols() {
        let original = x.column(j);
        let mut drop = 0.0;
        for k in 0..repeats {
            let mut col: Vec<f64> = original.to_vec();
            let mut stream = rng::seeded(rng::derive_seed(seed, (j * repeats + k) as u64));
            rng::shuffle(&mut col, &mut stream);
            work.column_mut(j).iter_mut().zip(&col).for_each(|(w, v)| *w = *v);
            drop += baseline - f1_of(work.view())?;
        }
        work.column_mut(j).assign(&original);
        out.push(drop / repeats.max(1) as f64);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learners::{train, TrainConfig, Variant};
    use ndarray::Array2;

    /// Only feature 0 carries the label; the rest are independent noise.
    fn single_signal(n: usize) -> (Array2<f64>, Vec<u8>) {
        let mut r = rng::seeded(17);
        let x = Array2::from_shape_fn((n, 13), |_| rng::unit(&mut r));
        let y = (0..n).map(|i| u8::from(x[[i, 0]] > 0.5)).collect();
        (x, y)
    }

    #[test]
    fn signal_feature_dominates() {
        let (x, y) = single_signal(2000);
        for v in [Variant::Rf, Variant::Xgb] {
            let m = train(&TrainConfig::new(v, 3), x.view(), &y).unwrap();
            let imp = mdi_importance(&m.model).unwrap();
            assert!(imp[0] > 0.9, "{v}: {imp:?}");
            assert!((imp.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn noise_feature_has_no_permutation_importance() {
        let (x, y) = single_signal(400);
        let m = train(&TrainConfig::new(Variant::Rf, 3), x.view(), &y).unwrap();
        let (xt, yt) = single_signal(300);
        let imp = permutation_importance(&m, xt.view(), &yt, 0.5, PERMUTATION_REPEATS, 1).unwrap();
        assert!(imp[0] > 0.3, "{imp:?}");
        for v in &imp[1..] {
            assert!(*v <= 0.02, "{imp:?}");
        }
    }

    #[test]
    fn rejects_single_models() {
        let (x, y) = single_signal(50);
        let m = train(&TrainConfig::new(Variant::Dt, 3), x.view(), &y).unwrap();
        assert!(matches!(mdi_importance(&m.model), Err(Error::Unsupported(_))));
    }

    #[test]
    fn ranking_sorted() {
        let fi = FeatureImportance {
            names: vec!["a".into(), "b".into(), "c".into()],
            mdi: vec![0.2, 0.5, 0.3],
            permutation: None,
        };
        let names: Vec<String> = fi.ranking().into_iter().map(|(n, _)| n).collect();
        assert_eq!(names, vec!["b", "c", "a"]);
    }
}
