use ndarray::ArrayView2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ForestParams;
use super::tree::{grow_cart, Tree};
use super::{check_input, Scorer};
use crate::error::{Error, Result};
use crate::rng;

/// Bagged CART trees; the score is the fraction of trees voting for class 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    pub n_features: usize,
    pub trees: Vec<Tree>,
}

impl Scorer for RandomForest {
    fn n_features(&self) -> usize {
        self.n_features
    }

    fn score(&self, x: &[f64]) -> Result<f64> {
        check_input(x, self.n_features)?;
        let votes = self.trees.iter().filter(|t| t.predict(x) >= 0.5).count();
        Ok(votes as f64 / self.trees.len() as f64)
    }
}

/// Tree `t` uses the stream `derive_seed(seed, t)` for both its bootstrap
/// draw and its feature sampling, so trees can be grown in any order.
pub fn train_rf(
    x: ArrayView2<'_, f64>,
    y: &[u8],
    weights: &[f64],
    params: &ForestParams,
    seed: u64,
) -> Result<RandomForest> {
    let n = x.nrows();
    if n == 0 {
        return Err(Error::validation("cannot grow a forest on zero rows"));
    }
    let trees = (0..params.n_estimators)
        .into_par_iter()
        .map(|t| {
            let mut stream = rng::seeded(rng::derive_seed(seed, t as u64));
            let rows: Vec<usize> = if params.bootstrap {
                (0..n).map(|_| rng::below(&mut stream, n)).collect()
            } else {
                (0..n).collect()
            };
            grow_cart(x, y, weights, &rows, &params.tree, &mut stream)
        })
        .collect();
    Ok(RandomForest {
        n_features: x.ncols(),
        trees,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learners::config::TreeParams;
    use crate::learners::tree::train_dt;
    use ndarray::Array2;

    fn noisy(n: usize, seed: u64) -> (Array2<f64>, Vec<u8>) {
        let mut r = rng::seeded(seed);
        let x = Array2::from_shape_fn((n, 5), |_| rng::unit(&mut r));
        let y = (0..n)
            .map(|i| u8::from(x[[i, 0]] + 0.3 * rng::unit(&mut r) > 0.6))
            .collect();
        (x, y)
    }

    #[test]
    fn degenerate_forest_equals_tree() {
        let (x, y) = noisy(120, 1);
        let w = vec![1.0; y.len()];
        let tree_params = TreeParams::default();
        let params = ForestParams {
            n_estimators: 1,
            bootstrap: false,
            tree: tree_params.clone(),
        };
        let f = train_rf(x.view(), &y, &w, &params, 9).unwrap();
        let t = train_dt(x.view(), &y, &w, &tree_params, 9).unwrap();
        assert_eq!(f.trees[0], t.tree);
        for row in x.rows() {
            let row = row.to_vec();
            assert_eq!(f.predict(&row, 0.5).unwrap(), t.predict(&row, 0.5).unwrap());
        }
    }

    #[test]
    fn disabled_randomness_gives_identical_trees() {
        let (x, y) = noisy(80, 2);
        let params = ForestParams {
            n_estimators: 4,
            bootstrap: false,
            tree: TreeParams::default(),
        };
        let f = train_rf(x.view(), &y, &vec![1.0; y.len()], &params, 3).unwrap();
        assert!(f.trees.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn separable_data_fit_perfectly() {
        let x = Array2::from_shape_fn((60, 3), |(i, j)| {
            if j == 0 { i as f64 } else { ((i * 7 + j * 3) % 11) as f64 }
        });
        let y: Vec<u8> = (0..60).map(|i| u8::from(i >= 30)).collect();
        let f = train_rf(x.view(), &y, &vec![1.0; 60], &ForestParams::default(), 5).unwrap();
        for (i, row) in x.rows().into_iter().enumerate() {
            assert_eq!(f.predict(&row.to_vec(), 0.5).unwrap(), y[i]);
        }
    }

    #[test]
    fn seeded_and_vote_fractions() {
        let (x, y) = noisy(100, 3);
        let w = vec![1.0; y.len()];
        let a = train_rf(x.view(), &y, &w, &ForestParams::default(), 11).unwrap();
        let b = train_rf(x.view(), &y, &w, &ForestParams::default(), 11).unwrap();
        assert_eq!(a, b);
        let c = train_rf(x.view(), &y, &w, &ForestParams::default(), 12).unwrap();
        assert_ne!(a, c);
        for row in x.rows() {
            let s = a.score(&row.to_vec()).unwrap();
            assert_eq!((s * 100.0).round() / 100.0, s);
        }
    }
}
