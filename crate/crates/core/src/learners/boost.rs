//! Second-order gradient boosting of regression trees on the logistic loss.
//!
//! Each round fits a tree to per-row gradients `g = w(p - y)` and hessians
//! `h = w p (1 - p)` of the log-loss at the current margin. A leaf holding
//! rows with sums `G`, `H` gets value `-G / (H + lambda)`, and a split of a
//! node into `L`, `R` is scored by
//!
//! ```text
//! gain = 1/2 [G_L^2/(H_L+lambda) + G_R^2/(H_R+lambda) - G^2/(H+lambda)] - gamma
//! ```
//!
//! Splits are found by exact greedy enumeration and kept only when
//! `gain > 0` and both children carry at least `min_child_weight` hessian.

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use super::config::BoostParams;
use super::tree::{Node, Tree};
use super::{check_input, sigmoid, Scorer};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostedTrees {
    pub n_features: usize,
    /// Log-odds of the training base rate.
    pub base_score: f64,
    /// Shrinkage multiplying every tree output.
    pub learning_rate: f64,
    /// Leaves hold unshrunk Newton steps.
    pub trees: Vec<Tree>,
}

impl BoostedTrees {
    pub fn margin(&self, x: &[f64]) -> f64 {
        self.base_score
            + self.learning_rate * self.trees.iter().map(|t| t.predict(x)).sum::<f64>()
    }

    /// The ensemble after its first `rounds` trees.
    pub fn truncated(&self, rounds: usize) -> BoostedTrees {
        BoostedTrees {
            trees: self.trees[..rounds.min(self.trees.len())].to_vec(),
            ..self.clone()
        }
    }
}

impl Scorer for BoostedTrees {
    fn n_features(&self) -> usize {
        self.n_features
    }

    fn score(&self, x: &[f64]) -> Result<f64> {
        check_input(x, self.n_features)?;
        Ok(sigmoid(self.margin(x)))
    }
}

pub fn train_gbt(
    x: ArrayView2<'_, f64>,
    y: &[u8],
    weights: &[f64],
    params: &BoostParams,
) -> Result<BoostedTrees> {
    let n = x.nrows();
    let total: f64 = weights.iter().sum();
    let positive: f64 = y.iter().zip(weights).filter(|(&l, _)| l == 1).map(|(_, w)| w).sum();
    if n == 0 || total <= 0.0 {
        return Err(Error::validation("cannot boost on zero rows"));
    }
    let rate = positive / total;
    if rate <= 0.0 {
        return Err(Error::SingleClass(0));
    }
    if rate >= 1.0 {
        return Err(Error::SingleClass(1));
    }
    let base_score = (rate / (1.0 - rate)).ln();

    let mut margins = vec![base_score; n];
    let mut grad = vec![0.0; n];
    let mut hess = vec![0.0; n];
    let mut trees = Vec::with_capacity(params.n_estimators);
    let rows: Vec<usize> = (0..n).collect();
    let mut buf = vec![0.0; x.ncols()];
    for _ in 0..params.n_estimators {
        for i in 0..n {
            let p = sigmoid(margins[i]);
            grad[i] = weights[i] * (p - f64::from(y[i]));
            hess[i] = weights[i] * p * (1.0 - p);
        }
        let tree = grow_newton_tree(x, &grad, &hess, &rows, params);
        for (i, m) in margins.iter_mut().enumerate() {
            for (j, b) in buf.iter_mut().enumerate() {
                *b = x[[i, j]];
            }
            *m += params.learning_rate * tree.predict(&buf);
        }
        trees.push(tree);
    }
    Ok(BoostedTrees {
        n_features: x.ncols(),
        base_score,
        learning_rate: params.learning_rate,
        trees,
    })
}

/// `-G / (H + lambda)`, zero when the denominator vanishes.
pub fn newton_leaf(g: f64, h: f64, lambda: f64) -> f64 {
    let den = h + lambda;
    if den > 0.0 {
        -g / den
    } else {
        0.0
    }
}

fn structure_score(g: f64, h: f64, lambda: f64) -> f64 {
    let den = h + lambda;
    if den > 0.0 {
        g * g / den
    } else {
        0.0
    }
}

struct Best {
    feature: usize,
    threshold: f64,
    gain: f64,
    split_at: usize,
}

pub(crate) fn grow_newton_tree(
    x: ArrayView2<'_, f64>,
    grad: &[f64],
    hess: &[f64],
    rows: &[usize],
    params: &BoostParams,
) -> Tree {
    let lambda = params.lambda;
    let mut nodes = vec![Node::Leaf { value: 0.0 }];
    let mut stack: Vec<(usize, Vec<usize>, usize)> = vec![(0, rows.to_vec(), 0)];

    while let Some((slot, mut node_rows, depth)) = stack.pop() {
        let g: f64 = node_rows.iter().map(|&r| grad[r]).sum();
        let h: f64 = node_rows.iter().map(|&r| hess[r]).sum();
        nodes[slot] = Node::Leaf {
            value: newton_leaf(g, h, lambda),
        };
        if depth >= params.max_depth || node_rows.len() < 2 {
            continue;
        }

        let parent = structure_score(g, h, lambda);
        let mut best: Option<Best> = None;
        for f in 0..x.ncols() {
            node_rows.sort_by(|&a, &b| x[[a, f]].total_cmp(&x[[b, f]]));
            let (mut gl, mut hl) = (0.0, 0.0);
            for k in 0..node_rows.len() - 1 {
                let r = node_rows[k];
                gl += grad[r];
                hl += hess[r];
                let (v, next) = (x[[r, f]], x[[node_rows[k + 1], f]]);
                if v == next {
                    continue;
                }
                let (gr, hr) = (g - gl, h - hl);
                if hl < params.min_child_weight || hr < params.min_child_weight {
                    continue;
                }
                let gain = 0.5
                    * (structure_score(gl, hl, lambda) + structure_score(gr, hr, lambda) - parent)
                    - params.gamma;
                if best.as_ref().is_none_or(|b| gain > b.gain) {
                    let mid = v + (next - v) / 2.0;
                    best = Some(Best {
                        feature: f,
                        threshold: if mid < next { mid } else { v },
                        gain,
                        split_at: k + 1,
                    });
                }
            }
        }
        let Some(best) = best.filter(|b| b.gain > 0.0) else {
            continue;
        };

        node_rows.sort_by(|&a, &b| x[[a, best.feature]].total_cmp(&x[[b, best.feature]]));
        let right_rows = node_rows.split_off(best.split_at);
        let (left, right) = (nodes.len(), nodes.len() + 1);
        nodes.push(Node::Leaf { value: 0.0 });
        nodes.push(Node::Leaf { value: 0.0 });
        nodes[slot] = Node::Split {
            feature: best.feature,
            threshold: best.threshold,
            left,
            right,
            gain: best.gain,
        };
        stack.push((right, right_rows, depth + 1));
        stack.push((left, node_rows, depth + 1));
    }
    Tree { nodes }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use ndarray::{array, Array2};

    fn log_loss(model: &BoostedTrees, x: &Array2<f64>, y: &[u8]) -> f64 {
        let mut total = 0.0;
        for (row, &label) in x.rows().into_iter().zip(y) {
            let p = model.score(&row.to_vec()).unwrap();
            total -= if label == 1 { p.ln() } else { (1.0 - p).ln() };
        }
        total / y.len() as f64
    }

    #[test]
    fn zero_rounds_is_base_rate() {
        let x = array![[0.0], [1.0], [2.0], [3.0], [4.0]];
        let y = [0, 1, 0, 0, 1];
        let params = BoostParams {
            n_estimators: 0,
            ..BoostParams::default()
        };
        let m = train_gbt(x.view(), &y, &[1.0; 5], &params).unwrap();
        for v in [0.0, 2.5, 100.0] {
            assert!((m.score(&[v]).unwrap() - 0.4).abs() < 1e-12);
        }
        assert!((m.base_score - (0.4f64 / 0.6).ln()).abs() < 1e-15);
    }

    #[test]
    fn single_round_stump_leaves() {
        // base rate 1/4: p = 1/4, g = p - y, h = 3/16 for every row.
        // Best split x <= 1.5: G_L = 1/2, H_L = 3/8 -> -0.5/1.375 = -4/11.
        let x = array![[0.0], [1.0], [2.0], [3.0]];
        let y = [0, 0, 1, 0];
        let params = BoostParams {
            n_estimators: 1,
            max_depth: 1,
            lambda: 1.0,
            learning_rate: 0.3,
            min_child_weight: 0.0,
            gamma: 0.0,
        };
        let m = train_gbt(x.view(), &y, &[1.0; 4], &params).unwrap();
        match m.trees[0].nodes[..] {
            [Node::Split { threshold, .. }, Node::Leaf { value: l }, Node::Leaf { value: r }] => {
                assert_eq!(threshold, 1.5);
                assert!((l + 4.0 / 11.0).abs() < 1e-12);
                assert!((r - 4.0 / 11.0).abs() < 1e-12);
            }
            ref other => panic!("unexpected tree {other:?}"),
        }
    }

    #[test]
    fn loss_never_increases() {
        let mut r = rng::seeded(21);
        let x = Array2::from_shape_fn((200, 13), |_| rng::unit(&mut r));
        let y: Vec<u8> = (0..200)
            .map(|i| u8::from(x[[i, 0]] * x[[i, 1]] + 0.3 * rng::unit(&mut r) > 0.45))
            .collect();
        let m = train_gbt(x.view(), &y, &[1.0; 200], &BoostParams::default()).unwrap();
        let mut prev = f64::INFINITY;
        for k in 0..=m.trees.len() {
            let l = log_loss(&m.truncated(k), &x, &y);
            assert!(l <= prev + 1e-12, "round {k}: {l} > {prev}");
            prev = l;
        }
    }

    #[test]
    fn min_child_weight_blocks_tiny_children() {
        let x = array![[0.0], [1.0], [2.0], [3.0]];
        let y = [0, 0, 1, 1];
        let m = train_gbt(x.view(), &y, &[1.0; 4], &BoostParams { n_estimators: 1, ..BoostParams::default() }).unwrap();
        // total hessian is 1.0, so no split can give both children >= 1
        assert_eq!(m.trees[0].n_leaves(), 1);
    }

    #[test]
    fn single_class_rejected() {
        let x = array![[0.0], [1.0]];
        assert!(matches!(
            train_gbt(x.view(), &[1, 1], &[1.0; 2], &BoostParams::default()),
            Err(Error::SingleClass(1))
        ));
    }
}
