//! Binary decision trees: the shared node arena plus the CART classifier.

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use super::config::TreeParams;
use super::{check_input, Scorer};
use crate::error::{Error, Result};
use crate::rng::{self, StreamRng};

/// Tree node. Rows with `x[feature] <= threshold` go left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
        /// Impurity decrease (CART) or loss reduction (boosting) of this split.
        gain: f64,
    },
    Leaf {
        value: f64,
    },
}

/// Nodes stored flat with the root at index 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn leaf(value: f64) -> Self {
        Tree {
            nodes: vec![Node::Leaf { value }],
        }
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { value } => return value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => i = if x[feature] <= threshold { left } else { right },
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }

    /// Sum of split gains per feature.
    pub fn gain_by_feature(&self, n_features: usize) -> Vec<f64> {
        let mut out = vec![0.0; n_features];
        for node in &self.nodes {
            if let Node::Split { feature, gain, .. } = node {
                out[*feature] += gain;
            }
        }
        out
    }

    /// Checks that every child index points forward and every feature is in range.
    pub(crate) fn check(&self, n_features: usize) -> Result<()> {
        if self.nodes.is_empty() {
            return Err(Error::validation("tree has no nodes"));
        }
        for (i, node) in self.nodes.iter().enumerate() {
            if let Node::Split {
                feature,
                left,
                right,
                ..
            } = *node
            {
                if feature >= n_features || left <= i || right <= i || left >= self.nodes.len() || right >= self.nodes.len() {
                    return Err(Error::validation(format!("tree node {i} is malformed")));
                }
            }
        }
        Ok(())
    }
}

/// Gini impurity `1 - p0^2 - p1^2` of weighted class totals.
pub fn gini(w0: f64, w1: f64) -> f64 {
    let w = w0 + w1;
    if w <= 0.0 {
        return 0.0;
    }
    let (p0, p1) = (w0 / w, w1 / w);
    1.0 - p0 * p0 - p1 * p1
}

/// A trained CART classification tree whose leaves hold the class-1 fraction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub n_features: usize,
    pub tree: Tree,
}

impl Scorer for DecisionTree {
    fn n_features(&self) -> usize {
        self.n_features
    }

    fn score(&self, x: &[f64]) -> Result<f64> {
        check_input(x, self.n_features)?;
        Ok(self.tree.predict(x))
    }
}

pub fn train_dt(
    x: ArrayView2<'_, f64>,
    y: &[u8],
    weights: &[f64],
    params: &TreeParams,
    seed: u64,
) -> Result<DecisionTree> {
    if x.nrows() == 0 {
        return Err(Error::validation("cannot grow a tree on zero rows"));
    }
    let rows: Vec<usize> = (0..x.nrows()).collect();
    let mut rng = rng::seeded(seed);
    Ok(DecisionTree {
        n_features: x.ncols(),
        tree: grow_cart(x, y, weights, &rows, params, &mut rng),
    })
}

struct Candidate {
    feature: usize,
    threshold: f64,
    /// Weighted child impurity `W_L * G_L + W_R * G_R`.
    child_impurity: f64,
    split_at: usize,
}

/// Best Gini split of `rows` on `feature`, or `None` when the feature is constant.
/// Leaves `rows` sorted by that feature.
fn best_split_on(
    x: ArrayView2<'_, f64>,
    y: &[u8],
    weights: &[f64],
    rows: &mut [usize],
    feature: usize,
    totals: (f64, f64),
) -> Option<Candidate> {
    rows.sort_by(|&a, &b| x[[a, feature]].total_cmp(&x[[b, feature]]));
    let (mut l0, mut l1) = (0.0, 0.0);
    let mut best: Option<Candidate> = None;
    for k in 0..rows.len() - 1 {
        let r = rows[k];
        if y[r] == 1 {
            l1 += weights[r];
        } else {
            l0 += weights[r];
        }
        let (v, next) = (x[[r, feature]], x[[rows[k + 1], feature]]);
        if v == next {
            continue;
        }
        let (r0, r1) = (totals.0 - l0, totals.1 - l1);
        let child = (l0 + l1) * gini(l0, l1) + (r0 + r1) * gini(r0, r1);
        if best.as_ref().is_none_or(|b| child < b.child_impurity) {
            let mid = v + (next - v) / 2.0;
            best = Some(Candidate {
                feature,
                threshold: if mid < next { mid } else { v },
                child_impurity: child,
                split_at: k + 1,
            });
        }
    }
    best
}

/// Grows a CART tree over `rows` (indices may repeat, e.g. for bootstrap samples).
///
/// Each split minimises weighted child Gini over midpoints between
/// consecutive distinct values. With `max_features = k`, features are tried
/// in a random order and the best of the first `k` is used; further features
/// are examined only while none of those tried admits a split. Nodes stop
/// growing when pure, at `max_depth`, or below `min_samples_split` rows.
pub(crate) fn grow_cart(
    x: ArrayView2<'_, f64>,
    y: &[u8],
    weights: &[f64],
    rows: &[usize],
    params: &TreeParams,
    rng: &mut StreamRng,
) -> Tree {
    let n_features = x.ncols();
    let mut nodes = vec![Node::Leaf { value: 0.0 }];
    // (node slot, rows, depth)
    let mut stack: Vec<(usize, Vec<usize>, usize)> = vec![(0, rows.to_vec(), 0)];
    let mut order: Vec<usize> = (0..n_features).collect();

    while let Some((slot, mut node_rows, depth)) = stack.pop() {
        let (mut w0, mut w1) = (0.0, 0.0);
        for &r in &node_rows {
            if y[r] == 1 {
                w1 += weights[r];
            } else {
                w0 += weights[r];
            }
        }
        let value = if w0 + w1 > 0.0 { w1 / (w0 + w1) } else { 0.0 };
        nodes[slot] = Node::Leaf { value };

        let pure = w0 == 0.0 || w1 == 0.0;
        let too_deep = params.max_depth.is_some_and(|d| depth >= d);
        if pure || too_deep || node_rows.len() < params.min_samples_split {
            continue;
        }

        let budget = match params.max_features {
            Some(k) if k < n_features => {
                rng::shuffle(&mut order, rng);
                k
            }
            _ => n_features,
        };
        let mut best: Option<Candidate> = None;
        for (tried, &f) in order.iter().enumerate() {
            if tried >= budget && best.is_some() {
                break;
            }
            if let Some(c) = best_split_on(x, y, weights, &mut node_rows, f, (w0, w1)) {
                if best.as_ref().is_none_or(|b| c.child_impurity < b.child_impurity) {
                    best = Some(c);
                }
            }
        }
        let Some(best) = best else { continue };

        node_rows.sort_by(|&a, &b| x[[a, best.feature]].total_cmp(&x[[b, best.feature]]));
        let right_rows = node_rows.split_off(best.split_at);
        let gain = ((w0 + w1) * gini(w0, w1) - best.child_impurity).max(0.0);
        let (left, right) = (nodes.len(), nodes.len() + 1);
        nodes.push(Node::Leaf { value: 0.0 });
        nodes.push(Node::Leaf { value: 0.0 });
        nodes[slot] = Node::Split {
            feature: best.feature,
            threshold: best.threshold,
            left,
            right,
            gain,
        };
        stack.push((right, right_rows, depth + 1));
        stack.push((left, node_rows, depth + 1));
    }
    Tree { nodes }
}
