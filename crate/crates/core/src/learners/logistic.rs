use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use super::config::LogisticParams;
use super::{check_input, require_both_classes, sigmoid, softplus, Scorer};
use crate::error::{Error, Result};

/// Binary logistic regression fitted by maximum likelihood.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    /// Mean cross-entropy on the training rows after the last iteration.
    pub final_loss: f64,
}

impl LogisticModel {
    pub fn zeros(n_features: usize) -> Self {
        LogisticModel {
            weights: vec![0.0; n_features],
            bias: 0.0,
            final_loss: f64::NAN,
        }
    }

    fn linear(&self, x: &[f64]) -> f64 {
        self.bias + self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>()
    }
}

impl Scorer for LogisticModel {
    fn n_features(&self) -> usize {
        self.weights.len()
    }

    fn score(&self, x: &[f64]) -> Result<f64> {
        check_input(x, self.weights.len())?;
        Ok(sigmoid(self.linear(x)))
    }
}

/// Weighted mean cross-entropy `sum_i w_i [softplus(z_i) - y_i z_i] / n`
/// and its gradient with respect to `(weights, bias)`.
pub fn loss_and_gradient(
    weights: &[f64],
    bias: f64,
    x: ArrayView2<'_, f64>,
    y: &[u8],
    sample_weights: &[f64],
) -> (f64, Vec<f64>, f64) {
    let n = x.nrows() as f64;
    let mut loss = 0.0;
    let mut grad = vec![0.0; weights.len()];
    let mut grad_bias = 0.0;
    for ((row, &label), &w) in x.rows().into_iter().zip(y).zip(sample_weights) {
        let z = bias + row.iter().zip(weights).map(|(a, b)| a * b).sum::<f64>();
        let t = f64::from(label);
        loss += w * (softplus(z) - t * z);
        let residual = w * (sigmoid(z) - t);
        for (g, v) in grad.iter_mut().zip(row.iter()) {
            *g += residual * v;
        }
        grad_bias += residual;
    }
    grad.iter_mut().for_each(|g| *g /= n);
    (loss / n, grad, grad_bias / n)
}

/// Full-batch gradient descent from zero weights.
pub fn train_lr(
    x: ArrayView2<'_, f64>,
    y: &[u8],
    sample_weights: &[f64],
    params: &LogisticParams,
) -> Result<LogisticModel> {
    if x.nrows() < 2 {
        return Err(Error::validation("logistic regression needs at least 2 rows"));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::validation("training matrix contains non-finite values"));
    }
    require_both_classes(y)?;
    let mut model = LogisticModel::zeros(x.ncols());
    for _ in 0..params.iterations {
        let (_, grad, grad_bias) =
            loss_and_gradient(&model.weights, model.bias, x, y, sample_weights);
        for (w, g) in model.weights.iter_mut().zip(&grad) {
            *w -= params.learning_rate * g;
        }
        model.bias -= params.learning_rate * grad_bias;
    }
    model.final_loss = loss_and_gradient(&model.weights, model.bias, x, y, sample_weights).0;
    Ok(model)
}
