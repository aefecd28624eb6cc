//! Fully connected network: two ReLU hidden layers and a sigmoid output,
//! trained on binary cross-entropy with mini-batch Adam.

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use super::config::MlpParams;
use super::{check_input, require_both_classes, sigmoid, softplus, Scorer};
use crate::error::{Error, Result};
use crate::rng::{self, StreamRng};

/// Affine layer; `weights` is `outputs x inputs`, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Dense {
    /// Glorot-uniform weights, zero bias.
    fn glorot(inputs: usize, outputs: usize, rng: &mut StreamRng) -> Self {
        let limit = (6.0 / (inputs + outputs) as f64).sqrt();
        let weights = (0..inputs * outputs)
            .map(|_| limit * (2.0 * rng::unit(rng) - 1.0))
            .collect();
        Dense {
            inputs,
            outputs,
            weights,
            bias: vec![0.0; outputs],
        }
    }

    fn forward(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.extend(self.bias.iter().enumerate().map(|(o, b)| {
            b + self.weights[o * self.inputs..(o + 1) * self.inputs]
                .iter()
                .zip(x)
                .map(|(w, v)| w * v)
                .sum::<f64>()
        }));
    }

    fn n_params(&self) -> usize {
        self.weights.len() + self.bias.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub layers: Vec<Dense>,
}

impl Mlp {
    pub fn new(n_inputs: usize, hidden: [usize; 2], rng: &mut StreamRng) -> Self {
        Mlp {
            layers: vec![
                Dense::glorot(n_inputs, hidden[0], rng),
                Dense::glorot(hidden[0], hidden[1], rng),
                Dense::glorot(hidden[1], 1, rng),
            ],
        }
    }

    /// Pre-activations of every layer for one input.
    fn forward(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let mut pre = Vec::with_capacity(self.layers.len());
        let mut input = x.to_vec();
        for (k, layer) in self.layers.iter().enumerate() {
            let mut z = Vec::new();
            layer.forward(&input, &mut z);
            if k + 1 < self.layers.len() {
                input = z.iter().map(|v| v.max(0.0)).collect();
            }
            pre.push(z);
        }
        pre
    }

    pub fn margin(&self, x: &[f64]) -> f64 {
        self.forward(x).last().expect("network has layers")[0]
    }

    pub fn n_params(&self) -> usize {
        self.layers.iter().map(Dense::n_params).sum()
    }

    /// All parameters, layer by layer, weights before biases.
    pub fn params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_params());
        for l in &self.layers {
            out.extend_from_slice(&l.weights);
            out.extend_from_slice(&l.bias);
        }
        out
    }

    pub fn set_params(&mut self, flat: &[f64]) {
        assert_eq!(flat.len(), self.n_params(), "parameter vector length");
        let mut at = 0;
        for l in &mut self.layers {
            let nw = l.weights.len();
            l.weights.copy_from_slice(&flat[at..at + nw]);
            at += nw;
            let nb = l.bias.len();
            l.bias.copy_from_slice(&flat[at..at + nb]);
            at += nb;
        }
    }

    /// Weighted mean cross-entropy over `rows` and its gradient in [`Mlp::params`] order.
    pub fn loss_and_gradient(
        &self,
        x: ArrayView2<'_, f64>,
        y: &[u8],
        sample_weights: &[f64],
        rows: &[usize],
    ) -> (f64, Vec<f64>) {
        let mut grads: Vec<Dense> = self
            .layers
            .iter()
            .map(|l| Dense {
                inputs: l.inputs,
                outputs: l.outputs,
                weights: vec![0.0; l.weights.len()],
                bias: vec![0.0; l.bias.len()],
            })
            .collect();
        let scale = 1.0 / rows.len() as f64;
        let mut loss = 0.0;
        let mut input = vec![0.0; x.ncols()];

        for &r in rows {
            for (j, v) in input.iter_mut().enumerate() {
                *v = x[[r, j]];
            }
            let pre = self.forward(&input);
            let z = pre.last().expect("network has layers")[0];
            let t = f64::from(y[r]);
            let w = sample_weights[r];
            loss += w * (softplus(z) - t * z);

            // delta = dLoss/dz for the current layer
            let mut delta = vec![w * (sigmoid(z) - t) * scale];
            for k in (0..self.layers.len()).rev() {
                let activations: Vec<f64> = if k == 0 {
                    input.clone()
                } else {
                    pre[k - 1].iter().map(|v| v.max(0.0)).collect()
                };
                let layer = &self.layers[k];
                let g = &mut grads[k];
                for (o, d) in delta.iter().enumerate() {
                    g.bias[o] += d;
                    for (i, a) in activations.iter().enumerate() {
                        g.weights[o * layer.inputs + i] += d * a;
                    }
                }
                if k > 0 {
                    delta = (0..layer.inputs)
                        .map(|i| {
                            if pre[k - 1][i] <= 0.0 {
                                return 0.0;
                            }
                            delta
                                .iter()
                                .enumerate()
                                .map(|(o, d)| d * layer.weights[o * layer.inputs + i])
                                .sum()
                        })
                        .collect();
                }
            }
        }
        let flat = Mlp { layers: grads }.params();
        (loss * scale, flat)
    }
}

impl Scorer for Mlp {
    fn n_features(&self) -> usize {
        self.layers[0].inputs
    }

    fn score(&self, x: &[f64]) -> Result<f64> {
        check_input(x, self.n_features())?;
        Ok(sigmoid(self.margin(x)))
    }
}

/// First and second moment estimates for Adam with bias correction.
struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    step: i32,
    lr: f64,
    beta1: f64,
    beta2: f64,
    epsilon: f64,
}

impl Adam {
    fn new(n: usize, p: &MlpParams) -> Self {
        Adam {
            m: vec![0.0; n],
            v: vec![0.0; n],
            step: 0,
            lr: p.learning_rate,
            beta1: p.beta1,
            beta2: p.beta2,
            epsilon: p.epsilon,
        }
    }

    fn update(&mut self, params: &mut [f64], grad: &[f64]) {
        self.step += 1;
        let c1 = 1.0 - self.beta1.powi(self.step);
        let c2 = 1.0 - self.beta2.powi(self.step);
        for i in 0..params.len() {
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * grad[i];
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * grad[i] * grad[i];
            let m_hat = self.m[i] / c1;
            let v_hat = self.v[i] / c2;
            params[i] -= self.lr * m_hat / (v_hat.sqrt() + self.epsilon);
        }
    }
}

/// Initialization draws from stream 0 of `seed`, batch shuffling from stream 1.
pub fn train_mlp(
    x: ArrayView2<'_, f64>,
    y: &[u8],
    sample_weights: &[f64],
    params: &MlpParams,
    seed: u64,
) -> Result<Mlp> {
    if x.nrows() == 0 {
        return Err(Error::validation("cannot train a network on zero rows"));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::validation("training matrix contains non-finite values"));
    }
    require_both_classes(y)?;
    let mut net = Mlp::new(x.ncols(), params.hidden, &mut rng::seeded(rng::derive_seed(seed, 0)));
    let mut order_rng = rng::seeded(rng::derive_seed(seed, 1));
    let mut flat = net.params();
    let mut adam = Adam::new(flat.len(), params);
    let mut order: Vec<usize> = (0..x.nrows()).collect();
    for _ in 0..params.epochs {
        rng::shuffle(&mut order, &mut order_rng);
        for batch in order.chunks(params.batch_size) {
            let (_, grad) = net.loss_and_gradient(x, y, sample_weights, batch);
            adam.update(&mut flat, &grad);
            net.set_params(&flat);
        }
    }
    Ok(net)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;

    #[test]
    fn zero_output_layer_scores_half() {
        let mut net = Mlp::new(13, [16, 8], &mut rng::seeded(1));
        let out = net.layers.last_mut().unwrap();
        out.weights.iter_mut().for_each(|w| *w = 0.0);
        assert_eq!(net.score(&[0.3; 13]).unwrap(), 0.5);
        assert_eq!(net.score(&[-4.0; 13]).unwrap(), 0.5);
    }

    #[test]
    fn params_round_trip() {
        let mut net = Mlp::new(3, [4, 2], &mut rng::seeded(2));
        assert_eq!(net.n_params(), 3 * 4 + 4 + 4 * 2 + 2 + 2 + 1);
        let mut p = net.params();
        p[0] = 9.0;
        net.set_params(&p);
        assert_eq!(net.layers[0].weights[0], 9.0);
        assert_eq!(net.params(), p);
    }

    #[test]
    fn learns_a_linear_rule() {
        let mut r = rng::seeded(4);
        let x = Array2::from_shape_fn((400, 4), |_| 2.0 * rng::unit(&mut r) - 1.0);
        let y: Vec<u8> = (0..400).map(|i| u8::from(x[[i, 0]] + x[[i, 1]] > 0.0)).collect();
        let params = MlpParams {
            epochs: 30,
            ..MlpParams::default()
        };
        let net = train_mlp(x.view(), &y, &vec![1.0; 400], &params, 7).unwrap();
        let correct = x
            .rows()
            .into_iter()
            .zip(&y)
            .filter(|(row, &l)| net.predict(&row.to_vec(), 0.5).unwrap() == l)
            .count();
        assert!(correct > 380, "{correct}");
    }

    #[test]
    fn deterministic() {
        let x = Array2::from_shape_fn((40, 3), |(i, j)| ((i * 3 + j * 5) % 7) as f64 / 7.0);
        let y: Vec<u8> = (0..40).map(|i| (i % 3 == 0) as u8).collect();
        let w = vec![1.0; 40];
        let a = train_mlp(x.view(), &y, &w, &MlpParams::default(), 5).unwrap();
        let b = train_mlp(x.view(), &y, &w, &MlpParams::default(), 5).unwrap();
        assert_eq!(a, b);
    }
}
