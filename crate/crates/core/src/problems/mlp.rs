use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Dataset, Labels, Problem};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    #[default]
    Tanh,
    Relu,
}

impl Activation {
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Tanh => z.tanh(),
            Activation::Relu => z.max(0.0),
        }
    }

    /// Derivative expressed through the activation output `a` and input `z`.
    fn derivative(self, z: f64, a: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - a * a,
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

/// Fully connected classifier with a softmax cross-entropy head.
///
/// Parameters are packed layer by layer: the `out × in` weight matrix in
/// row-major order followed by the `out` biases.
#[derive(Debug, Clone)]
pub struct TinyMlp {
    data: Dataset,
    labels: Vec<usize>,
    layers: Vec<usize>,
    activation: Activation,
    offsets: Vec<usize>,
    dim: usize,
}

impl TinyMlp {
    pub fn new(data: Dataset, layers: Vec<usize>, activation: Activation) -> Result<Self> {
        if layers.len() < 2 || layers.iter().any(|&w| w == 0) {
            return Err(Error::contract(format!("invalid layer widths {layers:?}")));
        }
        if layers[0] != data.width() {
            return Err(Error::contract(format!(
                "input width {} does not match data width {}",
                layers[0],
                data.width()
            )));
        }
        let labels = match data.labels() {
            Labels::Class(v) => v.clone(),
            Labels::Real(_) => return Err(Error::contract("tiny_mlp needs class labels")),
        };
        let n_out = *layers.last().unwrap();
        if labels.iter().any(|&y| y >= n_out) {
            return Err(Error::contract("a label exceeds the number of outputs"));
        }
        if data.n_train() == 0 {
            return Err(Error::contract("tiny_mlp needs training rows"));
        }
        let mut offsets = Vec::with_capacity(layers.len());
        let mut dim = 0;
        for w in layers.windows(2) {
            offsets.push(dim);
            dim += w[1] * w[0] + w[1];
        }
        Ok(Self {
            data,
            labels,
            layers,
            activation,
            offsets,
            dim,
        })
    }

    pub fn layers(&self) -> &[usize] {
        &self.layers
    }

    /// Pre-activations and activations of every layer for one input.
    fn forward(&self, theta: &[f64], x: &[f64]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let n_layers = self.layers.len() - 1;
        let mut zs = Vec::with_capacity(n_layers);
        let mut acts = vec![x.to_vec()];
        for l in 0..n_layers {
            let (n_in, n_out) = (self.layers[l], self.layers[l + 1]);
            let w = &theta[self.offsets[l]..self.offsets[l] + n_in * n_out];
            let b = &theta[self.offsets[l] + n_in * n_out..self.offsets[l] + n_in * n_out + n_out];
            let input = acts.last().unwrap();
            let z: Vec<f64> = (0..n_out)
                .map(|o| {
                    w[o * n_in..(o + 1) * n_in]
                        .iter()
                        .zip(input)
                        .map(|(a, b)| a * b)
                        .sum::<f64>()
                        + b[o]
                })
                .collect();
            let a = if l + 1 == n_layers {
                z.clone()
            } else {
                z.iter().map(|&v| self.activation.apply(v)).collect()
            };
            zs.push(z);
            acts.push(a);
        }
        (zs, acts)
    }

    fn log_softmax(logits: &[f64]) -> Vec<f64> {
        let m = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lse = m + logits.iter().map(|z| (z - m).exp()).sum::<f64>().ln();
        logits.iter().map(|z| z - lse).collect()
    }

    fn example_loss(&self, theta: &[f64], i: usize) -> f64 {
        let (_, acts) = self.forward(theta, self.data.row(i));
        -Self::log_softmax(acts.last().unwrap())[self.labels[i]]
    }

    fn accumulate_grad(&self, theta: &[f64], i: usize, scale: f64, grad: &mut [f64]) {
        let (zs, acts) = self.forward(theta, self.data.row(i));
        let n_layers = self.layers.len() - 1;
        let logp = Self::log_softmax(acts.last().unwrap());
        // dL/dlogits = softmax − onehot
        let mut delta: Vec<f64> = logp.iter().map(|l| l.exp()).collect();
        delta[self.labels[i]] -= 1.0;
        for l in (0..n_layers).rev() {
            let (n_in, n_out) = (self.layers[l], self.layers[l + 1]);
            let off = self.offsets[l];
            let input = &acts[l];
            for o in 0..n_out {
                let d = delta[o] * scale;
                for (gw, a) in grad[off + o * n_in..off + (o + 1) * n_in].iter_mut().zip(input) {
                    *gw += d * a;
                }
                grad[off + n_in * n_out + o] += d;
            }
            if l > 0 {
                let w = &theta[off..off + n_in * n_out];
                let mut prev = vec![0.0; n_in];
                for o in 0..n_out {
                    for (p, wv) in prev.iter_mut().zip(&w[o * n_in..(o + 1) * n_in]) {
                        *p += delta[o] * wv;
                    }
                }
                for (j, p) in prev.iter_mut().enumerate() {
                    *p *= self.activation.derivative(zs[l - 1][j], acts[l][j]);
                }
                delta = prev;
            }
        }
    }

    fn mean_loss(&self, theta: &[f64], rows: impl ExactSizeIterator<Item = usize>) -> f64 {
        let n = rows.len() as f64;
        rows.map(|i| self.example_loss(theta, i)).sum::<f64>() / n
    }

    fn mean_grad(&self, theta: &[f64], rows: impl ExactSizeIterator<Item = usize>) -> Vec<f64> {
        let scale = 1.0 / rows.len() as f64;
        let mut g = vec![0.0; self.dim];
        for i in rows {
            self.accumulate_grad(theta, i, scale, &mut g);
        }
        g
    }

    fn predict(&self, theta: &[f64], i: usize) -> usize {
        let (_, acts) = self.forward(theta, self.data.row(i));
        let logits = acts.last().unwrap();
        (0..logits.len())
            .max_by(|&a, &b| logits[a].total_cmp(&logits[b]))
            .unwrap()
    }
}

impl Problem for TinyMlp {
    fn name(&self) -> &str {
        "tiny_mlp"
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn loss(&self, theta: &[f64]) -> f64 {
        self.mean_loss(theta, self.data.train_range())
    }

    fn grad(&self, theta: &[f64]) -> Vec<f64> {
        self.mean_grad(theta, self.data.train_range())
    }

    fn batch_loss(&self, theta: &[f64], batch: &[usize]) -> f64 {
        self.mean_loss(theta, batch.iter().copied())
    }

    fn batch_grad(&self, theta: &[f64], batch: &[usize]) -> Vec<f64> {
        self.mean_grad(theta, batch.iter().copied())
    }

    fn test_metric(&self, theta: &[f64]) -> Option<f64> {
        let rows = if self.data.n_test() > 0 {
            self.data.test_range()
        } else {
            self.data.train_range()
        };
        let n = rows.len() as f64;
        let correct = rows.filter(|&i| self.predict(theta, i) == self.labels[i]).count();
        Some(correct as f64 / n)
    }

    fn dataset(&self) -> Option<&Dataset> {
        Some(&self.data)
    }

    /// Weights uniform on `±1/√fan_in`, zero biases.
    fn initial_point(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let mut theta = vec![0.0; self.dim];
        for (l, w) in self.layers.windows(2).enumerate() {
            let bound = 1.0 / (w[0] as f64).sqrt();
            let off = self.offsets[l];
            for x in &mut theta[off..off + w[0] * w[1]] {
                *x = rng.random_range(-bound..bound);
            }
        }
        theta
    }
}
