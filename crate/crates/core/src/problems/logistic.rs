use rand_chacha::ChaCha8Rng;

use super::{Dataset, Labels, Problem};
use crate::error::{Error, Result};

/// Binary logistic regression with a bias term; `θ = [w, b]`.
#[derive(Debug, Clone)]
pub struct LogisticRegression {
    data: Dataset,
    labels: Vec<f64>,
}

impl LogisticRegression {
    pub fn new(data: Dataset) -> Result<Self> {
        let labels = match data.labels() {
            Labels::Class(v) if v.iter().all(|&y| y <= 1) => v.iter().map(|&y| y as f64).collect(),
            _ => return Err(Error::contract("logistic regression needs 0/1 class labels")),
        };
        if data.n_train() == 0 {
            return Err(Error::contract("logistic regression needs training rows"));
        }
        Ok(Self { data, labels })
    }

    fn logit(&self, theta: &[f64], i: usize) -> f64 {
        let d = self.data.width();
        let x = self.data.row(i);
        theta[..d].iter().zip(x).map(|(w, x)| w * x).sum::<f64>() + theta[d]
    }

    fn mean_loss(&self, theta: &[f64], rows: impl ExactSizeIterator<Item = usize>) -> f64 {
        let n = rows.len() as f64;
        rows.map(|i| {
            let z = self.logit(theta, i);
            // softplus(z) − y·z
            z.max(0.0) + (-z.abs()).exp().ln_1p() - self.labels[i] * z
        })
        .sum::<f64>()
            / n
    }

    fn mean_grad(&self, theta: &[f64], rows: impl ExactSizeIterator<Item = usize>) -> Vec<f64> {
        let d = self.data.width();
        let n = rows.len() as f64;
        let mut g = vec![0.0; d + 1];
        for i in rows {
            let r = sigmoid(self.logit(theta, i)) - self.labels[i];
            for (gj, xj) in g[..d].iter_mut().zip(self.data.row(i)) {
                *gj += r * xj;
            }
            g[d] += r;
        }
        g.iter_mut().for_each(|x| *x /= n);
        g
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

impl Problem for LogisticRegression {
    fn name(&self) -> &str {
        "logistic_regression"
    }

    fn dim(&self) -> usize {
        self.data.width() + 1
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

    /// Accuracy on the test split, or on the training split when there is no test data.
    fn test_metric(&self, theta: &[f64]) -> Option<f64> {
        let rows = if self.data.n_test() > 0 {
            self.data.test_range()
        } else {
            self.data.train_range()
        };
        let n = rows.len() as f64;
        let correct = rows
            .filter(|&i| (self.logit(theta, i) > 0.0) == (self.labels[i] == 1.0))
            .count();
        Some(correct as f64 / n)
    }

    fn dataset(&self) -> Option<&Dataset> {
        Some(&self.data)
    }

    fn initial_point(&self, _rng: &mut ChaCha8Rng) -> Vec<f64> {
        vec![0.0; self.dim()]
    }
}
