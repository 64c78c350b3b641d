use rand_chacha::ChaCha8Rng;

use super::{Dataset, Labels, Problem};
use crate::error::{Error, Result};

/// Linear least squares `½ mean (wᵀx + b − y)²` with `θ = [w, b]`: a quadratic
/// whose curvature comes from the data, so minibatches make it noisy.
#[derive(Debug, Clone)]
pub struct LeastSquares {
    data: Dataset,
    targets: Vec<f64>,
}

impl LeastSquares {
    pub fn new(data: Dataset) -> Result<Self> {
        let targets = match data.labels() {
            Labels::Real(v) => v.clone(),
            Labels::Class(v) => v.iter().map(|&y| y as f64).collect(),
        };
        if data.n_train() == 0 {
            return Err(Error::contract("least squares needs training rows"));
        }
        Ok(Self { data, targets })
    }

    fn residual(&self, theta: &[f64], i: usize) -> f64 {
        let d = self.data.width();
        let x = self.data.row(i);
        theta[..d].iter().zip(x).map(|(w, x)| w * x).sum::<f64>() + theta[d] - self.targets[i]
    }

    fn mean_loss(&self, theta: &[f64], rows: impl ExactSizeIterator<Item = usize>) -> f64 {
        let n = rows.len() as f64;
        rows.map(|i| 0.5 * self.residual(theta, i).powi(2)).sum::<f64>() / n
    }

    fn mean_grad(&self, theta: &[f64], rows: impl ExactSizeIterator<Item = usize>) -> Vec<f64> {
        let d = self.data.width();
        let n = rows.len() as f64;
        let mut g = vec![0.0; d + 1];
        for i in rows {
            let r = self.residual(theta, i);
            for (gj, xj) in g[..d].iter_mut().zip(self.data.row(i)) {
                *gj += r * xj;
            }
            g[d] += r;
        }
        g.iter_mut().for_each(|x| *x /= n);
        g
    }
}

impl Problem for LeastSquares {
    fn name(&self) -> &str {
        "least_squares"
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

    /// Coefficient of determination `R²` on the test split (training split when empty).
    fn test_metric(&self, theta: &[f64]) -> Option<f64> {
        let rows: Vec<usize> = if self.data.n_test() > 0 {
            self.data.test_range().collect()
        } else {
            self.data.train_range().collect()
        };
        let mean = rows.iter().map(|&i| self.targets[i]).sum::<f64>() / rows.len() as f64;
        let total: f64 = rows.iter().map(|&i| (self.targets[i] - mean).powi(2)).sum();
        let resid: f64 = rows.iter().map(|&i| self.residual(theta, i).powi(2)).sum();
        Some(if total > 0.0 { 1.0 - resid / total } else { f64::from(resid == 0.0) })
    }

    fn dataset(&self) -> Option<&Dataset> {
        Some(&self.data)
    }

    fn initial_point(&self, _rng: &mut ChaCha8Rng) -> Vec<f64> {
        vec![0.0; self.dim()]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{generate_synthetic, SyntheticKind, SyntheticSpec};

    #[test]
    fn dimensions_and_metric_range() {
        let spec = SyntheticSpec::new(SyntheticKind::LinearRegression, 50, 3);
        let p = LeastSquares::new(generate_synthetic(&spec).unwrap()).unwrap();
        assert!(p.loss(&[0.0; 4]) > 0.0);
        assert_eq!(p.dim(), 4);
        assert!(p.test_metric(&[0.0; 4]).unwrap() <= 1.0);
    }
}
