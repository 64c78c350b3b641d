use rand_chacha::ChaCha8Rng;

use super::Problem;
use crate::error::{Error, Result};

/// Chained Rosenbrock function
/// `Σ_{i<p-1} 100(θ_{i+1} − θ_i²)² + (1 − θ_i)²`, minimized at all ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rosenbrock {
    dim: usize,
}

impl Rosenbrock {
    pub fn new(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::contract(format!("rosenbrock needs dimension >= 2, got {dim}")));
        }
        Ok(Self { dim })
    }
}

impl Problem for Rosenbrock {
    fn name(&self) -> &str {
        "rosenbrock"
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn loss(&self, theta: &[f64]) -> f64 {
        theta
            .windows(2)
            .map(|w| {
                let a = w[1] - w[0] * w[0];
                let b = 1.0 - w[0];
                100.0 * a * a + b * b
            })
            .sum()
    }

    fn grad(&self, theta: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; theta.len()];
        for i in 0..theta.len() - 1 {
            let a = theta[i + 1] - theta[i] * theta[i];
            g[i] += -400.0 * theta[i] * a - 2.0 * (1.0 - theta[i]);
            g[i + 1] += 200.0 * a;
        }
        g
    }

    /// The classical start `(-1.2, 1, -1.2, 1, ...)`.
    fn initial_point(&self, _rng: &mut ChaCha8Rng) -> Vec<f64> {
        (0..self.dim).map(|i| if i % 2 == 0 { -1.2 } else { 1.0 }).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::RngStream;
    use rand::Rng;

    #[test]
    fn minimum_at_ones() {
        let r = Rosenbrock::new(2).unwrap();
        assert_eq!(r.loss(&[1.0, 1.0]), 0.0);
        assert_eq!(r.grad(&[1.0, 1.0]), vec![0.0, 0.0]);
    }

    #[test]
    fn nonnegative_with_no_other_zero() {
        let r = Rosenbrock::new(2).unwrap();
        let mut rng = RngStream::new(2024, 0).generator();
        for _ in 0..1_000_000 {
            let x = [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)];
            let l = r.loss(&x);
            assert!(l >= 0.0);
            if l == 0.0 {
                assert_eq!(x, [1.0, 1.0]);
            }
        }
    }
}
