use rand_chacha::ChaCha8Rng;

use super::Problem;
use crate::error::{Error, Result};

/// `J(θ) = ½ Σ h_i θ_i²` with a positive diagonal spectrum `h`.
#[derive(Debug, Clone, PartialEq)]
pub struct Quadratic {
    spectrum: Vec<f64>,
}

impl Quadratic {
    pub fn new(spectrum: Vec<f64>) -> Result<Self> {
        if spectrum.is_empty() {
            return Err(Error::contract("quadratic spectrum is empty"));
        }
        if let Some(h) = spectrum.iter().find(|h| !(**h > 0.0) || !h.is_finite()) {
            return Err(Error::contract(format!(
                "quadratic spectrum must be positive definite, found eigenvalue {h}"
            )));
        }
        Ok(Self { spectrum })
    }

    pub fn spectrum(&self) -> &[f64] {
        &self.spectrum
    }
}

impl Problem for Quadratic {
    fn name(&self) -> &str {
        "quadratic"
    }

    fn dim(&self) -> usize {
        self.spectrum.len()
    }

    fn loss(&self, theta: &[f64]) -> f64 {
        0.5 * self
            .spectrum
            .iter()
            .zip(theta)
            .map(|(h, x)| h * x * x)
            .sum::<f64>()
    }

    fn grad(&self, theta: &[f64]) -> Vec<f64> {
        self.spectrum.iter().zip(theta).map(|(h, x)| h * x).collect()
    }

    fn initial_point(&self, _rng: &mut ChaCha8Rng) -> Vec<f64> {
        vec![1.0; self.dim()]
    }
}
