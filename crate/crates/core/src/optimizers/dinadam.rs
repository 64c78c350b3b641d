//! DINAdam: an Adam-like method whose first moment carries the Hessian
//! damping term as a gradient difference.
//!
//! Direct form:
//!
//! ```text
//! v_{k+1} = σ2·v_k + (1 − σ2)g_k²
//! m_{k+1} = σ1·m_k + (1 − σ1)g_k + βασ1(g_k − g_{k−1})
//! θ_{k+1} = θ_k − η·m_{k+1}/(√v_{k+1} + ε)
//! ```
//!
//! Substituting `m = m̃ + αβg` removes `g_{k−1}`:
//!
//! ```text
//! m̃_{k+1} = σ1·m̃_k + (1 − σ1 + βασ1 − βα)g_k
//! θ_{k+1} = θ_k − η(m̃_{k+1} + αβg_k)/(√v_{k+1} + ε)
//! ```
//!
//! With `α = 1, β = 0` both reduce to Adam without bias correction.

use serde::{Deserialize, Serialize};

use super::{check_finite, coef};
use crate::error::{Error, Result};
use crate::numerics::{ParamVector, Real};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DinadamConfig {
    pub alpha: f64,
    pub beta: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    pub epsilon: f64,
}

impl Default for DinadamConfig {
    fn default() -> Self {
        Self {
            alpha: 0.1,
            beta: 0.9,
            sigma1: 0.9,
            sigma2: 0.999,
            epsilon: 1e-8,
        }
    }
}

impl DinadamConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, x) in [("sigma1", self.sigma1), ("sigma2", self.sigma2)] {
            if !(0.0..=1.0).contains(&x) {
                return Err(Error::contract(format!("{name} must lie in [0, 1], got {x}")));
            }
        }
        if !(self.alpha >= 0.0) || !(self.beta >= 0.0) || !(self.epsilon >= 0.0) {
            return Err(Error::contract("alpha, beta and epsilon must be >= 0"));
        }
        Ok(())
    }
}

/// Reduced form over `(θ, m̃, v)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DinadamState<T: Real = f64> {
    pub theta: ParamVector<T>,
    pub m_tilde: ParamVector<T>,
    pub v: ParamVector<T>,
    pub k: u64,
}

impl<T: Real> DinadamState<T> {
    pub fn init(config: &DinadamConfig, theta0: ParamVector<T>) -> Result<Self> {
        config.validate()?;
        let n = theta0.dim();
        Ok(Self {
            theta: theta0,
            m_tilde: ParamVector::zeros(n),
            v: ParamVector::zeros(n),
            k: 0,
        })
    }

    pub fn step(mut self, g: &ParamVector<T>, eta: f64, config: &DinadamConfig) -> Result<Self> {
        self.theta.check_dim(g)?;
        let ab = config.beta * config.alpha;
        let s1: T = coef(config.sigma1);
        let feed: T = coef(1.0 - config.sigma1 + ab * config.sigma1 - ab);
        let s2: T = coef(config.sigma2);
        let one_minus_s2: T = coef(1.0 - config.sigma2);
        let lift: T = coef(ab);
        let eta: T = coef(eta);
        let eps: T = coef(config.epsilon);

        let theta = self.theta.as_mut_slice();
        let m = self.m_tilde.as_mut_slice();
        let v = self.v.as_mut_slice();
        for i in 0..theta.len() {
            let gi = g[i];
            v[i] = s2 * v[i] + one_minus_s2 * (gi * gi);
            m[i] = s1 * m[i] + feed * gi;
            theta[i] -= eta * ((m[i] + lift * gi) / (v[i].sqrt() + eps));
        }
        self.k += 1;
        check_finite(self.k, [&self.theta, &self.m_tilde, &self.v])?;
        Ok(self)
    }
}

/// Direct form over `(θ, m, g_{k−1}, v)`, with `g_{−1} = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct DinadamDirectState<T: Real = f64> {
    pub theta: ParamVector<T>,
    pub m: ParamVector<T>,
    pub g_prev: ParamVector<T>,
    pub v: ParamVector<T>,
    pub k: u64,
}

impl<T: Real> DinadamDirectState<T> {
    pub fn init(config: &DinadamConfig, theta0: ParamVector<T>) -> Result<Self> {
        config.validate()?;
        let n = theta0.dim();
        Ok(Self {
            theta: theta0,
            m: ParamVector::zeros(n),
            g_prev: ParamVector::zeros(n),
            v: ParamVector::zeros(n),
            k: 0,
        })
    }

    pub fn step(mut self, g: &ParamVector<T>, eta: f64, config: &DinadamConfig) -> Result<Self> {
        self.theta.check_dim(g)?;
        let s1: T = coef(config.sigma1);
        let one_minus_s1: T = coef(1.0 - config.sigma1);
        let damping: T = coef(config.beta * config.alpha * config.sigma1);
        let s2: T = coef(config.sigma2);
        let one_minus_s2: T = coef(1.0 - config.sigma2);
        let eta: T = coef(eta);
        let eps: T = coef(config.epsilon);

        let theta = self.theta.as_mut_slice();
        let m = self.m.as_mut_slice();
        let v = self.v.as_mut_slice();
        let g_prev = self.g_prev.as_mut_slice();
        for i in 0..theta.len() {
            let gi = g[i];
            v[i] = s2 * v[i] + one_minus_s2 * (gi * gi);
            m[i] = s1 * m[i] + one_minus_s1 * gi + damping * (gi - g_prev[i]);
            theta[i] -= eta * (m[i] / (v[i].sqrt() + eps));
            g_prev[i] = gi;
        }
        self.k += 1;
        check_finite(self.k, [&self.theta, &self.m, &self.v])?;
        Ok(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn direct_and_reduced_forms_agree() {
        let cfg = DinadamConfig {
            alpha: 0.5,
            beta: 1.5,
            ..Default::default()
        };
        let theta0 = ParamVector::new(vec![0.7, -1.3]);
        let mut r = DinadamState::init(&cfg, theta0.clone()).unwrap();
        let mut d = DinadamDirectState::init(&cfg, theta0).unwrap();
        for k in 0..300 {
            let g = ParamVector::new(vec![(k as f64 * 0.37).sin(), 0.5 - (k % 7) as f64 * 0.1]);
            r = r.step(&g, 1e-3, &cfg).unwrap();
            d = d.step(&g, 1e-3, &cfg).unwrap();
        }
        for i in 0..2 {
            assert!((r.theta[i] - d.theta[i]).abs() <= 1e-12);
        }
    }

    #[test]
    fn first_step_is_normalized() {
        // m̃1 + αβg0 = (1 − σ1 + αβσ1)g0 and √v1 = √(1 − σ2)|g0|
        let cfg = DinadamConfig {
            epsilon: 0.0,
            ..Default::default()
        };
        let s = DinadamState::init(&cfg, ParamVector::new(vec![0.0])).unwrap();
        let s = s.step(&ParamVector::new(vec![3.0]), 1.0, &cfg).unwrap();
        let expected = -(1.0 - 0.9 + 0.09 * 0.9) / (1.0f64 - 0.999).sqrt();
        assert!((s.theta[0] - expected).abs() < 1e-12);
    }
}
