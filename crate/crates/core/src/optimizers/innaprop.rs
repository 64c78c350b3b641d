//! INNAprop in its memory-reduced form over `(θ, ψ, v)`.
//!
//! One step with gradient `g` taken at the current `θ` and step size `γ < β`:
//!
//! ```text
//! θ ← (1 − λγ)θ                                   decoupled weight decay
//! v ← σv + (1 − σ)g²
//! v̂ ← v / (1 − σ^k)                               k = 1, 2, ... (optional)
//! ψ ← (1 − γ/β)ψ + γ(1/β − α)θ
//! θ ← (1 + γ(1 − αβ)/(β − γ))θ − γ/(β − γ)·ψ − γβ·g/(√v̂ + ε)
//! ```
//!
//! Starting from `ψ0 = (1 − αβ)θ0` makes every critical point a fixed point.

use serde::{Deserialize, Serialize};

use super::{check_finite, check_gamma_below_beta, coef};
use crate::error::{Error, Result};
use crate::numerics::{clip_in_place, ParamVector, Real};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InnapropConfig {
    pub alpha: f64,
    pub beta: f64,
    pub sigma: f64,
    pub epsilon: f64,
    pub weight_decay: f64,
    pub bias_correction: bool,
    pub grad_clip: Option<f64>,
}

impl Default for InnapropConfig {
    fn default() -> Self {
        Self {
            alpha: 0.1,
            beta: 0.9,
            sigma: 0.999,
            epsilon: 1e-8,
            weight_decay: 0.01,
            bias_correction: true,
            grad_clip: None,
        }
    }
}

impl InnapropConfig {
    pub fn new(alpha: f64, beta: f64) -> Self {
        Self {
            alpha,
            beta,
            ..Default::default()
        }
    }

    /// The constant-step, undecayed, uncorrected variant.
    pub fn plain(alpha: f64, beta: f64, sigma: f64, epsilon: f64) -> Self {
        Self {
            alpha,
            beta,
            sigma,
            epsilon,
            weight_decay: 0.0,
            bias_correction: false,
            grad_clip: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha >= 0.0) || !self.alpha.is_finite() {
            return Err(Error::contract(format!("alpha must be >= 0, got {}", self.alpha)));
        }
        if !(self.beta > 0.0) || !self.beta.is_finite() {
            return Err(Error::contract(format!("beta must be > 0, got {}", self.beta)));
        }
        if !(0.0..=1.0).contains(&self.sigma) {
            return Err(Error::contract(format!("sigma must lie in [0, 1], got {}", self.sigma)));
        }
        if !(self.epsilon >= 0.0) {
            return Err(Error::contract(format!("epsilon must be >= 0, got {}", self.epsilon)));
        }
        if !(self.weight_decay >= 0.0) {
            return Err(Error::contract(format!(
                "weight decay must be >= 0, got {}",
                self.weight_decay
            )));
        }
        if let Some(c) = self.grad_clip {
            if !(c > 0.0) {
                return Err(Error::contract(format!("grad_clip must be positive, got {c}")));
            }
        }
        Ok(())
    }
}

/// `(θ, ψ, v)` plus the number of steps taken.
#[derive(Debug, Clone, PartialEq)]
pub struct InnapropState<T: Real = f64> {
    pub theta: ParamVector<T>,
    pub psi: ParamVector<T>,
    pub v: ParamVector<T>,
    pub k: u64,
}

impl<T: Real> InnapropState<T> {
    /// `v0 = 0`, `ψ0 = (1 − αβ)θ0`.
    pub fn init(config: &InnapropConfig, theta0: ParamVector<T>) -> Result<Self> {
        config.validate()?;
        let c: T = coef(1.0 - config.alpha * config.beta);
        let psi = ParamVector::new(theta0.iter().map(|&x| c * x).collect());
        Ok(Self {
            v: ParamVector::zeros(theta0.dim()),
            psi,
            theta: theta0,
            k: 0,
        })
    }

    /// One step of the deep-learning form: optional clipping, decoupled decay
    /// and bias correction as configured.
    pub fn step(mut self, g: &ParamVector<T>, gamma: f64, config: &InnapropConfig) -> Result<Self> {
        self.theta.check_dim(g)?;
        check_gamma_below_beta(gamma, config.beta)?;

        let clipped;
        let g = match config.grad_clip {
            Some(c) => {
                let mut owned = g.clone();
                clip_in_place(&mut owned, c);
                clipped = owned;
                &clipped
            }
            None => g,
        };

        let k = self.k + 1;
        let (alpha, beta) = (config.alpha, config.beta);
        let decay: T = coef(1.0 - config.weight_decay * gamma);
        let sigma: T = coef(config.sigma);
        let one_minus_sigma: T = coef(1.0 - config.sigma);
        let corrector: Option<T> = config
            .bias_correction
            .then(|| coef(1.0 - config.sigma.powf(k as f64)));
        // (1 − γ/β)ψ + γ(1/β − α)θ   == ψ + (γ/β)((1 − αβ)θ − ψ)
        // (1 + γ(1 − αβ)/(β − γ))θ − γ/(β − γ)·ψ == θ + γ/(β − γ)·((1 − αβ)θ − ψ)
        // Written as differences, ψ = (1 − αβ)θ cancels exactly.
        let anchor: T = coef(1.0 - alpha * beta);
        let psi_rate: T = coef(gamma / beta);
        let theta_rate: T = coef(gamma / (beta - gamma));
        let theta_grad: T = coef(gamma * beta);
        let eps: T = coef(config.epsilon);
        let apply_decay = config.weight_decay != 0.0;

        let theta = self.theta.as_mut_slice();
        let psi = self.psi.as_mut_slice();
        let v = self.v.as_mut_slice();
        for i in 0..theta.len() {
            let gi = g[i];
            if apply_decay {
                theta[i] = decay * theta[i];
            }
            v[i] = sigma * v[i] + one_minus_sigma * (gi * gi);
            let v_hat = match corrector {
                Some(c) => v[i] / c,
                None => v[i],
            };
            psi[i] = psi[i] + psi_rate * (anchor * theta[i] - psi[i]);
            theta[i] = theta[i] + theta_rate * (anchor * theta[i] - psi[i]) - theta_grad * (gi / (v_hat.sqrt() + eps));
        }
        self.k = k;
        check_finite(k, [&self.theta, &self.psi, &self.v])?;
        Ok(self)
    }

    /// Constant-step form: no weight decay, no bias correction, no clipping.
    pub fn plain_step(self, g: &ParamVector<T>, gamma: f64, config: &InnapropConfig) -> Result<Self> {
        let plain = InnapropConfig {
            weight_decay: 0.0,
            bias_correction: false,
            grad_clip: None,
            ..*config
        };
        self.step(g, gamma, &plain)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pv(x: &[f64]) -> ParamVector {
        ParamVector::new(x.to_vec())
    }

    #[test]
    fn init_examples() {
        let s = InnapropState::init(&InnapropConfig::new(1.0, 1.0), pv(&[5.0, -3.0])).unwrap();
        assert_eq!(s.psi.as_slice(), &[0.0, -0.0]);
        assert_eq!(s.v.as_slice(), &[0.0, 0.0]);
        let s = InnapropState::init(&InnapropConfig::new(0.1, 0.9), pv(&[1.0])).unwrap();
        assert!((s.psi[0] - 0.91).abs() < 1e-15);
        let s = InnapropState::init(&InnapropConfig::new(2.0, 2.0), pv(&[1.0, 1.0])).unwrap();
        assert_eq!(s.psi.as_slice(), &[-3.0, -3.0]);
        assert_eq!(s.k, 0);
    }

    #[test]
    fn first_step_is_signed_step_when_alpha_beta_one() {
        let cfg = InnapropConfig {
            epsilon: 0.0,
            weight_decay: 0.0,
            ..InnapropConfig::new(1.0, 1.0)
        };
        let s = InnapropState::init(&cfg, pv(&[1.0])).unwrap();
        let s = s.step(&pv(&[2.0]), 0.1, &cfg).unwrap();
        assert!((s.theta[0] - 0.9).abs() < 1e-15);
        assert_eq!(s.k, 1);
    }

    #[test]
    fn plain_first_step_uses_raw_v() {
        let cfg = InnapropConfig::plain(1.0, 1.0, 0.999, 0.0);
        let s = InnapropState::init(&cfg, pv(&[1.0])).unwrap();
        let s = s.plain_step(&pv(&[2.0]), 0.1, &cfg).unwrap();
        let expected = 1.0 - 0.1 * 2.0 / 0.004f64.sqrt();
        assert!((s.theta[0] - expected).abs() < 1e-14);
    }

    #[test]
    fn plain_step_matches_step_without_decay_or_correction() {
        let cfg = InnapropConfig::new(0.3, 1.7);
        let off = InnapropConfig {
            weight_decay: 0.0,
            bias_correction: false,
            ..cfg
        };
        let mut a = InnapropState::init(&cfg, pv(&[0.4, -1.1, 2.0])).unwrap();
        let mut b = a.clone();
        for k in 0..20 {
            let g = pv(&[(k as f64).sin(), 0.3 - k as f64 * 0.01, 1.0]);
            a = a.plain_step(&g, 0.05, &cfg).unwrap();
            b = b.step(&g, 0.05, &off).unwrap();
        }
        assert_eq!(a, b);
    }

    #[test]
    fn zero_gradient_keeps_init_fixed() {
        for (alpha, beta, gamma) in [(0.1, 0.9, 0.01), (2.0, 2.0, 0.5), (4.0, 0.5, 0.3)] {
            let cfg = InnapropConfig {
                weight_decay: 0.0,
                ..InnapropConfig::new(alpha, beta)
            };
            let theta0 = pv(&[1.0, -2.5, 0.3]);
            let mut s = InnapropState::init(&cfg, theta0.clone()).unwrap();
            for _ in 0..50 {
                s = s.step(&ParamVector::zeros(3), gamma, &cfg).unwrap();
            }
            assert_eq!(s.theta, theta0);
        }
    }

    #[test]
    fn ill_posed_step_is_rejected() {
        let cfg = InnapropConfig::new(0.1, 0.9);
        let s = InnapropState::init(&cfg, pv(&[1.0])).unwrap();
        assert!(matches!(
            s.clone().step(&pv(&[1.0]), 0.9, &cfg),
            Err(Error::WellPosedness { .. })
        ));
        assert!(matches!(s.step(&pv(&[1.0, 2.0]), 0.1, &cfg), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn divergence_reports_step() {
        let cfg = InnapropConfig::new(0.1, 0.9);
        let s = InnapropState::init(&cfg, pv(&[1.0])).unwrap();
        let s = s.step(&pv(&[1.0]), 0.1, &cfg).unwrap();
        match s.step(&pv(&[f64::NAN]), 0.1, &cfg) {
            Err(Error::Divergence { step }) => assert_eq!(step, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn clipping_caps_the_gradient() {
        let cfg = InnapropConfig {
            grad_clip: Some(1.0),
            ..InnapropConfig::new(0.1, 0.9)
        };
        let unclipped = InnapropConfig {
            grad_clip: None,
            ..cfg
        };
        let s = InnapropState::init(&cfg, pv(&[1.0, 1.0])).unwrap();
        let a = s.clone().step(&pv(&[30.0, 40.0]), 0.01, &cfg).unwrap();
        let b = s.step(&pv(&[0.6, 0.8]), 0.01, &unclipped).unwrap();
        for i in 0..2 {
            assert!((a.theta[i] - b.theta[i]).abs() < 1e-15);
            assert!((a.v[i] - b.v[i]).abs() < 1e-15);
        }
    }
}
