//! The second-order recursion INNAprop comes from, kept in its original
//! six-slot form over `θ_{k−1}, θ_k, g_{k−1}, g_k, v_k, v_{k+1}`:
//!
//! ```text
//! v_{k+1} = σv_k + (1 − σ)g_k²
//! R_k     = g_k / (√v_{k+1} + ε)
//! θ_{k+1} = θ_k + (1 − αγ)(θ_k − θ_{k−1}) − βγ(R_k − R_{k−1}) − γ²R_{k−1}
//! ```
//!
//! Used as a reference for the memory-reduced form with a constant step.

use super::{check_finite, check_gamma_below_beta, coef, InnapropConfig};
use crate::error::Result;
use crate::numerics::{ParamVector, Real};

#[derive(Debug, Clone, PartialEq)]
pub struct NaiveInnapropState<T: Real = f64> {
    pub theta_prev: ParamVector<T>,
    pub theta_curr: ParamVector<T>,
    pub g_prev: ParamVector<T>,
    /// `v_k`, the second moment that normalized `g_prev`.
    pub v_curr: ParamVector<T>,
    pub k: u64,
}

impl<T: Real> NaiveInnapropState<T> {
    /// First step from `θ0` with `v0 = 0`: `θ1 = θ0 − γβ·g0/(√v1 + ε)`.
    pub fn bootstrap(config: &InnapropConfig, theta0: ParamVector<T>, g0: &ParamVector<T>, gamma: f64) -> Result<Self> {
        config.validate()?;
        theta0.check_dim(g0)?;
        check_gamma_below_beta(gamma, config.beta)?;
        let one_minus_sigma: T = coef(1.0 - config.sigma);
        let step: T = coef(gamma * config.beta);
        let eps: T = coef(config.epsilon);

        let v1: Vec<T> = g0.iter().map(|&g| one_minus_sigma * (g * g)).collect();
        let theta1: Vec<T> = theta0
            .iter()
            .zip(g0)
            .zip(&v1)
            .map(|((&t, &g), &v)| t - step * (g / (v.sqrt() + eps)))
            .collect();
        let state = Self {
            theta_prev: theta0,
            theta_curr: theta1.into(),
            g_prev: g0.clone(),
            v_curr: v1.into(),
            k: 1,
        };
        check_finite(1, [&state.theta_curr, &state.v_curr])?;
        Ok(state)
    }

    pub fn theta(&self) -> &ParamVector<T> {
        &self.theta_curr
    }

    /// Consumes `g_k` taken at `θ_k` and produces `θ_{k+1}`.
    pub fn step(self, g: &ParamVector<T>, gamma: f64, config: &InnapropConfig) -> Result<Self> {
        self.theta_curr.check_dim(g)?;
        check_gamma_below_beta(gamma, config.beta)?;
        let sigma: T = coef(config.sigma);
        let one_minus_sigma: T = coef(1.0 - config.sigma);
        let inertia: T = coef(1.0 - config.alpha * gamma);
        let damping: T = coef(config.beta * gamma);
        let gamma_sq: T = coef(gamma * gamma);
        let eps: T = coef(config.epsilon);

        let n = g.dim();
        let mut theta_next = Vec::with_capacity(n);
        let mut v_next = Vec::with_capacity(n);
        for i in 0..n {
            let v_new = sigma * self.v_curr[i] + one_minus_sigma * (g[i] * g[i]);
            let r_curr = g[i] / (v_new.sqrt() + eps);
            let r_prev = self.g_prev[i] / (self.v_curr[i].sqrt() + eps);
            let t = self.theta_curr[i];
            theta_next.push(
                t + inertia * (t - self.theta_prev[i]) - damping * (r_curr - r_prev) - gamma_sq * r_prev,
            );
            v_next.push(v_new);
        }
        let k = self.k + 1;
        let next = Self {
            theta_prev: self.theta_curr,
            theta_curr: theta_next.into(),
            g_prev: g.clone(),
            v_curr: v_next.into(),
            k,
        };
        check_finite(k, [&next.theta_curr, &next.v_curr])?;
        Ok(next)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimizers::InnapropState;

    #[test]
    fn bootstrap_matches_plain_first_step() {
        let cfg = InnapropConfig::plain(0.5, 1.5, 0.9, 1e-8);
        let theta0: ParamVector = ParamVector::new(vec![1.0, -0.5]);
        let g0 = ParamVector::new(vec![0.3, 2.0]);
        let naive = NaiveInnapropState::bootstrap(&cfg, theta0.clone(), &g0, 0.01).unwrap();
        let reduced = InnapropState::init(&cfg, theta0).unwrap().plain_step(&g0, 0.01, &cfg).unwrap();
        for i in 0..2 {
            assert!((naive.theta_curr[i] - reduced.theta[i]).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_gradient_stays_put() {
        let cfg = InnapropConfig::plain(0.5, 1.5, 0.9, 1e-8);
        let theta0 = ParamVector::new(vec![1.0, -0.5]);
        let zero = ParamVector::zeros(2);
        let mut s = NaiveInnapropState::bootstrap(&cfg, theta0.clone(), &zero, 0.1).unwrap();
        for _ in 0..10 {
            s = s.step(&zero, 0.1, &cfg).unwrap();
        }
        assert_eq!(s.theta_curr, theta0);
        assert_eq!(s.k, 11);
    }
}
