//! Momentum form of INNAprop with `a = 1 − αγ`, `b = βγ`, `c = γ(β − γ)`.
//!
//! Direct form, carrying the previous normalized gradient:
//!
//! ```text
//! m_{k+1} = a·m_k + γ²R_{k−1} + βγ(R_k − R_{k−1}),   θ_{k+1} = θ_k − m_{k+1}
//! ```
//!
//! Reduced form, one buffer fewer:
//!
//! ```text
//! m̃_{k+1} = a·m̃_k + γ²(1 − αβ)/a · R_k,   θ_{k+1} = θ_k − m̃_{k+1} − (c/a)·R_k
//! ```
//!
//! Both start from a zero buffer and `R_{−1} = 0`.

use serde::{Deserialize, Serialize};

use super::{check_finite, coef, InnapropConfig};
use crate::error::{Error, Result};
use crate::numerics::{ParamVector, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentumForm {
    Direct,
    #[default]
    Reduced,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MomentumBuffer<T: Real = f64> {
    Direct { m: ParamVector<T>, rms_prev: ParamVector<T> },
    Reduced { m_tilde: ParamVector<T> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentumVariantState<T: Real = f64> {
    pub theta: ParamVector<T>,
    pub v: ParamVector<T>,
    pub buffer: MomentumBuffer<T>,
    pub k: u64,
}

impl<T: Real> MomentumVariantState<T> {
    pub fn init(config: &InnapropConfig, theta0: ParamVector<T>, form: MomentumForm) -> Result<Self> {
        config.validate()?;
        let n = theta0.dim();
        let buffer = match form {
            MomentumForm::Direct => MomentumBuffer::Direct {
                m: ParamVector::zeros(n),
                rms_prev: ParamVector::zeros(n),
            },
            MomentumForm::Reduced => MomentumBuffer::Reduced {
                m_tilde: ParamVector::zeros(n),
            },
        };
        Ok(Self {
            theta: theta0,
            v: ParamVector::zeros(n),
            buffer,
            k: 0,
        })
    }

    pub fn form(&self) -> MomentumForm {
        match self.buffer {
            MomentumBuffer::Direct { .. } => MomentumForm::Direct,
            MomentumBuffer::Reduced { .. } => MomentumForm::Reduced,
        }
    }

    pub fn step(mut self, g: &ParamVector<T>, gamma: f64, config: &InnapropConfig) -> Result<Self> {
        self.theta.check_dim(g)?;
        if !(gamma >= 0.0) || !gamma.is_finite() {
            return Err(Error::contract(format!("step size must be finite and >= 0, got {gamma}")));
        }
        let a = 1.0 - config.alpha * gamma;
        if a == 0.0 {
            return Err(Error::SingularCoefficient {
                alpha: config.alpha,
                gamma,
            });
        }
        let sigma: T = coef(config.sigma);
        let one_minus_sigma: T = coef(1.0 - config.sigma);
        let eps: T = coef(config.epsilon);

        let theta = self.theta.as_mut_slice();
        let v = self.v.as_mut_slice();
        let mut rms = |i: usize| {
            v[i] = sigma * v[i] + one_minus_sigma * (g[i] * g[i]);
            g[i] / (v[i].sqrt() + eps)
        };
        match &mut self.buffer {
            MomentumBuffer::Direct { m, rms_prev } => {
                let keep: T = coef(a);
                let lag: T = coef(gamma * gamma);
                let damping: T = coef(config.beta * gamma);
                let (m, rms_prev) = (m.as_mut_slice(), rms_prev.as_mut_slice());
                for i in 0..theta.len() {
                    let r = rms(i);
                    m[i] = keep * m[i] + lag * rms_prev[i] + damping * (r - rms_prev[i]);
                    theta[i] -= m[i];
                    rms_prev[i] = r;
                }
            }
            MomentumBuffer::Reduced { m_tilde } => {
                let keep: T = coef(a);
                let feed: T = coef(gamma * gamma * (1.0 - config.alpha * config.beta) / a);
                let direct: T = coef(gamma * (config.beta - gamma) / a);
                let m = m_tilde.as_mut_slice();
                for i in 0..theta.len() {
                    let r = rms(i);
                    m[i] = keep * m[i] + feed * r;
                    theta[i] = theta[i] - m[i] - direct * r;
                }
            }
        }
        self.k += 1;
        let buffer = match &self.buffer {
            MomentumBuffer::Direct { m, .. } => m,
            MomentumBuffer::Reduced { m_tilde } => m_tilde,
        };
        check_finite(self.k, [&self.theta, &self.v, buffer])?;
        Ok(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn direct_and_reduced_forms_agree() {
        let cfg = InnapropConfig::plain(0.4, 1.2, 0.95, 1e-8);
        let theta0 = ParamVector::new(vec![1.0, -2.0, 0.5]);
        let mut d = MomentumVariantState::init(&cfg, theta0.clone(), MomentumForm::Direct).unwrap();
        let mut r = MomentumVariantState::init(&cfg, theta0, MomentumForm::Reduced).unwrap();
        for k in 0..200 {
            let g = ParamVector::new(vec![(k as f64 * 0.1).cos(), 1.0 / (1.0 + k as f64), -0.2]);
            d = d.step(&g, 0.02, &cfg).unwrap();
            r = r.step(&g, 0.02, &cfg).unwrap();
        }
        for i in 0..3 {
            let scale = r.theta[i].abs().max(1.0);
            assert!((d.theta[i] - r.theta[i]).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn singular_coefficient_is_rejected() {
        let cfg = InnapropConfig::plain(2.0, 1.0, 0.9, 1e-8);
        let s = MomentumVariantState::init(&cfg, ParamVector::new(vec![1.0]), MomentumForm::Reduced).unwrap();
        assert!(matches!(
            s.step(&ParamVector::new(vec![1.0]), 0.5, &cfg),
            Err(Error::SingularCoefficient { .. })
        ));
    }
}
