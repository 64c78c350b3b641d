//! Learning-rate schedules as pure functions of the step index.
//!
//! Four kinds are supported:
//!
//! - `constant`: `γ_k = γ0`
//! - `cosine`: `γ_min + ½(γ0 − γ_min)(1 + cos(kπ / T_max))`
//! - `cosine_warmup`: linear ramp `γ0·k/T_warmup` below `T_warmup`, a cosine
//!   decay from `γ0` to `γ_min` on `[T_warmup, T_decay]`, then `γ_min`
//! - `linear_warmup`: the same ramp, then `γ0·(1 − (k − T_warmup)/(T_max − T_warmup))`
//!
//! At `k = T_warmup` both branches give `γ0`; the post-warmup branch owns
//! that point. Schedules do not care whether `k` counts minibatches or epochs.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleKind {
    #[default]
    Constant,
    Cosine,
    CosineWarmup,
    LinearWarmup,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduleSpec {
    pub kind: ScheduleKind,
    pub gamma0: f64,
    pub gamma_min: f64,
    pub t_max: u64,
    pub t_warmup: u64,
    pub t_decay: u64,
}

impl ScheduleSpec {
    pub fn constant(gamma0: f64, t_max: u64) -> Self {
        Self {
            kind: ScheduleKind::Constant,
            gamma0,
            gamma_min: gamma0,
            t_max,
            t_warmup: 0,
            t_decay: t_max,
        }
    }

    pub fn cosine(gamma0: f64, gamma_min: f64, t_max: u64) -> Self {
        Self {
            kind: ScheduleKind::Cosine,
            gamma0,
            gamma_min,
            t_max,
            t_warmup: 0,
            t_decay: t_max,
        }
    }

    pub fn cosine_warmup(gamma0: f64, gamma_min: f64, t_warmup: u64, t_decay: u64, t_max: u64) -> Self {
        Self {
            kind: ScheduleKind::CosineWarmup,
            gamma0,
            gamma_min,
            t_max,
            t_warmup,
            t_decay,
        }
    }

    pub fn linear_warmup(gamma0: f64, t_warmup: u64, t_max: u64) -> Self {
        Self {
            kind: ScheduleKind::LinearWarmup,
            gamma0,
            gamma_min: 0.0,
            t_max,
            t_warmup,
            t_decay: t_max,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma0 > 0.0) || !self.gamma0.is_finite() {
            return Err(Error::contract(format!("gamma0 must be positive, got {}", self.gamma0)));
        }
        if !(self.gamma_min >= 0.0) || self.gamma_min > self.gamma0 {
            return Err(Error::contract(format!(
                "gamma_min must lie in [0, gamma0], got {}",
                self.gamma_min
            )));
        }
        if self.t_max == 0 {
            return Err(Error::contract("t_max must be positive"));
        }
        match self.kind {
            ScheduleKind::Constant | ScheduleKind::Cosine => {}
            ScheduleKind::CosineWarmup => {
                if self.t_warmup >= self.t_max {
                    return Err(Error::contract("t_warmup must be below t_max"));
                }
                if self.t_warmup > self.t_decay {
                    return Err(Error::contract("t_warmup must not exceed t_decay"));
                }
            }
            ScheduleKind::LinearWarmup => {
                if self.t_warmup >= self.t_max {
                    return Err(Error::contract("t_warmup must be below t_max"));
                }
            }
        }
        Ok(())
    }

    /// Learning rate at step `k`, for `0 <= k <= t_max`.
    pub fn lr_at(&self, k: u64) -> Result<f64> {
        self.validate()?;
        if k > self.t_max {
            return Err(Error::contract(format!(
                "step {k} outside the schedule domain [0, {}]",
                self.t_max
            )));
        }
        Ok(self.eval(k))
    }

    fn eval(&self, k: u64) -> f64 {
        match self.kind {
            ScheduleKind::Constant => self.gamma0,
            ScheduleKind::Cosine => self.cosine_branch(k, self.t_max),
            ScheduleKind::CosineWarmup => {
                if k < self.t_warmup {
                    ramp(self.gamma0, k, self.t_warmup)
                } else if k <= self.t_decay {
                    self.cosine_branch(k - self.t_warmup, self.t_decay - self.t_warmup)
                } else {
                    self.gamma_min
                }
            }
            ScheduleKind::LinearWarmup => {
                if k < self.t_warmup {
                    ramp(self.gamma0, k, self.t_warmup)
                } else {
                    // γ0·(1 − (k − Tw)/(Tmax − Tw)) == γ0·(Tmax − k)/(Tmax − Tw)
                    ramp(self.gamma0, self.t_max - k, self.t_max - self.t_warmup)
                }
            }
        }
    }

    fn cosine_branch(&self, k: u64, span: u64) -> f64 {
        if span == 0 {
            return self.gamma0;
        }
        let phase = (k as f64 / span as f64) * PI;
        self.gamma_min + 0.5 * (self.gamma0 - self.gamma_min) * (1.0 + phase.cos())
    }

    /// Largest rate emitted on `[0, k_max]`.
    pub fn sup_lr(&self, k_max: u64) -> Result<f64> {
        self.validate()?;
        let end = k_max.min(self.t_max);
        let sup = match self.kind {
            ScheduleKind::Constant | ScheduleKind::Cosine => self.eval(0),
            ScheduleKind::CosineWarmup | ScheduleKind::LinearWarmup => {
                if end >= self.t_warmup {
                    self.eval(self.t_warmup)
                } else {
                    self.eval(end)
                }
            }
        };
        Ok(sup)
    }

    /// True when every rate emitted on `[0, k_max]` is strictly below `beta`.
    pub fn stays_below(&self, beta: f64, k_max: u64) -> Result<bool> {
        Ok(self.sup_lr(k_max)? < beta)
    }
}

/// Correctly rounded `gamma0 * k / span`.
///
/// The product and the quotient are both carried with their exact rounding
/// residuals, so consecutive values differ by `gamma0 / span` to within one ulp.
fn ramp(gamma0: f64, k: u64, span: u64) -> f64 {
    let k = k as f64;
    let span = span as f64;
    let p = gamma0 * k;
    let p_err = gamma0.mul_add(k, -p);
    let q = p / span;
    let rem = (-q).mul_add(span, p);
    q + (rem + p_err) / span
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cosine_spot_values() {
        let s = ScheduleSpec::cosine(1e-3, 0.0, 200);
        assert_eq!(s.lr_at(0).unwrap(), 1e-3);
        assert_eq!(s.lr_at(200).unwrap(), 0.0);
        assert_eq!(s.lr_at(100).unwrap(), 5e-4);
    }

    #[test]
    fn warmup_spot_values() {
        let s = ScheduleSpec::cosine_warmup(1e-3, 0.0, 30, 300, 300);
        assert_eq!(s.lr_at(15).unwrap(), 1e-3 / 2.0);
        assert_eq!(s.lr_at(30).unwrap(), 1e-3);
        assert_eq!(s.lr_at(0).unwrap(), 0.0);

        let l = ScheduleSpec::linear_warmup(2e-4, 500, 10_000);
        assert_eq!(l.lr_at(10_000).unwrap(), 0.0);
        assert_eq!(l.lr_at(500).unwrap(), 2e-4);
    }

    #[test]
    fn cosine_warmup_tail_is_gamma_min() {
        let s = ScheduleSpec::cosine_warmup(1e-3, 1e-5, 10, 100, 150);
        for k in 101..=150 {
            assert_eq!(s.lr_at(k).unwrap(), 1e-5);
        }
        assert_eq!(s.lr_at(100).unwrap(), 1e-5);
    }

    #[test]
    fn out_of_domain_and_invalid_specs() {
        let s = ScheduleSpec::cosine(1e-3, 0.0, 200);
        assert!(matches!(s.lr_at(201), Err(Error::Contract(_))));
        assert!(ScheduleSpec::cosine(1e-3, 2e-3, 10).validate().is_err());
        assert!(ScheduleSpec::linear_warmup(1e-3, 10, 10).validate().is_err());
        assert!(ScheduleSpec::cosine_warmup(1e-3, 0.0, 20, 10, 30).validate().is_err());
        assert!(ScheduleSpec::constant(0.0, 10).validate().is_err());
    }

    #[test]
    fn supremum_guard() {
        let s = ScheduleSpec::cosine(1.0, 0.0, 100);
        assert!(!s.stays_below(0.9, 100).unwrap());
        let w = ScheduleSpec::linear_warmup(1e-3, 500, 1000);
        assert_eq!(w.sup_lr(100).unwrap(), w.lr_at(100).unwrap());
        assert!(w.stays_below(1.1e-3, 1000).unwrap());
        assert!(!w.stays_below(1e-3, 1000).unwrap());
    }
}
