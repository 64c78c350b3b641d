//! Baseline optimizers used for comparison and equivalence checks.
//!
//! | kind               | update                                                        |
//! |--------------------|---------------------------------------------------------------|
//! | `sgd`              | `θ −= γg`                                                     |
//! | `momentum`         | `m = β1·m + g`, `θ −= γm`                                     |
//! | `nesterov`         | `m = β1·m + g`, `θ −= γ(g + β1·m)`                            |
//! | `rmsprop_momentum` | `v = β2·v + (1 − β2)g²`, `m = β1·m + g/(√v + ε)`, `θ −= γm`   |
//! | `adam`             | bias-corrected first and second moments                       |
//! | `adamw`            | `adam` after a decoupled decay `θ ← (1 − λγ)θ`                |
//! | `nadam`            | `adam` with a Nesterov look-ahead on the first moment         |
//! | `inna`             | the first-order system in `(θ, ψ)`, see [`inna_step`]         |

use serde::{Deserialize, Serialize};

use super::{check_finite, check_gamma_below_beta, coef};
use crate::error::{Error, Result};
use crate::numerics::{ParamVector, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceKind {
    Sgd,
    Momentum,
    Nesterov,
    RmspropMomentum,
    Adam,
    Adamw,
    Nadam,
    Inna,
}

impl ReferenceKind {
    pub const ALL: [ReferenceKind; 8] = [
        ReferenceKind::Sgd,
        ReferenceKind::Momentum,
        ReferenceKind::Nesterov,
        ReferenceKind::RmspropMomentum,
        ReferenceKind::Adam,
        ReferenceKind::Adamw,
        ReferenceKind::Nadam,
        ReferenceKind::Inna,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceParams {
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    /// Only used by `adamw`.
    pub weight_decay: f64,
    /// Only used by `inna`.
    pub alpha: f64,
    /// Only used by `inna`.
    pub beta: f64,
    /// Used by `adam`, `adamw` and `nadam`.
    pub bias_correction: bool,
}

impl Default for ReferenceParams {
    fn default() -> Self {
        Self {
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            weight_decay: 0.01,
            alpha: 0.5,
            beta: 0.1,
            bias_correction: true,
        }
    }
}

impl ReferenceParams {
    pub fn validate(&self, kind: ReferenceKind) -> Result<()> {
        for (name, x) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(0.0..=1.0).contains(&x) {
                return Err(Error::contract(format!("{name} must lie in [0, 1], got {x}")));
            }
        }
        if !(self.epsilon >= 0.0) || !(self.weight_decay >= 0.0) {
            return Err(Error::contract("epsilon and weight_decay must be >= 0"));
        }
        if kind == ReferenceKind::Inna && (!(self.alpha >= 0.0) || !(self.beta > 0.0)) {
            return Err(Error::contract("inna needs alpha >= 0 and beta > 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ReferenceSlots<T: Real = f64> {
    None,
    M(ParamVector<T>),
    Mv { m: ParamVector<T>, v: ParamVector<T> },
    Psi(ParamVector<T>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceState<T: Real = f64> {
    pub kind: ReferenceKind,
    pub theta: ParamVector<T>,
    pub slots: ReferenceSlots<T>,
    pub k: u64,
}

impl<T: Real> ReferenceState<T> {
    pub fn init(kind: ReferenceKind, params: &ReferenceParams, theta0: ParamVector<T>) -> Result<Self> {
        params.validate(kind)?;
        let n = theta0.dim();
        let slots = match kind {
            ReferenceKind::Sgd => ReferenceSlots::None,
            ReferenceKind::Momentum | ReferenceKind::Nesterov => ReferenceSlots::M(ParamVector::zeros(n)),
            ReferenceKind::RmspropMomentum | ReferenceKind::Adam | ReferenceKind::Adamw | ReferenceKind::Nadam => {
                ReferenceSlots::Mv {
                    m: ParamVector::zeros(n),
                    v: ParamVector::zeros(n),
                }
            }
            ReferenceKind::Inna => {
                let c: T = coef(1.0 - params.alpha * params.beta);
                ReferenceSlots::Psi(theta0.iter().map(|&x| c * x).collect::<Vec<_>>().into())
            }
        };
        Ok(Self {
            kind,
            theta: theta0,
            slots,
            k: 0,
        })
    }

    pub fn step(mut self, g: &ParamVector<T>, gamma: f64, params: &ReferenceParams) -> Result<Self> {
        self.theta.check_dim(g)?;
        if !(gamma >= 0.0) || !gamma.is_finite() {
            return Err(Error::contract(format!("step size must be finite and >= 0, got {gamma}")));
        }
        let k = self.k + 1;
        let lr: T = coef(gamma);
        let b1: T = coef(params.beta1);
        let theta = self.theta.as_mut_slice();
        match (self.kind, &mut self.slots) {
            (ReferenceKind::Sgd, ReferenceSlots::None) => {
                for (t, &gi) in theta.iter_mut().zip(g) {
                    *t -= lr * gi;
                }
            }
            (ReferenceKind::Momentum, ReferenceSlots::M(m)) => {
                for ((t, m), &gi) in theta.iter_mut().zip(m.as_mut_slice()).zip(g) {
                    *m = b1 * *m + gi;
                    *t -= lr * *m;
                }
            }
            (ReferenceKind::Nesterov, ReferenceSlots::M(m)) => {
                for ((t, m), &gi) in theta.iter_mut().zip(m.as_mut_slice()).zip(g) {
                    *m = b1 * *m + gi;
                    *t -= lr * (gi + b1 * *m);
                }
            }
            (ReferenceKind::RmspropMomentum, ReferenceSlots::Mv { m, v }) => {
                let b2: T = coef(params.beta2);
                let one_minus_b2: T = coef(1.0 - params.beta2);
                let eps: T = coef(params.epsilon);
                let (m, v) = (m.as_mut_slice(), v.as_mut_slice());
                for i in 0..theta.len() {
                    v[i] = b2 * v[i] + one_minus_b2 * (g[i] * g[i]);
                    m[i] = b1 * m[i] + g[i] / (v[i].sqrt() + eps);
                    theta[i] -= lr * m[i];
                }
            }
            (ReferenceKind::Adam | ReferenceKind::Adamw, ReferenceSlots::Mv { m, v }) => {
                let decay = if self.kind == ReferenceKind::Adamw {
                    params.weight_decay
                } else {
                    0.0
                };
                adam_kernel(theta, m.as_mut_slice(), v.as_mut_slice(), g, gamma, decay, k, params);
            }
            (ReferenceKind::Nadam, ReferenceSlots::Mv { m, v }) => {
                let one_minus_b1: T = coef(1.0 - params.beta1);
                let b2: T = coef(params.beta2);
                let one_minus_b2: T = coef(1.0 - params.beta2);
                let eps: T = coef(params.epsilon);
                let (c1_next, c1, c2) = if params.bias_correction {
                    (
                        1.0 - params.beta1.powf((k + 1) as f64),
                        1.0 - params.beta1.powf(k as f64),
                        1.0 - params.beta2.powf(k as f64),
                    )
                } else {
                    (1.0, 1.0, 1.0)
                };
                let look: T = coef(params.beta1 / c1_next);
                let now: T = coef((1.0 - params.beta1) / c1);
                let c2: T = coef(c2);
                let (m, v) = (m.as_mut_slice(), v.as_mut_slice());
                for i in 0..theta.len() {
                    m[i] = b1 * m[i] + one_minus_b1 * g[i];
                    v[i] = b2 * v[i] + one_minus_b2 * (g[i] * g[i]);
                    let m_hat = look * m[i] + now * g[i];
                    theta[i] -= lr * (m_hat / ((v[i] / c2).sqrt() + eps));
                }
            }
            (ReferenceKind::Inna, ReferenceSlots::Psi(psi)) => {
                inna_kernel(theta, psi.as_mut_slice(), g, gamma, params.alpha, params.beta);
            }
            (kind, _) => return Err(Error::contract(format!("state slots do not match optimizer {kind:?}"))),
        }
        self.k = k;
        check_finite(k, [&self.theta])?;
        match &self.slots {
            ReferenceSlots::None => {}
            ReferenceSlots::M(m) | ReferenceSlots::Psi(m) => check_finite(k, [m])?,
            ReferenceSlots::Mv { m, v } => check_finite(k, [m, v])?,
        }
        Ok(self)
    }
}

#[allow(clippy::too_many_arguments)]
fn adam_kernel<T: Real>(
    theta: &mut [T],
    m: &mut [T],
    v: &mut [T],
    g: &ParamVector<T>,
    gamma: f64,
    weight_decay: f64,
    k: u64,
    params: &ReferenceParams,
) {
    let decay: T = coef(1.0 - weight_decay * gamma);
    let b1: T = coef(params.beta1);
    let one_minus_b1: T = coef(1.0 - params.beta1);
    let b2: T = coef(params.beta2);
    let one_minus_b2: T = coef(1.0 - params.beta2);
    let correct = params.bias_correction;
    let c1: T = coef(1.0 - params.beta1.powf(k as f64));
    let c2: T = coef(1.0 - params.beta2.powf(k as f64));
    let lr: T = coef(gamma);
    let eps: T = coef(params.epsilon);
    for i in 0..theta.len() {
        let gi = g[i];
        if weight_decay != 0.0 {
            theta[i] = decay * theta[i];
        }
        m[i] = b1 * m[i] + one_minus_b1 * gi;
        v[i] = b2 * v[i] + one_minus_b2 * (gi * gi);
        let (m_hat, v_hat) = if correct { (m[i] / c1, v[i] / c2) } else { (m[i], v[i]) };
        theta[i] -= lr * (m_hat / (v_hat.sqrt() + eps));
    }
}

fn inna_kernel<T: Real>(theta: &mut [T], psi: &mut [T], g: &ParamVector<T>, gamma: f64, alpha: f64, beta: f64) {
    let lr: T = coef(gamma);
    // (1/β − α)θ − ψ/β written as ((1 − αβ)θ − ψ)/β
    let anchor: T = coef(1.0 - alpha * beta);
    let beta_t: T = coef(beta);
    for i in 0..theta.len() {
        let drift = (anchor * theta[i] - psi[i]) / beta_t;
        psi[i] += lr * drift;
        theta[i] += lr * (drift - beta_t * g[i]);
    }
}

/// AdamW over an explicit `(θ, m, v)` triple; `k` is the index of this step,
/// starting at 1.
pub fn adamw_step<T: Real>(
    theta: &mut ParamVector<T>,
    m: &mut ParamVector<T>,
    v: &mut ParamVector<T>,
    g: &ParamVector<T>,
    gamma: f64,
    k: u64,
    params: &ReferenceParams,
) -> Result<()> {
    theta.check_dim(g)?;
    theta.check_dim(m)?;
    theta.check_dim(v)?;
    if k == 0 {
        return Err(Error::contract("adamw step index starts at 1"));
    }
    adam_kernel(
        theta.as_mut_slice(),
        m.as_mut_slice(),
        v.as_mut_slice(),
        g,
        gamma,
        params.weight_decay,
        k,
        params,
    );
    check_finite(k, [&*theta, &*m, &*v])
}

/// Explicit Euler step of the inertial system in `(θ, ψ)`:
///
/// ```text
/// ψ ← ψ + γ((1/β − α)θ − ψ/β)
/// θ ← θ + γ((1/β − α)θ − ψ/β − βg)
/// ```
pub fn inna_step<T: Real>(
    theta: &mut ParamVector<T>,
    psi: &mut ParamVector<T>,
    g: &ParamVector<T>,
    gamma: f64,
    alpha: f64,
    beta: f64,
) -> Result<()> {
    theta.check_dim(g)?;
    theta.check_dim(psi)?;
    inna_kernel(theta.as_mut_slice(), psi.as_mut_slice(), g, gamma, alpha, beta);
    if theta.is_finite() && psi.is_finite() {
        Ok(())
    } else {
        Err(Error::domain("inna step produced a non-finite value"))
    }
}

/// The same step written without the shared drift, in the memory-saving
/// arrangement that feeds the new `ψ` into the `θ` update:
///
/// ```text
/// ψ ← (1 − γ/β)ψ + γ(1/β − α)θ
/// θ ← (1 + γ(1 − αβ)/(β − γ))θ − γ/(β − γ)·ψ − γβg
/// ```
pub fn inna_step_reduced<T: Real>(
    theta: &mut ParamVector<T>,
    psi: &mut ParamVector<T>,
    g: &ParamVector<T>,
    gamma: f64,
    alpha: f64,
    beta: f64,
) -> Result<()> {
    theta.check_dim(g)?;
    theta.check_dim(psi)?;
    check_gamma_below_beta(gamma, beta)?;
    let psi_keep: T = coef(1.0 - gamma / beta);
    let psi_pull: T = coef(gamma * (1.0 / beta - alpha));
    let theta_keep: T = coef(1.0 + gamma * (1.0 - alpha * beta) / (beta - gamma));
    let theta_psi: T = coef(gamma / (beta - gamma));
    let theta_grad: T = coef(gamma * beta);
    let (t, p) = (theta.as_mut_slice(), psi.as_mut_slice());
    for i in 0..t.len() {
        p[i] = psi_keep * p[i] + psi_pull * t[i];
        t[i] = theta_keep * t[i] - theta_psi * p[i] - theta_grad * g[i];
    }
    if theta.is_finite() && psi.is_finite() {
        Ok(())
    } else {
        Err(Error::domain("inna step produced a non-finite value"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pv(x: &[f64]) -> ParamVector {
        ParamVector::new(x.to_vec())
    }

    #[test]
    fn zero_gradient_is_a_fixed_point_for_every_kind() {
        let params = ReferenceParams::default();
        let theta0 = pv(&[0.3, -1.0, 2.0]);
        for kind in ReferenceKind::ALL {
            let p = ReferenceParams {
                weight_decay: 0.0,
                ..params
            };
            let mut s = ReferenceState::init(kind, &p, theta0.clone()).unwrap();
            for _ in 0..25 {
                s = s.step(&ParamVector::zeros(3), 0.01, &p).unwrap();
            }
            assert_eq!(s.theta, theta0, "{kind:?}");
        }
    }

    #[test]
    fn sgd_and_momentum_examples() {
        let p = ReferenceParams::default();
        let s = ReferenceState::init(ReferenceKind::Sgd, &p, pv(&[1.0])).unwrap();
        assert_eq!(s.step(&pv(&[2.0]), 0.25, &p).unwrap().theta[0], 0.5);

        let mut s = ReferenceState::init(ReferenceKind::Momentum, &p, pv(&[0.0])).unwrap();
        s = s.step(&pv(&[1.0]), 1.0, &p).unwrap();
        s = s.step(&pv(&[1.0]), 1.0, &p).unwrap();
        assert!((s.theta[0] + 2.9).abs() < 1e-15);
    }

    #[test]
    fn adam_first_step_is_sign_step() {
        let p = ReferenceParams {
            epsilon: 0.0,
            ..Default::default()
        };
        let s = ReferenceState::init(ReferenceKind::Adam, &p, pv(&[1.0, 1.0])).unwrap();
        let s = s.step(&pv(&[5.0, -0.01]), 0.1, &p).unwrap();
        assert!((s.theta[0] - 0.9).abs() < 1e-12);
        assert!((s.theta[1] - 1.1).abs() < 1e-12);
    }

    #[test]
    fn inna_forms_agree() {
        let (alpha, beta, gamma) = (0.5, 1.0, 0.1);
        let mut t1 = pv(&[1.0, -1.0]);
        let mut p1 = t1.scale(1.0 - alpha * beta).unwrap();
        let (mut t2, mut p2) = (t1.clone(), p1.clone());
        for k in 0..100 {
            let g = pv(&[t1[0] * 2.0, (k as f64).cos()]);
            inna_step(&mut t1, &mut p1, &g, gamma, alpha, beta).unwrap();
            inna_step_reduced(&mut t2, &mut p2, &g, gamma, alpha, beta).unwrap();
        }
        for i in 0..2 {
            assert!((t1[i] - t2[i]).abs() < 1e-10);
            assert!((p1[i] - p2[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn adamw_free_function_matches_state() {
        let p = ReferenceParams::default();
        let mut s = ReferenceState::init(ReferenceKind::Adamw, &p, pv(&[1.0, 2.0])).unwrap();
        let (mut t, mut m, mut v) = (pv(&[1.0, 2.0]), ParamVector::zeros(2), ParamVector::zeros(2));
        for k in 1..=10 {
            let g = pv(&[0.1 * k as f64, -1.0]);
            s = s.step(&g, 1e-2, &p).unwrap();
            adamw_step(&mut t, &mut m, &mut v, &g, 1e-2, k, &p).unwrap();
        }
        assert_eq!(s.theta, t);
    }
}
