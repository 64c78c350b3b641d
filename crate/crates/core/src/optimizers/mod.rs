//! Optimizer kernels as pure state transitions.
//!
//! Every state owns its buffers and `step` consumes the state and returns the
//! next one. Coefficients are formed in `f64` and rounded once to the working
//! precision, so f32 and f64 runs differ only in the per-coordinate arithmetic.

mod dinadam;
mod innaprop;
mod momentum;
mod naive;
mod reference;

pub use dinadam::{DinadamConfig, DinadamDirectState, DinadamState};
pub use innaprop::{InnapropConfig, InnapropState};
pub use momentum::{MomentumBuffer, MomentumForm, MomentumVariantState};
pub use naive::NaiveInnapropState;
pub use reference::{
    adamw_step, inna_step, inna_step_reduced, ReferenceKind, ReferenceParams, ReferenceSlots, ReferenceState,
};

use crate::error::{Error, Result};
use crate::numerics::{ParamVector, Real};

#[inline]
pub(crate) fn coef<T: Real>(x: f64) -> T {
    T::from_f64(x)
}

/// `0 <= gamma < beta`; a zero step is allowed so decayed schedules can end at zero.
pub(crate) fn check_gamma_below_beta(gamma: f64, beta: f64) -> Result<()> {
    if !gamma.is_finite() || gamma < 0.0 {
        return Err(Error::contract(format!("step size must be finite and >= 0, got {gamma}")));
    }
    if gamma >= beta {
        return Err(Error::WellPosedness { gamma, beta });
    }
    Ok(())
}

pub(crate) fn check_finite<'a, T: Real + 'a>(
    step: u64,
    vectors: impl IntoIterator<Item = &'a ParamVector<T>>,
) -> Result<()> {
    if vectors.into_iter().all(ParamVector::is_finite) {
        Ok(())
    } else {
        Err(Error::Divergence { step })
    }
}

/// Which optimizer to run and with what hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub enum OptimizerSpec {
    Innaprop(InnapropConfig),
    /// The six-slot recursion; weight decay, bias correction and clipping are ignored.
    InnapropNaive(InnapropConfig),
    InnapropMomentum(InnapropConfig, MomentumForm),
    Dinadam(DinadamConfig),
    DinadamDirect(DinadamConfig),
    Reference(ReferenceKind, ReferenceParams),
}

impl OptimizerSpec {
    pub fn name(&self) -> String {
        match self {
            OptimizerSpec::Innaprop(_) => "innaprop".into(),
            OptimizerSpec::InnapropNaive(_) => "innaprop_naive".into(),
            OptimizerSpec::InnapropMomentum(_, MomentumForm::Direct) => "innaprop_momentum_direct".into(),
            OptimizerSpec::InnapropMomentum(_, MomentumForm::Reduced) => "innaprop_momentum".into(),
            OptimizerSpec::Dinadam(_) => "dinadam".into(),
            OptimizerSpec::DinadamDirect(_) => "dinadam_direct".into(),
            OptimizerSpec::Reference(kind, _) => serde_json::to_value(kind)
                .ok()
                .and_then(|v| v.as_str().map(str::to_owned))
                .unwrap_or_default(),
        }
    }

    /// `beta` when the method needs `gamma < beta`.
    pub fn step_bound(&self) -> Option<f64> {
        match self {
            OptimizerSpec::Innaprop(c) | OptimizerSpec::InnapropNaive(c) => Some(c.beta),
            _ => None,
        }
    }

    pub fn init<T: Real>(&self, theta0: ParamVector<T>) -> Result<OptimizerState<T>> {
        Ok(match self {
            OptimizerSpec::Innaprop(c) => OptimizerState::Innaprop(InnapropState::init(c, theta0)?),
            OptimizerSpec::InnapropNaive(c) => {
                c.validate()?;
                OptimizerState::NaiveFresh(theta0)
            }
            OptimizerSpec::InnapropMomentum(c, form) => {
                OptimizerState::Momentum(MomentumVariantState::init(c, theta0, *form)?)
            }
            OptimizerSpec::Dinadam(c) => OptimizerState::Dinadam(DinadamState::init(c, theta0)?),
            OptimizerSpec::DinadamDirect(c) => OptimizerState::DinadamDirect(DinadamDirectState::init(c, theta0)?),
            OptimizerSpec::Reference(kind, p) => OptimizerState::Reference(ReferenceState::init(*kind, p, theta0)?),
        })
    }
}

/// State of any optimizer in [`OptimizerSpec`].
#[derive(Debug, Clone, PartialEq)]
pub enum OptimizerState<T: Real = f64> {
    Innaprop(InnapropState<T>),
    /// The six-slot recursion before its bootstrap step.
    NaiveFresh(ParamVector<T>),
    Naive(NaiveInnapropState<T>),
    Momentum(MomentumVariantState<T>),
    Dinadam(DinadamState<T>),
    DinadamDirect(DinadamDirectState<T>),
    Reference(ReferenceState<T>),
}

impl<T: Real> OptimizerState<T> {
    pub fn theta(&self) -> &ParamVector<T> {
        match self {
            OptimizerState::Innaprop(s) => &s.theta,
            OptimizerState::NaiveFresh(t) => t,
            OptimizerState::Naive(s) => &s.theta_curr,
            OptimizerState::Momentum(s) => &s.theta,
            OptimizerState::Dinadam(s) => &s.theta,
            OptimizerState::DinadamDirect(s) => &s.theta,
            OptimizerState::Reference(s) => &s.theta,
        }
    }

    pub fn steps_taken(&self) -> u64 {
        match self {
            OptimizerState::Innaprop(s) => s.k,
            OptimizerState::NaiveFresh(_) => 0,
            OptimizerState::Naive(s) => s.k,
            OptimizerState::Momentum(s) => s.k,
            OptimizerState::Dinadam(s) => s.k,
            OptimizerState::DinadamDirect(s) => s.k,
            OptimizerState::Reference(s) => s.k,
        }
    }

    /// Advances by one step with gradient `g` taken at [`Self::theta`].
    pub fn step(self, spec: &OptimizerSpec, g: &ParamVector<T>, gamma: f64) -> Result<Self> {
        Ok(match (self, spec) {
            (OptimizerState::Innaprop(s), OptimizerSpec::Innaprop(c)) => OptimizerState::Innaprop(s.step(g, gamma, c)?),
            (OptimizerState::NaiveFresh(t), OptimizerSpec::InnapropNaive(c)) => {
                OptimizerState::Naive(NaiveInnapropState::bootstrap(c, t, g, gamma)?)
            }
            (OptimizerState::Naive(s), OptimizerSpec::InnapropNaive(c)) => OptimizerState::Naive(s.step(g, gamma, c)?),
            (OptimizerState::Momentum(s), OptimizerSpec::InnapropMomentum(c, _)) => {
                OptimizerState::Momentum(s.step(g, gamma, c)?)
            }
            (OptimizerState::Dinadam(s), OptimizerSpec::Dinadam(c)) => OptimizerState::Dinadam(s.step(g, gamma, c)?),
            (OptimizerState::DinadamDirect(s), OptimizerSpec::DinadamDirect(c)) => {
                OptimizerState::DinadamDirect(s.step(g, gamma, c)?)
            }
            (OptimizerState::Reference(s), OptimizerSpec::Reference(_, p)) => {
                OptimizerState::Reference(s.step(g, gamma, p)?)
            }
            (_, spec) => {
                return Err(Error::contract(format!(
                    "optimizer state does not belong to {}",
                    spec.name()
                )))
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn union_dispatches_every_spec() {
        let specs = [
            OptimizerSpec::Innaprop(InnapropConfig::default()),
            OptimizerSpec::InnapropNaive(InnapropConfig::default()),
            OptimizerSpec::InnapropMomentum(InnapropConfig::default(), MomentumForm::Direct),
            OptimizerSpec::InnapropMomentum(InnapropConfig::default(), MomentumForm::Reduced),
            OptimizerSpec::Dinadam(DinadamConfig::default()),
            OptimizerSpec::DinadamDirect(DinadamConfig::default()),
            OptimizerSpec::Reference(ReferenceKind::Nadam, ReferenceParams::default()),
        ];
        for spec in &specs {
            let mut s = spec.init(ParamVector::<f32>::new(vec![1.0, 2.0])).unwrap();
            for _ in 0..3 {
                s = s.step(spec, &ParamVector::new(vec![0.5, -0.5]), 1e-2).unwrap();
            }
            assert_eq!(s.steps_taken(), 3, "{}", spec.name());
            assert!(s.theta()[0] < 1.0, "{}", spec.name());
        }
    }

    #[test]
    fn mismatched_state_is_a_contract_error() {
        let a = OptimizerSpec::Innaprop(InnapropConfig::default());
        let b = OptimizerSpec::Dinadam(DinadamConfig::default());
        let s = a.init(ParamVector::<f64>::new(vec![1.0])).unwrap();
        assert!(matches!(
            s.step(&b, &ParamVector::new(vec![1.0]), 0.1),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn gamma_bound() {
        assert!(check_gamma_below_beta(0.0, 0.9).is_ok());
        assert!(matches!(check_gamma_below_beta(0.9, 0.9), Err(Error::WellPosedness { .. })));
        assert!(matches!(check_gamma_below_beta(-1e-3, 0.9), Err(Error::Contract(_))));
    }
}
