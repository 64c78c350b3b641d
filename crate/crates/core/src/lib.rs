//! INNAprop and related inertial optimizers, with small benchmark problems,
//! learning-rate schedules, an ODE integrator for the underlying flow and an
//! experiment harness.

pub mod error;
pub mod harness;
pub mod numerics;
pub mod ode;
pub mod optimizers;
pub mod problems;
pub mod schedulers;

pub use error::{Error, Result};
pub use numerics::{ParamVector, Precision, Real};
