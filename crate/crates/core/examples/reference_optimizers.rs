//! Every reference optimizer on an ill-conditioned quadratic.

use innaprop::optimizers::{ReferenceKind, ReferenceParams, ReferenceState};
use innaprop::problems::{Problem, Quadratic};
use innaprop::{ParamVector, Result};

fn main() -> Result<()> {
    let problem = Quadratic::new(vec![1.0, 10.0, 100.0])?;
    let params = ReferenceParams {
        weight_decay: 0.0,
        ..Default::default()
    };
    for kind in ReferenceKind::ALL {
        // plain gradient steps need a rate below 2 / L
        let gamma = match kind {
            ReferenceKind::Sgd | ReferenceKind::Momentum | ReferenceKind::Nesterov | ReferenceKind::Inna => 5e-3,
            _ => 1e-2,
        };
        let mut state = ReferenceState::init(kind, &params, ParamVector::new(vec![1.0; 3]))?;
        for _ in 0..2000 {
            let g = ParamVector::new(problem.grad(state.theta.as_slice()));
            state = state.step(&g, gamma, &params)?;
        }
        println!("{kind:<18?} loss {:.3e}", problem.loss(state.theta.as_slice()));
    }
    Ok(())
}
