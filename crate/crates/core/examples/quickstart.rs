//! INNAprop on the two-dimensional Rosenbrock function, driven by hand.
//!
//! ```bash
//! cargo run --example quickstart
//! ```

use innaprop::optimizers::{InnapropConfig, InnapropState};
use innaprop::problems::{Problem, Rosenbrock};
use innaprop::schedulers::ScheduleSpec;
use innaprop::{ParamVector, Result};

fn main() -> Result<()> {
    let problem = Rosenbrock::new(2)?;
    let config = InnapropConfig {
        weight_decay: 0.0,
        ..InnapropConfig::new(0.1, 0.9)
    };
    let steps = 3000;
    let schedule = ScheduleSpec::cosine(5e-2, 0.0, steps);

    let mut state = InnapropState::init(&config, ParamVector::new(vec![-1.2, 1.0]))?;
    println!("step {:>5}  loss {:.6e}", 0, problem.loss(state.theta.as_slice()));
    for k in 1..=steps {
        let g = ParamVector::new(problem.grad(state.theta.as_slice()));
        state = state.step(&g, schedule.lr_at(k)?, &config)?;
        if k % 500 == 0 {
            println!("step {k:>5}  loss {:.6e}", problem.loss(state.theta.as_slice()));
        }
    }
    println!("theta = {:?}", state.theta.as_slice());
    Ok(())
}
