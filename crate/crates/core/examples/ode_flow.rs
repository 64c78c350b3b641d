//! Integrate the continuous inertial flow with RK4 and watch INNA approach it
//! as the step shrinks.

use innaprop::ode::{discretization_gap, richardson_ratio, rk4_integrate, DinFlowSpec};
use innaprop::problems::{Problem, Quadratic};
use innaprop::Result;

fn main() -> Result<()> {
    let problem = Quadratic::new(vec![1.0, 4.0])?;
    let spec = DinFlowSpec {
        alpha: 0.5,
        beta: 0.5,
        problem: &problem,
        t_end: 4.0,
        dt: 0.1,
    };
    let theta0 = [1.0, -1.0];

    let path = rk4_integrate(&spec, &theta0, None)?;
    for (t, theta) in path.times.iter().zip(&path.theta).step_by(10) {
        println!("t = {t:4.1}  loss {:.6e}", problem.loss(theta));
    }
    println!("richardson ratio {:.2} (fourth order gives 16)", richardson_ratio(&spec, &theta0)?);

    let fine = DinFlowSpec {
        t_end: 2.0,
        dt: 1e-3,
        ..spec
    };
    let mut last = None;
    for gamma in [0.08, 0.04, 0.02, 0.01] {
        let gap = discretization_gap(&fine, gamma, &theta0)?;
        match last {
            Some(prev) => println!("gamma {gamma:<5} gap {gap:.4e}  halving ratio {:.2}", prev / gap),
            None => println!("gamma {gamma:<5} gap {gap:.4e}"),
        }
        last = Some(gap);
    }
    Ok(())
}
