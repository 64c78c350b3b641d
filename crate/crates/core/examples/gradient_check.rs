//! Analytic gradients of the shipped problems against central differences.

use innaprop::harness::check::gradient_error;
use innaprop::problems::{make_problem, shipped_specs};
use innaprop::Result;

fn main() -> Result<()> {
    for spec in shipped_specs() {
        let problem = make_problem(&spec, 5)?;
        println!(
            "{:<22} dim {:>3}  worst rel err {:.3e}",
            problem.name(),
            problem.dim(),
            gradient_error(problem.as_ref(), 100, 99)?
        );
    }
    Ok(())
}
