//! The same algorithms written with more and with fewer state buffers.
//!
//! Each pair follows its own gradients from the same start; the printed
//! number is the largest gap over the run relative to the iterate scale.

use innaprop::harness::check::{
    dinadam_adam_equivalence, dinadam_forms_equivalence, inna_equivalence, momentum_equivalence, naive_equivalence,
    rosenbrock, test_quadratic,
};
use innaprop::optimizers::{DinadamConfig, InnapropConfig};
use innaprop::Result;

fn main() -> Result<()> {
    let ros = rosenbrock();
    let quad = test_quadratic();
    let plain = InnapropConfig::plain(0.1, 0.9, 0.999, 1e-8);

    println!("six-slot vs three-slot, quadratic   {:.3e}", naive_equivalence(&quad, &plain, 500, 1e-3)?);
    println!("six-slot vs three-slot, rosenbrock  {:.3e}", naive_equivalence(&ros, &plain, 500, 1e-3)?);
    println!("inna psi_k vs psi_k+1               {:.3e}", inna_equivalence(&ros, 0.5, 0.1, 100, 1e-3)?);
    println!("momentum direct vs reduced          {:.3e}", momentum_equivalence(&ros, &plain, 200, 1e-3)?);
    println!("dinadam(1, 0) vs adam               {:.3e}", dinadam_adam_equivalence(&ros, 500, 1e-3)?);
    println!(
        "dinadam direct vs m-tilde           {:.3e}",
        dinadam_forms_equivalence(&ros, &DinadamConfig::default(), 500, 1e-3)?
    );
    Ok(())
}
