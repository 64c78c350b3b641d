//! With `alpha = beta = 1` INNAprop takes exactly the AdamW step with `beta1 = 0`.

use innaprop::harness::check::{adam_equivalence, rosenbrock, tiny_mlp};
use innaprop::Result;

fn main() -> Result<()> {
    let ros = rosenbrock();
    let mlp = tiny_mlp(0);
    for decay in [0.0, 0.01] {
        println!(
            "weight decay {decay:<5} rosenbrock gap {:.3e}  tiny mlp gap {:.3e}",
            adam_equivalence(&ros, decay, 1000, 1e-3)?,
            adam_equivalence(mlp.as_ref(), decay, 1000, 1e-3)?
        );
    }
    Ok(())
}
