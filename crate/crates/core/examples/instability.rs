//! The momentum form of INNAprop in single and double precision.
//!
//! Counts how many `m-tilde` coordinate updates leave the buffer bit-identical
//! in f32 and compares the loss reached by both precisions.

use innaprop::harness::check::momentum_stagnation;
use innaprop::Result;

fn main() -> Result<()> {
    let r = momentum_stagnation(2000)?;
    println!("f32 no-op share of m-tilde updates {:.3}", r.noop_fraction_f32);
    println!("f32 loss {:.6e} -> {:.6e}", r.f32_initial_loss, r.f32_final_loss);
    println!("f64 loss {:.6e} -> {:.6e}", r.f64_initial_loss, r.f64_final_loss);
    Ok(())
}
