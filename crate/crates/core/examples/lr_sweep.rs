//! Sweep the initial learning rate of AdamW on noisy minibatch least squares.

use innaprop::harness::{lr_sweep, parse_config, DEFAULT_LRS};
use innaprop::Result;

fn main() -> Result<()> {
    let base = parse_config(concat!(env!("CARGO_MANIFEST_DIR"), "/configs/least_squares_adamw.json"))?;
    let sweep = lr_sweep(&base, &DEFAULT_LRS)?;
    print!("{}", sweep.to_csv());
    println!("best lr {:?}", sweep.best_lr());
    Ok(())
}
