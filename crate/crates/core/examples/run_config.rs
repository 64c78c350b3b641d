//! Load a JSON config, run it, and write the CSV log and JSON summary.
//!
//! ```bash
//! cargo run --example run_config -- configs/quadratic_innaprop.json
//! ```

use std::path::PathBuf;

use innaprop::harness::{parse_config, run_experiment};
use innaprop::Result;

fn main() -> Result<()> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs/quadratic_innaprop.json"));
    let config = parse_config(&path)?;
    let out = run_experiment(&config)?;

    for r in out.records.iter().step_by(100) {
        println!("step {:>4}  lr {:.3e}  loss {:?}", r.step, r.lr, r.train_loss);
    }
    let dir = std::env::temp_dir().join("innaprop-run-config");
    let (csv, json) = out.write_to(&dir)?;
    println!("hash {}", out.summary.input_hash);
    println!("wrote {} and {}", csv.display(), json.display());
    Ok(())
}
