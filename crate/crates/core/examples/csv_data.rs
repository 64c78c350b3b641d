//! Train logistic regression on a CSV file of labelled points.

use innaprop::harness::{run_experiment, DataKind, OptimizerKind, RunConfig};
use innaprop::problems::ProblemKind;
use innaprop::schedulers::ScheduleKind;
use innaprop::Result;

fn main() -> Result<()> {
    let config = RunConfig {
        name: "csv_points".into(),
        problem: ProblemKind::LogisticRegression,
        data: DataKind::Csv,
        data_path: Some(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data/points.csv").into()),
        optimizer: OptimizerKind::Innaprop,
        schedule: ScheduleKind::Cosine,
        lr: 1e-2,
        steps: 300,
        batch_size: 16,
        log_every: 50,
        ..Default::default()
    };
    let out = run_experiment(&config)?;
    print!("{}", out.to_csv());
    // the hash covers the data file as well as the config
    println!("input hash {}", out.summary.input_hash);
    Ok(())
}
