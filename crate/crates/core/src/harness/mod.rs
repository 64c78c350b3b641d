//! Config-driven experiments: single runs, `(alpha, beta)` grids, learning-rate
//! sweeps and the invariant suites.

pub mod check;
mod config;
mod flow;
mod grid;
mod presets;
mod run;

pub use check::{run_suite, CheckLine, CheckReport, Suite};
pub use config::{emit_config, parse_config, DataKind, OptimizerKind, RunConfig};
pub use flow::{OdeConfig, OdeOutput};
pub use grid::{grid_search, lr_sweep, GridResult, GridRow, SweepResult, SweepRow, DEFAULT_GRID, DEFAULT_LRS};
pub use presets::{preset, Preset};
pub use run::{
    build_problem, input_hash, records_to_csv, run_experiment, run_with_problem, RunOutput, RunRecord, RunStatus,
    RunSummary, Snapshot,
};
