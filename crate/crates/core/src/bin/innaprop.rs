use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use innaprop::harness::{
    grid_search, lr_sweep, parse_config, preset, run_experiment, run_suite, OdeConfig, RunConfig, Suite,
    DEFAULT_GRID, DEFAULT_LRS,
};
use innaprop::{Error, Precision, Result};

#[derive(Debug, Parser)]
#[command(name = "innaprop", version, about = "Run, grid-search and check INNAprop experiments")]
struct Cli {
    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides the config precision.
    #[arg(long, global = true, value_enum)]
    precision: Option<PrecisionArg>,
    /// Directory for CSV and summary files. Falls back to the config `output` key.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PrecisionArg {
    F32,
    F64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Single training run.
    Run {
        /// JSON config path, or `preset:<name>`.
        #[arg(long)]
        config: String,
    },
    /// Grid over (alpha, beta).
    Grid {
        #[arg(long)]
        config: String,
        #[arg(long, value_delimiter = ',')]
        alphas: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        betas: Option<Vec<f64>>,
    },
    /// Sweep over initial learning rates.
    Sweep {
        #[arg(long)]
        config: String,
        #[arg(long, value_delimiter = ',')]
        lrs: Option<Vec<f64>>,
    },
    /// Run an invariant suite, or `all`.
    Check { suite: String },
    /// Integrate the continuous flow and export the trajectory.
    Ode {
        #[arg(long)]
        config: PathBuf,
    },
}

/// Exit code 1 without an error value: a check ran and something failed.
enum Outcome {
    Ok,
    CheckFailed,
}

fn load(cli: &Cli, source: &str) -> Result<RunConfig> {
    let mut config = match source.strip_prefix("preset:") {
        Some(name) => preset(name)?,
        None => parse_config(source)?,
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(p) = cli.precision {
        config.precision = match p {
            PrecisionArg::F32 => Precision::F32,
            PrecisionArg::F64 => Precision::F64,
        };
    }
    config.validate()?;
    Ok(config)
}

fn out_dir(cli: &Cli, fallback: Option<&PathBuf>) -> Option<PathBuf> {
    cli.out.clone().or_else(|| fallback.cloned())
}

fn write(dir: &Path, file: &str, text: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })?;
    let path = dir.join(file);
    std::fs::write(&path, text).map_err(|e| Error::Io {
        path: path.clone(),
        source: e,
    })?;
    Ok(path)
}

fn execute(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Run { config } => {
            let config = load(cli, config)?;
            let out = run_experiment(&config)?;
            match out_dir(cli, config.output.as_ref()) {
                Some(dir) => {
                    let (csv, json) = out.write_to(&dir)?;
                    eprintln!("wrote {} and {}", csv.display(), json.display());
                }
                None => print!("{}", out.to_csv()),
            }
            let s = &out.summary;
            eprintln!(
                "{} {} status={} steps={} loss {:.6e} -> {}",
                s.optimizer,
                s.precision,
                s.status.label(),
                s.steps_run,
                s.initial_train_loss,
                s.final_train_loss.map_or("n/a".into(), |l| format!("{l:.6e}"))
            );
        }
        Command::Grid { config, alphas, betas } => {
            let config = load(cli, config)?;
            let alphas = alphas.as_deref().unwrap_or(&DEFAULT_GRID);
            let betas = betas.as_deref().unwrap_or(&DEFAULT_GRID);
            let grid = grid_search(&config, alphas, betas)?;
            match out_dir(cli, config.output.as_ref()) {
                Some(dir) => {
                    let path = write(&dir, &format!("{}.grid.csv", config.name), &grid.to_csv())?;
                    eprintln!("wrote {}", path.display());
                }
                None => print!("{}", grid.to_csv()),
            }
            eprintln!("{} cells, {:.0}% finished", grid.rows.len(), 100.0 * grid.ok_fraction());
        }
        Command::Sweep { config, lrs } => {
            let config = load(cli, config)?;
            let sweep = lr_sweep(&config, lrs.as_deref().unwrap_or(&DEFAULT_LRS))?;
            match out_dir(cli, config.output.as_ref()) {
                Some(dir) => {
                    let path = write(&dir, &format!("{}.sweep.csv", config.name), &sweep.to_csv())?;
                    eprintln!("wrote {}", path.display());
                }
                None => print!("{}", sweep.to_csv()),
            }
            match sweep.best_lr() {
                Some(lr) => eprintln!("best lr {lr}"),
                None => eprintln!("every run diverged"),
            }
        }
        Command::Check { suite } => {
            let suites = if suite == "all" {
                Suite::ALL.to_vec()
            } else {
                vec![suite.parse()?]
            };
            let mut ok = true;
            for s in suites {
                let report = run_suite(s)?;
                println!("{report}");
                ok &= report.passed();
            }
            if !ok {
                return Ok(Outcome::CheckFailed);
            }
        }
        Command::Ode { config } => {
            let mut config = OdeConfig::load(config)?;
            if let Some(seed) = cli.seed {
                config.seed = seed;
            }
            let out = config.run()?;
            match out_dir(cli, config.output.as_ref()) {
                Some(dir) => {
                    let path = write(&dir, &format!("{}.ode.csv", config.name), &out.to_csv())?;
                    eprintln!("wrote {}", path.display());
                }
                None => print!("{}", out.to_csv()),
            }
            if let Some(gap) = out.gap {
                eprintln!("max gap to the flow {gap:.6e}");
            }
        }
    }
    Ok(Outcome::Ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::CheckFailed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
