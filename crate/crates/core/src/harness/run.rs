use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::config::{DataKind, RunConfig};
use crate::error::{Error, Result};
use crate::numerics::{clip_in_place, ParamVector, Precision, Real, RngStream};
use crate::problems::{evaluate, initial_point, make_problem, streams, MiniBatchSampler, Problem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "status", content = "step")]
pub enum RunStatus {
    Ok,
    Diverged(u64),
}

impl RunStatus {
    pub fn is_ok(self) -> bool {
        self == RunStatus::Ok
    }

    pub fn label(self) -> &'static str {
        match self {
            RunStatus::Ok => "ok",
            RunStatus::Diverged(_) => "diverged",
        }
    }
}

/// One logged row.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub step: u64,
    pub lr: f64,
    pub train_loss: Option<f64>,
    pub test_metric: Option<f64>,
    pub status: RunStatus,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Snapshot {
    pub step: u64,
    pub train_loss: f64,
    pub test_metric: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub optimizer: String,
    pub precision: Precision,
    pub input_hash: String,
    #[serde(flatten)]
    pub status: RunStatus,
    pub steps_run: u64,
    pub initial_train_loss: f64,
    pub final_train_loss: Option<f64>,
    pub final_test_metric: Option<f64>,
    pub best_test_metric: Option<f64>,
    /// State at 10% of the step budget.
    pub short_horizon: Option<Snapshot>,
    pub config: RunConfig,
    /// Not serialized, so identical inputs give identical files.
    #[serde(skip)]
    pub wall_time_s: f64,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub records: Vec<RunRecord>,
    pub summary: RunSummary,
}

impl RunOutput {
    pub fn to_csv(&self) -> String {
        records_to_csv(&self.records)
    }

    pub fn summary_json(&self) -> String {
        serde_json::to_string_pretty(&self.summary).expect("summary serializes") + "\n"
    }

    /// Writes `<dir>/<name>.csv` and `<dir>/<name>.summary.json`.
    pub fn write_to(&self, dir: &Path) -> Result<(PathBuf, PathBuf)> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let stem = &self.summary.config.name;
        let csv = dir.join(format!("{stem}.csv"));
        let json = dir.join(format!("{stem}.summary.json"));
        std::fs::write(&csv, self.to_csv()).map_err(|e| Error::io(&csv, e))?;
        std::fs::write(&json, self.summary_json()).map_err(|e| Error::io(&json, e))?;
        Ok((csv, json))
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

pub fn records_to_csv(records: &[RunRecord]) -> String {
    let mut out = String::from("step,lr,train_loss,test_metric,status\n");
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.step,
            r.lr,
            fmt_opt(r.train_loss),
            fmt_opt(r.test_metric),
            r.status.label()
        );
    }
    out
}

/// Git-style content hash: SHA-256 over `blob <len>\0<bytes>`, where the bytes
/// are the canonical config followed by any data file it reads.
pub fn input_hash(config: &RunConfig) -> Result<String> {
    let mut bytes = config.to_json().into_bytes();
    if config.data == DataKind::Csv {
        if let Some(path) = &config.data_path {
            bytes.extend(std::fs::read(path).map_err(|e| Error::io(path, e))?);
        }
    }
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", bytes.len()));
    h.update(&bytes);
    Ok(h.finalize().iter().map(|b| format!("{b:02x}")).collect())
}

/// Builds the problem for a config; bad problem parameters are config errors.
pub fn build_problem(config: &RunConfig) -> Result<Box<dyn Problem>> {
    make_problem(&config.problem_spec(), config.seed).map_err(|e| match e {
        Error::Contract(m) => Error::config("problem", m),
        other => other,
    })
}

/// Runs the training loop in the configured precision.
pub fn run_experiment(config: &RunConfig) -> Result<RunOutput> {
    config.validate()?;
    let problem = build_problem(config)?;
    run_with_problem(config, problem.as_ref())
}

/// Same as [`run_experiment`] with a prebuilt problem, so callers can share it.
pub fn run_with_problem(config: &RunConfig, problem: &dyn Problem) -> Result<RunOutput> {
    match config.precision {
        Precision::F32 => run_typed::<f32>(config, problem),
        Precision::F64 => run_typed::<f64>(config, problem),
    }
}

fn short_horizon_step(steps: u64) -> u64 {
    steps.div_ceil(10).max(1)
}

fn run_typed<T: Real>(config: &RunConfig, problem: &dyn Problem) -> Result<RunOutput> {
    let started = Instant::now();
    let schedule = config.schedule_spec();
    let spec = config.optimizer_spec();
    let hash = input_hash(config)?;

    let theta0: Vec<f64> = initial_point(problem, config.seed)
        .into_iter()
        .map(|x| x * config.init_scale)
        .collect();
    let mut state = Some(spec.init(ParamVector::<T>::from_f64_slice(&theta0))?);
    let mut sampler = match (config.batch_size, problem.dataset()) {
        (0, _) | (_, None) => None,
        (b, Some(data)) => Some(MiniBatchSampler::new(
            data.n_train(),
            b,
            config.batch_order,
            RngStream::new(config.seed, streams::SAMPLER_BASE + config.stream),
        )?),
    };

    let first = evaluate(problem, &theta0)?;
    let mut records = vec![RunRecord {
        step: 0,
        lr: schedule.lr_at(0)?,
        train_loss: Some(first.loss),
        test_metric: first.metric,
        status: RunStatus::Ok,
    }];
    let mut best_metric = first.metric;
    let mut last = first;
    let mut status = RunStatus::Ok;
    let mut steps_run = 0;
    let mut short_horizon = None;
    let short_step = short_horizon_step(config.steps);

    for k in 1..=config.steps {
        let lr = schedule.lr_at(k)?;
        let current = state.take().expect("state present while running");
        let theta = current.theta().to_f64_vec();
        let g = match sampler.as_mut() {
            Some(s) => problem.batch_grad(&theta, &s.next_batch().indices),
            None => problem.grad(&theta),
        };
        let mut g = ParamVector::<T>::from_f64_slice(&g);
        if let Some(c) = config.grad_clip {
            clip_in_place(&mut g, c);
        }
        let next = if g.is_finite() {
            match current.step(&spec, &g, lr) {
                Ok(s) => Some(s),
                Err(Error::Divergence { .. }) => None,
                Err(e) => return Err(e),
            }
        } else {
            None
        };
        let Some(next) = next else {
            status = RunStatus::Diverged(k);
            records.push(RunRecord {
                step: k,
                lr,
                train_loss: None,
                test_metric: None,
                status,
            });
            break;
        };
        steps_run = k;

        let log_now = k % config.log_every == 0 || k == config.steps;
        if log_now || k == short_step {
            let theta = next.theta().to_f64_vec();
            let Ok(eval) = evaluate(problem, &theta) else {
                status = RunStatus::Diverged(k);
                records.push(RunRecord {
                    step: k,
                    lr,
                    train_loss: None,
                    test_metric: None,
                    status,
                });
                break;
            };
            if k == short_step {
                short_horizon = Some(Snapshot {
                    step: k,
                    train_loss: eval.loss,
                    test_metric: eval.metric,
                });
            }
            if log_now {
                records.push(RunRecord {
                    step: k,
                    lr,
                    train_loss: Some(eval.loss),
                    test_metric: eval.metric,
                    status,
                });
                best_metric = match (best_metric, eval.metric) {
                    (Some(a), Some(b)) => Some(a.max(b)),
                    (a, b) => a.or(b),
                };
                last = eval;
            }
        }
        state = Some(next);
    }

    let ok = status.is_ok();
    let summary = RunSummary {
        optimizer: spec.name(),
        precision: T::PRECISION,
        input_hash: hash,
        status,
        steps_run,
        initial_train_loss: first.loss,
        final_train_loss: ok.then_some(last.loss),
        final_test_metric: if ok { last.metric } else { None },
        best_test_metric: best_metric,
        short_horizon,
        config: config.clone(),
        wall_time_s: started.elapsed().as_secs_f64(),
    };
    Ok(RunOutput { records, summary })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::OptimizerKind;
    use crate::problems::ProblemKind;
    use crate::schedulers::ScheduleKind;

    #[test]
    fn csv_has_fixed_columns_and_step_zero() {
        let c = RunConfig {
            steps: 5,
            ..Default::default()
        };
        let out = run_experiment(&c).unwrap();
        let csv = out.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("step,lr,train_loss,test_metric,status"));
        assert!(lines.next().unwrap().starts_with("0,0.001,"));
        assert_eq!(out.records.len(), 6);
        assert!(out.summary.status.is_ok());
    }

    #[test]
    fn divergence_is_a_status() {
        let c = RunConfig {
            problem: ProblemKind::Quadratic,
            optimizer: OptimizerKind::Sgd,
            condition: 1e3,
            lr: 10.0,
            steps: 2000,
            ..Default::default()
        };
        let out = run_experiment(&c).unwrap();
        assert!(matches!(out.summary.status, RunStatus::Diverged(_)));
        assert_eq!(out.records.last().unwrap().status.label(), "diverged");
        assert_eq!(out.summary.final_train_loss, None);
    }

    #[test]
    fn log_interval_and_snapshot() {
        let c = RunConfig {
            steps: 100,
            log_every: 25,
            schedule: ScheduleKind::Cosine,
            ..Default::default()
        };
        let out = run_experiment(&c).unwrap();
        let steps: Vec<u64> = out.records.iter().map(|r| r.step).collect();
        assert_eq!(steps, vec![0, 25, 50, 75, 100]);
        assert_eq!(out.summary.short_horizon.unwrap().step, 10);
        assert_eq!(out.records.last().unwrap().lr, 0.0);
    }

    #[test]
    fn hash_depends_on_config() {
        let a = RunConfig::default();
        let b = RunConfig { seed: 1, ..a.clone() };
        assert_ne!(input_hash(&a).unwrap(), input_hash(&b).unwrap());
        assert_eq!(input_hash(&a).unwrap().len(), 64);
    }
}
