use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use super::config::RunConfig;
use super::run::{build_problem, run_with_problem, RunStatus};
use crate::error::{Error, Result};

/// `{0.1, 0.5, 0.9, 1.5, 2.0, ..., 4.0}`, used for both `alpha` and `beta`.
pub const DEFAULT_GRID: [f64; 9] = [0.1, 0.5, 0.9, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0];

/// Candidate initial learning rates for a sweep.
pub const DEFAULT_LRS: [f64; 5] = [1e-4, 5e-4, 1e-3, 5e-3, 1e-2];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridRow {
    pub alpha: f64,
    pub beta: f64,
    pub short_train_loss: Option<f64>,
    pub short_test_metric: Option<f64>,
    pub final_train_loss: Option<f64>,
    pub final_test_metric: Option<f64>,
    pub best_test_metric: Option<f64>,
    pub status: RunStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridResult {
    /// Sorted by `(alpha, beta)`; row `i` ran with stream id `i`.
    pub rows: Vec<GridRow>,
    pub short_step: u64,
    pub steps: u64,
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

impl GridResult {
    pub fn ok_fraction(&self) -> f64 {
        let ok = self.rows.iter().filter(|r| r.status.is_ok()).count();
        ok as f64 / self.rows.len().max(1) as f64
    }

    pub fn cell(&self, alpha: f64, beta: f64) -> Option<&GridRow> {
        self.rows.iter().find(|r| r.alpha == alpha && r.beta == beta)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "alpha,beta,short_train_loss,short_test_metric,final_train_loss,final_test_metric,best_test_metric,status\n",
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                r.alpha,
                r.beta,
                fmt_opt(r.short_train_loss),
                fmt_opt(r.short_test_metric),
                fmt_opt(r.final_train_loss),
                fmt_opt(r.final_test_metric),
                fmt_opt(r.best_test_metric),
                r.status.label()
            );
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }
}

fn sorted_unique(values: &[f64], key: &str) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Err(Error::config(key, "list is empty"));
    }
    if let Some(x) = values.iter().find(|x| !x.is_finite()) {
        return Err(Error::config(key, format!("{x} is not finite")));
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    if let Some(w) = v.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::config(key, format!("duplicate value {}", w[0])));
    }
    Ok(v)
}

/// Runs one experiment per `(alpha, beta)` cell in parallel. Cells are sorted
/// and cell `i` draws minibatches from stream `i`, so the result does not
/// depend on scheduling. Every cell is validated before anything runs.
pub fn grid_search(base: &RunConfig, alphas: &[f64], betas: &[f64]) -> Result<GridResult> {
    let alphas = sorted_unique(alphas, "alphas")?;
    let betas = sorted_unique(betas, "betas")?;
    let cells: Vec<RunConfig> = alphas
        .iter()
        .flat_map(|&a| betas.iter().map(move |&b| (a, b)))
        .enumerate()
        .map(|(i, (alpha, beta))| RunConfig {
            alpha,
            beta,
            stream: i as u64,
            name: format!("{}_a{alpha}_b{beta}", base.name),
            ..base.clone()
        })
        .collect();
    for c in &cells {
        c.validate()?;
    }
    let problem = build_problem(base)?;
    let rows = cells
        .par_iter()
        .map(|c| {
            let out = run_with_problem(c, problem.as_ref())?;
            let s = out.summary;
            Ok(GridRow {
                alpha: c.alpha,
                beta: c.beta,
                short_train_loss: s.short_horizon.map(|h| h.train_loss),
                short_test_metric: s.short_horizon.and_then(|h| h.test_metric),
                final_train_loss: s.final_train_loss,
                final_test_metric: s.final_test_metric,
                best_test_metric: s.best_test_metric,
                status: s.status,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GridResult {
        rows,
        short_step: base.steps.div_ceil(10).max(1),
        steps: base.steps,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub lr: f64,
    pub final_train_loss: Option<f64>,
    pub best_test_metric: Option<f64>,
    pub status: RunStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    /// Learning rate with the lowest final training loss among finished runs.
    pub fn best_lr(&self) -> Option<f64> {
        self.rows
            .iter()
            .filter_map(|r| r.final_train_loss.map(|l| (r.lr, l)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(lr, _)| lr)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("lr,final_train_loss,best_test_metric,status\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                r.lr,
                fmt_opt(r.final_train_loss),
                fmt_opt(r.best_test_metric),
                r.status.label()
            );
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }
}

/// One run per initial learning rate, all on the base config's streams.
pub fn lr_sweep(base: &RunConfig, lrs: &[f64]) -> Result<SweepResult> {
    let lrs = sorted_unique(lrs, "lrs")?;
    let cells: Vec<RunConfig> = lrs
        .iter()
        .map(|&lr| RunConfig {
            lr,
            name: format!("{}_lr{lr}", base.name),
            ..base.clone()
        })
        .collect();
    for c in &cells {
        c.validate()?;
    }
    let problem = build_problem(base)?;
    let rows = cells
        .par_iter()
        .map(|c| {
            let s = run_with_problem(c, problem.as_ref())?.summary;
            Ok(SweepRow {
                lr: c.lr,
                final_train_loss: s.final_train_loss,
                best_test_metric: s.best_test_metric,
                status: s.status,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult { rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_grid_is_sorted() {
        let base = RunConfig {
            steps: 20,
            lr: 1e-2,
            ..Default::default()
        };
        let g = grid_search(&base, &[0.5, 0.1], &[0.9, 0.5]).unwrap();
        let cells: Vec<(f64, f64)> = g.rows.iter().map(|r| (r.alpha, r.beta)).collect();
        assert_eq!(cells, vec![(0.1, 0.5), (0.1, 0.9), (0.5, 0.5), (0.5, 0.9)]);
        assert_eq!(g.to_csv().lines().count(), 5);
    }

    #[test]
    fn ill_posed_cell_rejects_the_grid() {
        let base = RunConfig {
            lr: 0.2,
            ..Default::default()
        };
        assert!(matches!(
            grid_search(&base, &[0.1], &[0.1, 0.9]),
            Err(Error::Config { key, .. }) if key == "lr"
        ));
    }

    #[test]
    fn sweep_rejects_duplicates() {
        let r = lr_sweep(&RunConfig::default(), &[1e-3, 1e-2, 1e-3]);
        assert!(matches!(r, Err(Error::Config { key, .. }) if key == "lrs"));
        assert_eq!(DEFAULT_LRS.len(), 5);
    }
}
