use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::{discretization_gap, rk4_integrate, DinFlowSpec, Trajectory};
use crate::problems::{initial_point, make_problem, Problem, ProblemKind, ProblemSpec};

/// Settings for `ode --config`: integrate the flow and, when `gamma` is set,
/// measure how far INNA with that step drifts from it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OdeConfig {
    pub name: String,
    pub problem: ProblemKind,
    pub dim: usize,
    pub spectrum: Vec<f64>,
    pub condition: f64,
    pub alpha: f64,
    pub beta: f64,
    pub t_end: f64,
    pub dt: f64,
    pub gamma: Option<f64>,
    /// Starting point; the problem's seeded initial point when absent.
    pub theta0: Option<Vec<f64>>,
    pub seed: u64,
    pub output: Option<PathBuf>,
}

impl Default for OdeConfig {
    fn default() -> Self {
        Self {
            name: "flow".into(),
            problem: ProblemKind::Quadratic,
            dim: 2,
            spectrum: Vec::new(),
            condition: 10.0,
            alpha: 0.5,
            beta: 0.5,
            t_end: 10.0,
            dt: 0.01,
            gamma: None,
            theta0: None,
            seed: 0,
            output: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct OdeOutput {
    pub trajectory: Trajectory,
    pub losses: Vec<f64>,
    pub gap: Option<f64>,
}

impl OdeConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let config: OdeConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let message = e.into_inner().to_string();
            let key = match message.strip_prefix("unknown field `") {
                Some(rest) => rest.split('`').next().unwrap_or(&path).to_string(),
                None => path,
            };
            Error::config(key, message)
        })?;
        for (key, x) in [("t_end", config.t_end), ("dt", config.dt), ("beta", config.beta)] {
            if !(x > 0.0) || !x.is_finite() {
                return Err(Error::config(key, format!("must be positive, got {x}")));
            }
        }
        if !(config.alpha >= 0.0) {
            return Err(Error::config("alpha", format!("must be >= 0, got {}", config.alpha)));
        }
        if let Some(g) = config.gamma {
            if !(g > 0.0) || g >= config.beta {
                return Err(Error::config("gamma", format!("must lie in (0, beta), got {g}")));
            }
        }
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::from_json(&std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }

    fn problem(&self) -> Result<Box<dyn Problem>> {
        let spec = ProblemSpec {
            kind: self.problem,
            dim: self.dim,
            spectrum: self.spectrum.clone(),
            condition: self.condition,
            ..Default::default()
        };
        make_problem(&spec, self.seed).map_err(|e| match e {
            Error::Contract(m) => Error::config("problem", m),
            other => other,
        })
    }

    pub fn run(&self) -> Result<OdeOutput> {
        let problem = self.problem()?;
        let theta0 = match &self.theta0 {
            Some(t) if t.len() != problem.dim() => {
                return Err(Error::config(
                    "theta0",
                    format!("has {} entries, the problem has {}", t.len(), problem.dim()),
                ))
            }
            Some(t) => t.clone(),
            None => initial_point(problem.as_ref(), self.seed),
        };
        let spec = DinFlowSpec {
            alpha: self.alpha,
            beta: self.beta,
            problem: problem.as_ref(),
            t_end: self.t_end,
            dt: self.dt,
        };
        let trajectory = rk4_integrate(&spec, &theta0, None).map_err(|e| match e {
            Error::Contract(m) => Error::config("dt", m),
            other => other,
        })?;
        let losses = trajectory.theta.iter().map(|t| problem.loss(t)).collect();
        let gap = self.gamma.map(|g| discretization_gap(&spec, g, &theta0)).transpose()?;
        Ok(OdeOutput {
            trajectory,
            losses,
            gap,
        })
    }
}

impl OdeOutput {
    /// Columns `t, theta_0, ..., theta_{p-1}, loss`.
    pub fn to_csv(&self) -> String {
        let dim = self.trajectory.theta.first().map_or(0, Vec::len);
        let mut out = String::from("t");
        for i in 0..dim {
            let _ = write!(out, ",theta_{i}");
        }
        out.push_str(",loss\n");
        for ((t, theta), loss) in self.trajectory.times.iter().zip(&self.trajectory.theta).zip(&self.losses) {
            let _ = write!(out, "{t}");
            for x in theta {
                let _ = write!(out, ",{x}");
            }
            let _ = writeln!(out, ",{loss}");
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trajectory_export() {
        let c = OdeConfig::from_json(r#"{"t_end": 1.0, "dt": 0.25, "gamma": 0.05, "theta0": [1.0, 1.0]}"#).unwrap();
        let out = c.run().unwrap();
        let csv = out.to_csv();
        assert!(csv.starts_with("t,theta_0,theta_1,loss\n0,1,1,"));
        assert_eq!(csv.lines().count(), 6);
        assert!(out.gap.unwrap() > 0.0);
    }

    #[test]
    fn bad_keys_are_config_errors() {
        assert!(matches!(
            OdeConfig::from_json(r#"{"dt": 0.3, "t_end": 1.0}"#).unwrap().run(),
            Err(Error::Config { key, .. }) if key == "dt"
        ));
        assert!(matches!(
            OdeConfig::from_json(r#"{"gamma": 0.9, "beta": 0.5}"#),
            Err(Error::Config { key, .. }) if key == "gamma"
        ));
        assert!(matches!(
            OdeConfig::from_json(r#"{"steps": 3}"#),
            Err(Error::Config { key, .. }) if key == "steps"
        ));
    }
}
