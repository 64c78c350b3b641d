use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::Precision;
use crate::optimizers::{
    DinadamConfig, InnapropConfig, MomentumForm, OptimizerSpec, ReferenceKind, ReferenceParams,
};
use crate::problems::{Activation, BatchOrder, DataSource, ProblemKind, ProblemSpec, SyntheticKind, SyntheticSpec};
use crate::schedulers::{ScheduleKind, ScheduleSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerKind {
    #[default]
    Innaprop,
    InnapropNaive,
    InnapropMomentum,
    InnapropMomentumDirect,
    Dinadam,
    DinadamDirect,
    Sgd,
    Momentum,
    Nesterov,
    RmspropMomentum,
    Adam,
    Adamw,
    Nadam,
    Inna,
}

impl OptimizerKind {
    /// Methods whose update divides by `beta − gamma`.
    pub fn needs_gamma_below_beta(self) -> bool {
        matches!(self, OptimizerKind::Innaprop | OptimizerKind::InnapropNaive)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataKind {
    #[default]
    TwoGaussians,
    LinearRegression,
    Csv,
}

/// One experiment, as read from a flat JSON object. Every key is optional;
/// unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Stem of the output files.
    pub name: String,

    pub problem: ProblemKind,
    pub dim: usize,
    pub spectrum: Vec<f64>,
    pub condition: f64,
    pub hidden: Vec<usize>,
    pub activation: Activation,
    pub data: DataKind,
    pub n_samples: usize,
    pub data_dim: usize,
    pub separation: f64,
    pub noise: f64,
    pub train_fraction: f64,
    pub data_path: Option<PathBuf>,
    pub label_column: String,

    pub optimizer: OptimizerKind,
    pub alpha: f64,
    pub beta: f64,
    pub sigma: f64,
    pub epsilon: f64,
    pub weight_decay: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub bias_correction: bool,
    pub grad_clip: Option<f64>,

    pub schedule: ScheduleKind,
    pub lr: f64,
    pub lr_min: f64,
    pub warmup_steps: u64,
    /// End of the cosine decay for `cosine_warmup`; defaults to `steps`.
    pub decay_steps: Option<u64>,

    pub steps: u64,
    /// 0 means full-batch gradients.
    pub batch_size: usize,
    pub batch_order: BatchOrder,
    pub log_every: u64,

    /// Multiplies the problem's seeded starting point.
    pub init_scale: f64,
    pub seed: u64,
    /// Minibatch stream; grid cells use their index here.
    pub stream: u64,
    pub precision: Precision,
    pub output: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            name: "run".into(),
            problem: ProblemKind::Quadratic,
            dim: 2,
            spectrum: Vec::new(),
            condition: 10.0,
            hidden: vec![8],
            activation: Activation::Tanh,
            data: DataKind::TwoGaussians,
            n_samples: 400,
            data_dim: 2,
            separation: 3.0,
            noise: 0.0,
            train_fraction: 0.8,
            data_path: None,
            label_column: "label".into(),
            optimizer: OptimizerKind::Innaprop,
            alpha: 0.1,
            beta: 0.9,
            sigma: 0.999,
            epsilon: 1e-8,
            weight_decay: 0.01,
            beta1: 0.9,
            beta2: 0.999,
            bias_correction: true,
            grad_clip: None,
            schedule: ScheduleKind::Constant,
            lr: 1e-3,
            lr_min: 0.0,
            warmup_steps: 0,
            decay_steps: None,
            steps: 100,
            batch_size: 0,
            batch_order: BatchOrder::ShuffledEpoch,
            log_every: 1,
            init_scale: 1.0,
            seed: 0,
            stream: 0,
            precision: Precision::F64,
            output: None,
        }
    }
}

fn bad(key: &str, message: impl Into<String>) -> Error {
    Error::config(key, message)
}

impl RunConfig {
    /// Parses and validates a JSON document.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let config: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            let message = inner.to_string();
            // unknown fields are reported at the parent path; name the field itself
            let key = match message.strip_prefix("unknown field `") {
                Some(rest) => rest.split('`').next().unwrap_or(&path).to_string(),
                None if path == "." => "<root>".to_string(),
                None => path,
            };
            bad(&key, message)
        })?;
        config.validate()?;
        Ok(config)
    }

    /// Canonical JSON with every key present.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(bad("steps", "must be positive"));
        }
        if self.log_every == 0 {
            return Err(bad("log_every", "must be positive"));
        }
        if !self.init_scale.is_finite() {
            return Err(bad("init_scale", "must be finite"));
        }
        if !(0.0..=1.0).contains(&self.sigma) {
            return Err(bad("sigma", format!("must lie in [0, 1], got {}", self.sigma)));
        }
        for (key, x) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(0.0..=1.0).contains(&x) {
                return Err(bad(key, format!("must lie in [0, 1], got {x}")));
            }
        }
        if !(self.alpha >= 0.0) || !self.alpha.is_finite() {
            return Err(bad("alpha", format!("must be >= 0, got {}", self.alpha)));
        }
        if !(self.beta >= 0.0) || !self.beta.is_finite() {
            return Err(bad("beta", format!("must be >= 0, got {}", self.beta)));
        }
        let innaprop_family = matches!(
            self.optimizer,
            OptimizerKind::Innaprop
                | OptimizerKind::InnapropNaive
                | OptimizerKind::InnapropMomentum
                | OptimizerKind::InnapropMomentumDirect
                | OptimizerKind::Inna
        );
        if innaprop_family && self.beta == 0.0 {
            return Err(bad("beta", "must be positive"));
        }
        if !(self.epsilon > 0.0) || !self.epsilon.is_finite() {
            return Err(bad("epsilon", format!("must be positive, got {}", self.epsilon)));
        }
        if !(self.weight_decay >= 0.0) {
            return Err(bad("weight_decay", format!("must be >= 0, got {}", self.weight_decay)));
        }
        if let Some(c) = self.grad_clip {
            if !(c > 0.0) {
                return Err(bad("grad_clip", format!("must be positive, got {c}")));
            }
        }
        if !(0.0..=1.0).contains(&self.train_fraction) {
            return Err(bad("train_fraction", format!("must lie in [0, 1], got {}", self.train_fraction)));
        }
        if self.data == DataKind::Csv && self.data_path.is_none() {
            return Err(bad("data_path", "required when data is `csv`"));
        }

        let schedule = self.schedule_spec();
        schedule.validate().map_err(|e| {
            let key = match e.to_string() {
                m if m.contains("t_warmup") => "warmup_steps",
                m if m.contains("gamma_min") => "lr_min",
                m if m.contains("t_max") => "steps",
                _ => "lr",
            };
            bad(key, e.to_string())
        })?;

        if self.optimizer.needs_gamma_below_beta() {
            let sup = schedule.sup_lr(self.steps)?;
            if sup >= self.beta {
                return Err(bad(
                    "lr",
                    format!("largest scheduled step {sup} must stay below beta = {}", self.beta),
                ));
            }
        }
        if matches!(
            self.optimizer,
            OptimizerKind::InnapropMomentum | OptimizerKind::InnapropMomentumDirect
        ) {
            for k in 1..=self.steps {
                if 1.0 - self.alpha * schedule.lr_at(k)? == 0.0 {
                    return Err(bad("alpha", format!("alpha * lr = 1 at step {k}")));
                }
            }
        }
        Ok(())
    }

    pub fn schedule_spec(&self) -> ScheduleSpec {
        ScheduleSpec {
            kind: self.schedule,
            gamma0: self.lr,
            gamma_min: match self.schedule {
                ScheduleKind::Constant => self.lr,
                ScheduleKind::LinearWarmup => 0.0,
                _ => self.lr_min,
            },
            t_max: self.steps,
            t_warmup: self.warmup_steps,
            t_decay: self.decay_steps.unwrap_or(self.steps),
        }
    }

    pub fn problem_spec(&self) -> ProblemSpec {
        let data = match self.data {
            DataKind::Csv => DataSource::Csv {
                path: self.data_path.clone().unwrap_or_default(),
                label_column: self.label_column.clone(),
                train_fraction: self.train_fraction,
            },
            kind => {
                let kind = match kind {
                    DataKind::LinearRegression => SyntheticKind::LinearRegression,
                    _ => SyntheticKind::TwoGaussians,
                };
                DataSource::Synthetic(SyntheticSpec {
                    train_fraction: self.train_fraction,
                    separation: self.separation,
                    noise: self.noise,
                    ..SyntheticSpec::new(kind, self.n_samples, self.data_dim)
                })
            }
        };
        ProblemSpec {
            kind: self.problem,
            dim: self.dim,
            spectrum: self.spectrum.clone(),
            condition: self.condition,
            hidden: self.hidden.clone(),
            activation: self.activation,
            data,
        }
    }

    /// Optimizer hyperparameters. Clipping is applied by the run loop for
    /// every method, so it is not forwarded here.
    pub fn optimizer_spec(&self) -> OptimizerSpec {
        let innaprop = InnapropConfig {
            alpha: self.alpha,
            beta: self.beta,
            sigma: self.sigma,
            epsilon: self.epsilon,
            weight_decay: self.weight_decay,
            bias_correction: self.bias_correction,
            grad_clip: None,
        };
        let dinadam = DinadamConfig {
            alpha: self.alpha,
            beta: self.beta,
            sigma1: self.beta1,
            sigma2: self.beta2,
            epsilon: self.epsilon,
        };
        let params = ReferenceParams {
            beta1: self.beta1,
            beta2: self.beta2,
            epsilon: self.epsilon,
            weight_decay: self.weight_decay,
            alpha: self.alpha,
            beta: self.beta,
            bias_correction: self.bias_correction,
        };
        let reference = |kind| OptimizerSpec::Reference(kind, params);
        match self.optimizer {
            OptimizerKind::Innaprop => OptimizerSpec::Innaprop(innaprop),
            OptimizerKind::InnapropNaive => OptimizerSpec::InnapropNaive(innaprop),
            OptimizerKind::InnapropMomentum => OptimizerSpec::InnapropMomentum(innaprop, MomentumForm::Reduced),
            OptimizerKind::InnapropMomentumDirect => OptimizerSpec::InnapropMomentum(innaprop, MomentumForm::Direct),
            OptimizerKind::Dinadam => OptimizerSpec::Dinadam(dinadam),
            OptimizerKind::DinadamDirect => OptimizerSpec::DinadamDirect(dinadam),
            OptimizerKind::Sgd => reference(ReferenceKind::Sgd),
            OptimizerKind::Momentum => reference(ReferenceKind::Momentum),
            OptimizerKind::Nesterov => reference(ReferenceKind::Nesterov),
            OptimizerKind::RmspropMomentum => reference(ReferenceKind::RmspropMomentum),
            OptimizerKind::Adam => reference(ReferenceKind::Adam),
            OptimizerKind::Adamw => reference(ReferenceKind::Adamw),
            OptimizerKind::Nadam => reference(ReferenceKind::Nadam),
            OptimizerKind::Inna => reference(ReferenceKind::Inna),
        }
    }

    /// The INNAprop run paired with an AdamW config: schedule, weight decay,
    /// clipping and data are reused, `sigma` takes AdamW's `beta2`, and only
    /// `(alpha, beta)` are new.
    pub fn innaprop_from_adamw(&self, alpha: f64, beta: f64) -> Result<Self> {
        if self.optimizer != OptimizerKind::Adamw {
            return Err(bad("optimizer", "the paired config must be adamw"));
        }
        let paired = Self {
            optimizer: OptimizerKind::Innaprop,
            alpha,
            beta,
            sigma: self.beta2,
            ..self.clone()
        };
        paired.validate()?;
        Ok(paired)
    }

    /// Mirrors an INNAprop config as AdamW with `beta1 = 0`, `beta2 = sigma`.
    pub fn adamw_twin(&self) -> Result<Self> {
        let twin = Self {
            optimizer: OptimizerKind::Adamw,
            beta1: 0.0,
            beta2: self.sigma,
            ..self.clone()
        };
        twin.validate()?;
        Ok(twin)
    }
}

/// Reads and validates a config file.
pub fn parse_config(path: impl AsRef<Path>) -> Result<RunConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    RunConfig::from_json(&text)
}

/// Writes the canonical form of `config` to `path`.
pub fn emit_config(config: &RunConfig, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, config.to_json() + "\n").map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn key_of(r: Result<RunConfig>) -> String {
        match r {
            Err(Error::Config { key, .. }) => key,
            other => panic!("expected a config error, got {other:?}"),
        }
    }

    #[test]
    fn minimal_config_gets_defaults() {
        let c = RunConfig::from_json(
            r#"{"problem": "rosenbrock", "optimizer": "innaprop", "alpha": 0.1, "beta": 0.9, "lr": 1e-3, "steps": 100}"#,
        )
        .unwrap();
        assert_eq!(c.sigma, 0.999);
        assert_eq!(c.epsilon, 1e-8);
        assert_eq!(c.weight_decay, 0.01);
        assert_eq!((c.beta1, c.beta2), (0.9, 0.999));
        assert_eq!(c.problem, ProblemKind::Rosenbrock);
    }

    #[test]
    fn schedule_above_beta_is_rejected() {
        let r = RunConfig::from_json(r#"{"schedule": "cosine", "lr": 1.0, "beta": 0.9, "steps": 10}"#);
        assert_eq!(key_of(r), "lr");
        // the same schedule is fine for a method without the bound
        assert!(RunConfig::from_json(r#"{"optimizer": "adamw", "schedule": "cosine", "lr": 1.0, "beta": 0.9}"#).is_ok());
    }

    #[test]
    fn errors_name_the_key() {
        assert_eq!(key_of(RunConfig::from_json(r#"{"alpah": 0.1}"#)), "alpah");
        assert_eq!(key_of(RunConfig::from_json(r#"{"steps": "many"}"#)), "steps");
        assert_eq!(key_of(RunConfig::from_json(r#"{"sigma": 1.5}"#)), "sigma");
        assert_eq!(key_of(RunConfig::from_json(r#"{"steps": 0}"#)), "steps");
        assert_eq!(key_of(RunConfig::from_json(r#"{"optimizer": "lion"}"#)), "optimizer");
        assert_eq!(key_of(RunConfig::from_json(r#"{"data": "csv"}"#)), "data_path");
        assert_eq!(
            key_of(RunConfig::from_json(r#"{"optimizer": "innaprop_momentum", "alpha": 1000, "lr": 1e-3}"#)),
            "alpha"
        );
    }

    #[test]
    fn round_trip() {
        let c = RunConfig {
            grad_clip: Some(1.0),
            schedule: ScheduleKind::CosineWarmup,
            warmup_steps: 10,
            decay_steps: Some(80),
            spectrum: vec![1.0, 0.1],
            data_path: Some("x.csv".into()),
            precision: Precision::F32,
            ..Default::default()
        };
        assert_eq!(RunConfig::from_json(&c.to_json()).unwrap(), c);
    }

    #[test]
    fn protocol_pairing_reuses_adamw_settings() {
        let adamw = RunConfig {
            optimizer: OptimizerKind::Adamw,
            beta2: 0.99,
            weight_decay: 0.1,
            grad_clip: Some(1.0),
            ..Default::default()
        };
        let p = adamw.innaprop_from_adamw(0.1, 0.9).unwrap();
        assert_eq!(p.optimizer, OptimizerKind::Innaprop);
        assert_eq!((p.sigma, p.weight_decay, p.grad_clip), (0.99, 0.1, Some(1.0)));
        assert_eq!(p.schedule_spec(), adamw.schedule_spec());
        assert!(RunConfig::default().innaprop_from_adamw(0.1, 0.9).is_err());
    }
}
