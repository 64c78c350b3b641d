//! Differentiable objectives with hand-written gradients.
//!
//! Every objective implements [`Problem`]. Smooth test functions
//! ([`Quadratic`], [`Rosenbrock`]) have no data; [`LeastSquares`],
//! [`LogisticRegression`] and [`TinyMlp`] average per-example losses over a
//! [`Dataset`] and report a held-out metric.

mod dataset;
mod least_squares;
mod logistic;
mod mlp;
mod quadratic;
mod rosenbrock;
mod sampler;

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use dataset::{generate_synthetic, load_csv_dataset, Dataset, Labels, SyntheticKind, SyntheticSpec};
pub use least_squares::LeastSquares;
pub use logistic::LogisticRegression;
pub use mlp::{Activation, TinyMlp};
pub use quadratic::Quadratic;
pub use rosenbrock::Rosenbrock;
pub use sampler::{Batch, BatchOrder, MiniBatchSampler};

use crate::error::{Error, Result};
use crate::numerics::{ParamVector, RngStream};

/// An objective `J(θ)` over `θ ∈ R^p`.
pub trait Problem: Send + Sync {
    fn name(&self) -> &str;

    fn dim(&self) -> usize;

    /// Full-batch training loss.
    fn loss(&self, theta: &[f64]) -> f64;

    /// Full-batch gradient.
    fn grad(&self, theta: &[f64]) -> Vec<f64>;

    /// Held-out metric, such as test accuracy, when the problem defines one.
    fn test_metric(&self, _theta: &[f64]) -> Option<f64> {
        None
    }

    fn dataset(&self) -> Option<&Dataset> {
        None
    }

    /// Mean loss over the given training examples.
    fn batch_loss(&self, theta: &[f64], _batch: &[usize]) -> f64 {
        self.loss(theta)
    }

    /// Mean gradient over the given training examples.
    fn batch_grad(&self, theta: &[f64], _batch: &[usize]) -> Vec<f64> {
        self.grad(theta)
    }

    fn initial_point(&self, rng: &mut ChaCha8Rng) -> Vec<f64>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    Quadratic,
    Rosenbrock,
    LeastSquares,
    LogisticRegression,
    TinyMlp,
}

/// Where a data-backed problem gets its examples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum DataSource {
    Synthetic(SyntheticSpec),
    Csv {
        path: std::path::PathBuf,
        label_column: String,
        train_fraction: f64,
    },
}

/// Declarative description of a problem instance.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub kind: ProblemKind,
    /// Dimension for the smooth test functions.
    pub dim: usize,
    /// Diagonal spectrum of the quadratic; log-spaced over `[1, condition]` when empty.
    pub spectrum: Vec<f64>,
    pub condition: f64,
    pub hidden: Vec<usize>,
    pub activation: Activation,
    pub data: DataSource,
}

impl Default for ProblemSpec {
    fn default() -> Self {
        Self {
            kind: ProblemKind::Quadratic,
            dim: 2,
            spectrum: Vec::new(),
            condition: 10.0,
            hidden: vec![8],
            activation: Activation::Tanh,
            data: DataSource::Synthetic(SyntheticSpec::new(SyntheticKind::TwoGaussians, 400, 2)),
        }
    }
}

/// One small instance of every shipped problem, ReLU and tanh MLPs included.
pub fn shipped_specs() -> Vec<ProblemSpec> {
    let mut specs = vec![
        ProblemSpec {
            kind: ProblemKind::Quadratic,
            dim: 6,
            condition: 100.0,
            ..Default::default()
        },
        ProblemSpec {
            kind: ProblemKind::Rosenbrock,
            dim: 4,
            ..Default::default()
        },
        ProblemSpec {
            kind: ProblemKind::LeastSquares,
            data: DataSource::Synthetic(SyntheticSpec::new(SyntheticKind::LinearRegression, 100, 3)),
            ..Default::default()
        },
        ProblemSpec {
            kind: ProblemKind::LogisticRegression,
            ..Default::default()
        },
    ];
    for activation in [Activation::Tanh, Activation::Relu] {
        specs.push(ProblemSpec {
            kind: ProblemKind::TinyMlp,
            hidden: vec![8],
            activation,
            data: DataSource::Synthetic(SyntheticSpec::new(SyntheticKind::TwoGaussians, 60, 2)),
            ..Default::default()
        });
    }
    specs
}

/// Random-stream ids derived from a run's seed.
pub(crate) mod streams {
    pub const DATA: u64 = 0;
    pub const INIT: u64 = 1;
    pub const SAMPLER_BASE: u64 = 1 << 32;
}

/// Builds the problem described by `spec`; data generation and parameter
/// initialization are keyed by `seed`.
pub fn make_problem(spec: &ProblemSpec, seed: u64) -> Result<Box<dyn Problem>> {
    let problem: Box<dyn Problem> = match spec.kind {
        ProblemKind::Quadratic => {
            let spectrum = if spec.spectrum.is_empty() {
                log_spaced_spectrum(spec.dim, spec.condition)?
            } else {
                spec.spectrum.clone()
            };
            Box::new(Quadratic::new(spectrum)?)
        }
        ProblemKind::Rosenbrock => Box::new(Rosenbrock::new(spec.dim)?),
        ProblemKind::LeastSquares => Box::new(LeastSquares::new(load_data(&spec.data, seed)?)?),
        ProblemKind::LogisticRegression => {
            Box::new(LogisticRegression::new(load_data(&spec.data, seed)?)?)
        }
        ProblemKind::TinyMlp => {
            let data = load_data(&spec.data, seed)?;
            let mut layers = vec![data.width()];
            layers.extend_from_slice(&spec.hidden);
            layers.push(data.n_classes().ok_or_else(|| {
                Error::contract("tiny_mlp needs integer class labels")
            })?);
            Box::new(TinyMlp::new(data, layers, spec.activation)?)
        }
    };
    Ok(problem)
}

fn load_data(source: &DataSource, seed: u64) -> Result<Dataset> {
    match source {
        DataSource::Synthetic(s) => generate_synthetic(&SyntheticSpec { seed, ..s.clone() }),
        DataSource::Csv {
            path,
            label_column,
            train_fraction,
        } => load_csv_dataset(path, label_column, *train_fraction, seed),
    }
}

fn log_spaced_spectrum(dim: usize, condition: f64) -> Result<Vec<f64>> {
    if dim == 0 {
        return Err(Error::contract("quadratic dimension must be positive"));
    }
    if !(condition >= 1.0) {
        return Err(Error::contract(format!("condition number must be >= 1, got {condition}")));
    }
    if dim == 1 {
        return Ok(vec![1.0]);
    }
    Ok((0..dim)
        .map(|i| condition.powf(i as f64 / (dim - 1) as f64))
        .collect())
}

/// Initial parameters for a run with the given seed.
pub fn initial_point(problem: &dyn Problem, seed: u64) -> Vec<f64> {
    problem.initial_point(&mut RngStream::new(seed, streams::INIT).generator())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub loss: f64,
    pub metric: Option<f64>,
}

/// Full-batch loss and the problem's test metric at `theta`.
pub fn evaluate(problem: &dyn Problem, theta: &[f64]) -> Result<Evaluation> {
    let loss = problem.loss(theta);
    if !loss.is_finite() {
        return Err(Error::domain(format!("non-finite loss {loss}")));
    }
    Ok(Evaluation {
        loss,
        metric: problem.test_metric(theta),
    })
}

/// Mean gradient over the next batch drawn from `sampler`.
pub fn minibatch_grad(
    problem: &dyn Problem,
    theta: &[f64],
    sampler: &mut MiniBatchSampler,
) -> Result<(ParamVector<f64>, Batch)> {
    let data = problem
        .dataset()
        .ok_or_else(|| Error::contract(format!("{} has no dataset to sample from", problem.name())))?;
    if data.n_train() == 0 {
        return Err(Error::contract("empty training set"));
    }
    if sampler.population() != data.n_train() {
        return Err(Error::contract(format!(
            "sampler covers {} examples but the training set has {}",
            sampler.population(),
            data.n_train()
        )));
    }
    let batch = sampler.next_batch();
    let g = problem.batch_grad(theta, &batch.indices);
    Ok((ParamVector::new(g), batch))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{fd_gradient, max_rel_error};
    use rand::Rng;

    fn shipped_problems() -> Vec<Box<dyn Problem>> {
        shipped_specs().iter().map(|s| make_problem(s, 5).unwrap()).collect()
    }

    #[test]
    fn analytic_gradients_match_central_differences() {
        for p in shipped_problems() {
            let mut rng = RngStream::new(99, 0).generator();
            for _ in 0..100 {
                let theta: Vec<f64> = (0..p.dim()).map(|_| rng.random_range(-1.5..1.5)).collect();
                let fd = fd_gradient(p.as_ref(), &theta, 1e-5).unwrap();
                let an = p.grad(&theta);
                let err = max_rel_error(fd.as_slice(), &an, 1e-12);
                assert!(err < 1e-6, "{}: rel err {err:e}", p.name());
            }
        }
    }

    #[test]
    fn full_batch_grad_is_mean_of_single_example_grads() {
        for p in shipped_problems().into_iter().filter(|p| p.dataset().is_some()) {
            let n = p.dataset().unwrap().n_train();
            let theta = initial_point(p.as_ref(), 3);
            let full = p.grad(&theta);
            let mut acc = vec![0.0; p.dim()];
            for i in 0..n {
                for (a, g) in acc.iter_mut().zip(p.batch_grad(&theta, &[i])) {
                    *a += g / n as f64;
                }
            }
            let err = max_rel_error(&acc, &full, 1e-300);
            assert!(err < 1e-12, "{}: {err:e}", p.name());
        }
    }

    #[test]
    fn full_dataset_batch_equals_full_grad() {
        let p = make_problem(
            &ProblemSpec {
                kind: ProblemKind::LogisticRegression,
                ..Default::default()
            },
            1,
        )
        .unwrap();
        let n = p.dataset().unwrap().n_train();
        let mut sampler = MiniBatchSampler::new(n, n, BatchOrder::ShuffledEpoch, RngStream::new(1, 9)).unwrap();
        let theta = vec![0.3, -0.2, 0.1];
        let (g, batch) = minibatch_grad(p.as_ref(), &theta, &mut sampler).unwrap();
        assert_eq!(batch.indices.len(), n);
        let mut sorted = batch.indices.clone();
        sorted.sort_unstable();
        assert_eq!(p.batch_grad(&theta, &sorted), p.grad(&theta));
        assert!(max_rel_error(g.as_slice(), &p.grad(&theta), 1e-300) < 1e-14);
    }

    #[test]
    fn minibatch_needs_dataset() {
        let q = Quadratic::new(vec![1.0]).unwrap();
        let mut sampler = MiniBatchSampler::new(4, 2, BatchOrder::IidWithReplacement, RngStream::new(0, 0)).unwrap();
        assert!(matches!(minibatch_grad(&q, &[1.0], &mut sampler), Err(Error::Contract(_))));
    }

    #[test]
    fn evaluate_examples() {
        let q = Quadratic::new(vec![1.0, 10.0]).unwrap();
        assert_eq!(evaluate(&q, &[0.0, 0.0]).unwrap().loss, 0.0);
        assert_eq!(evaluate(&q, &[1.0, 1.0]).unwrap().loss, 5.5);
        assert!(evaluate(&q, &[f64::INFINITY, 0.0]).is_err());

        let p = make_problem(
            &ProblemSpec {
                kind: ProblemKind::LogisticRegression,
                ..Default::default()
            },
            7,
        )
        .unwrap();
        let acc = evaluate(p.as_ref(), &[0.0, 0.0, 0.0]).unwrap().metric.unwrap();
        // 80 balanced test examples; 3 standard errors of a fair coin
        assert!((acc - 0.5).abs() < 3.0 * (0.25f64 / 80.0).sqrt(), "{acc}");
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let bad = ProblemSpec {
            kind: ProblemKind::Quadratic,
            spectrum: vec![1.0, -1.0],
            ..Default::default()
        };
        assert!(make_problem(&bad, 0).is_err());
        let bad = ProblemSpec {
            kind: ProblemKind::Rosenbrock,
            dim: 1,
            ..Default::default()
        };
        assert!(make_problem(&bad, 0).is_err());
        let bad = ProblemSpec {
            kind: ProblemKind::TinyMlp,
            hidden: vec![0],
            ..Default::default()
        };
        assert!(make_problem(&bad, 0).is_err());
    }
}
