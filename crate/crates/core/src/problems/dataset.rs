use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::streams;
use crate::error::{Error, Result};
use crate::numerics::RngStream;

#[derive(Debug, Clone, PartialEq)]
pub enum Labels {
    Class(Vec<usize>),
    Real(Vec<f64>),
}

impl Labels {
    pub fn len(&self) -> usize {
        match self {
            Labels::Class(v) => v.len(),
            Labels::Real(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn permuted(&self, order: &[usize]) -> Labels {
        match self {
            Labels::Class(v) => Labels::Class(order.iter().map(|&i| v[i]).collect()),
            Labels::Real(v) => Labels::Real(order.iter().map(|&i| v[i]).collect()),
        }
    }
}

/// Rows of features with labels. The first `n_train` rows are the training
/// split and the remaining `n_test` rows the test split.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Vec<Vec<f64>>,
    labels: Labels,
    n_train: usize,
}

impl Dataset {
    pub fn new(features: Vec<Vec<f64>>, labels: Labels, n_train: usize) -> Result<Self> {
        if features.len() != labels.len() {
            return Err(Error::contract(format!(
                "{} feature rows but {} labels",
                features.len(),
                labels.len()
            )));
        }
        if n_train > features.len() {
            return Err(Error::contract("n_train exceeds the number of rows"));
        }
        if let Some(first) = features.first() {
            if let Some(r) = features.iter().position(|row| row.len() != first.len()) {
                return Err(Error::contract(format!("row {r} has a different width")));
            }
        }
        Ok(Self {
            features,
            labels,
            n_train,
        })
    }

    /// Shuffles rows with `seed` and keeps `round(train_fraction·n)` for training.
    pub fn split(features: Vec<Vec<f64>>, labels: Labels, train_fraction: f64, seed: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&train_fraction) {
            return Err(Error::config(
                "train_fraction",
                format!("must lie in [0, 1], got {train_fraction}"),
            ));
        }
        let n = features.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut RngStream::new(seed, streams::DATA + 1).generator());
        let features = order.iter().map(|&i| features[i].clone()).collect();
        let labels = labels.permuted(&order);
        let n_train = (train_fraction * n as f64).round() as usize;
        Self::new(features, labels, n_train)
    }

    pub fn width(&self) -> usize {
        self.features.first().map_or(0, Vec::len)
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn n_train(&self) -> usize {
        self.n_train
    }

    pub fn n_test(&self) -> usize {
        self.features.len() - self.n_train
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i]
    }

    pub fn features(&self) -> &[Vec<f64>] {
        &self.features
    }

    pub fn labels(&self) -> &Labels {
        &self.labels
    }

    pub fn train_range(&self) -> std::ops::Range<usize> {
        0..self.n_train
    }

    pub fn test_range(&self) -> std::ops::Range<usize> {
        self.n_train..self.features.len()
    }

    /// Number of classes when labels are class indices.
    pub fn n_classes(&self) -> Option<usize> {
        match &self.labels {
            Labels::Class(v) => Some(v.iter().max().map_or(0, |m| m + 1).max(2)),
            Labels::Real(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SyntheticKind {
    /// Two isotropic unit-variance Gaussian classes with means `±separation·u`.
    TwoGaussians,
    /// `y = w·x + b + noise·ξ` with standard normal `x`, `w`, `b`, `ξ`.
    LinearRegression,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub kind: SyntheticKind,
    pub n: usize,
    pub dim: usize,
    #[serde(default)]
    pub seed: u64,
    pub train_fraction: f64,
    pub separation: f64,
    pub noise: f64,
}

impl SyntheticSpec {
    pub fn new(kind: SyntheticKind, n: usize, dim: usize) -> Self {
        Self {
            kind,
            n,
            dim,
            seed: 0,
            train_fraction: 0.8,
            separation: 3.0,
            noise: 0.0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// Seed-deterministic synthetic dataset.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<Dataset> {
    if spec.n == 0 || spec.dim == 0 {
        return Err(Error::contract("synthetic data needs n > 0 and dim > 0"));
    }
    let mut rng = RngStream::new(spec.seed, streams::DATA).generator();
    let mut gauss = || -> f64 { rng.sample(StandardNormal) };
    match spec.kind {
        SyntheticKind::TwoGaussians => {
            // unit direction with equal weight on every coordinate
            let offset = spec.separation / (spec.dim as f64).sqrt();
            let mut features = Vec::with_capacity(spec.n);
            let mut labels = Vec::with_capacity(spec.n);
            for i in 0..spec.n {
                let label = i % 2;
                let sign = if label == 1 { 1.0 } else { -1.0 };
                features.push((0..spec.dim).map(|_| sign * offset + gauss()).collect());
                labels.push(label);
            }
            Dataset::split(features, Labels::Class(labels), spec.train_fraction, spec.seed)
        }
        SyntheticKind::LinearRegression => {
            let w: Vec<f64> = (0..spec.dim).map(|_| gauss()).collect();
            let b = gauss();
            let mut features = Vec::with_capacity(spec.n);
            let mut targets = Vec::with_capacity(spec.n);
            for _ in 0..spec.n {
                let x: Vec<f64> = (0..spec.dim).map(|_| gauss()).collect();
                let y = w.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>() + b;
                targets.push(y + spec.noise * gauss());
                features.push(x);
            }
            Dataset::split(features, Labels::Real(targets), spec.train_fraction, spec.seed)
        }
    }
}

/// Reads a headed, numeric CSV file. Labels that are all non-negative
/// integers become class indices; anything else is kept as real targets.
pub fn load_csv_dataset(
    path: impl AsRef<Path>,
    label_column: &str,
    train_fraction: f64,
    seed: u64,
) -> Result<Dataset> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let headers = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    let label_idx = headers
        .iter()
        .position(|h| h == label_column)
        .ok_or_else(|| Error::config("label_column", format!("no column named `{label_column}` in {}", path.display())))?;

    let mut features = Vec::new();
    let mut raw_labels = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() != headers.len() {
            return Err(Error::Parse {
                line,
                column: "*".into(),
                message: format!("expected {} cells, found {}", headers.len(), record.len()),
            });
        }
        let mut row = Vec::with_capacity(headers.len() - 1);
        for (j, cell) in record.iter().enumerate() {
            let value: f64 = cell.parse().map_err(|_| Error::Parse {
                line,
                column: headers[j].to_string(),
                message: format!("`{cell}` is not a number"),
            })?;
            if j == label_idx {
                raw_labels.push(value);
            } else {
                row.push(value);
            }
        }
        features.push(row);
    }

    let is_class = raw_labels
        .iter()
        .all(|y| *y >= 0.0 && y.fract() == 0.0 && *y < 1e9);
    let labels = if is_class {
        Labels::Class(raw_labels.iter().map(|y| *y as usize).collect())
    } else {
        Labels::Real(raw_labels)
    };
    Dataset::split(features, labels, train_fraction, seed)
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.kind() {
        csv::ErrorKind::Io(_) => match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            _ => unreachable!(),
        },
        _ => {
            let line = e.position().map_or(0, |p| p.line() as usize);
            Error::Parse {
                line,
                column: "*".into(),
                message: e.to_string(),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn two_gaussians_are_reproducible_and_balanced() {
        let spec = SyntheticSpec::new(SyntheticKind::TwoGaussians, 200, 3).with_seed(7);
        let a = generate_synthetic(&spec).unwrap();
        let b = generate_synthetic(&spec).unwrap();
        assert_eq!(a, b);
        let Labels::Class(labels) = a.labels() else { panic!() };
        let ones = labels.iter().filter(|&&y| y == 1).count() as i64;
        assert!((ones - (200 - ones)).abs() <= 1);
        assert_eq!(a.n_train() + a.n_test(), 200);
        assert_eq!(a.n_train(), 160);

        let c = generate_synthetic(&spec.clone().with_seed(8)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn rejects_empty_requests() {
        assert!(generate_synthetic(&SyntheticSpec::new(SyntheticKind::TwoGaussians, 0, 2)).is_err());
        assert!(generate_synthetic(&SyntheticSpec::new(SyntheticKind::LinearRegression, 3, 0)).is_err());
    }

    fn write_csv(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn csv_split_is_stable() {
        let f = write_csv("x1,x2,label\n0.5,1.0,0\n1.5,2.0,1\n-0.5,0.0,0\n3.0,1.0,1\n");
        let a = load_csv_dataset(f.path(), "label", 0.5, 42).unwrap();
        let b = load_csv_dataset(f.path(), "label", 0.5, 42).unwrap();
        assert_eq!(a, b);
        assert_eq!((a.n_train(), a.n_test()), (2, 2));
        assert_eq!(a.width(), 2);
        assert_eq!(a.n_classes(), Some(2));
    }

    #[test]
    fn csv_errors_name_location() {
        let f = write_csv("x1,x2,label\n0.5,1.0,0\n1.5,oops,1\n");
        match load_csv_dataset(f.path(), "label", 0.5, 0) {
            Err(Error::Parse { line, column, .. }) => {
                assert_eq!(line, 3);
                assert_eq!(column, "x2");
            }
            other => panic!("unexpected {other:?}"),
        }

        let f = write_csv("x1,x2,y\n0.5,1.0,0\n");
        match load_csv_dataset(f.path(), "label", 0.5, 0) {
            Err(Error::Config { key, .. }) => assert_eq!(key, "label_column"),
            other => panic!("unexpected {other:?}"),
        }

        assert!(matches!(
            load_csv_dataset("/nonexistent/data.csv", "label", 0.5, 0),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn real_labels_are_kept() {
        let f = write_csv("x,y\n1,0.25\n2,0.5\n");
        let d = load_csv_dataset(f.path(), "y", 1.0, 0).unwrap();
        assert!(matches!(d.labels(), Labels::Real(_)));
        assert_eq!(d.n_classes(), None);
    }
}
