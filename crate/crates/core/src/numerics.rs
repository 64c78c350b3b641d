//! Dense parameter vectors, precision control, seeded random streams and
//! finite-difference gradient checks.
//!
//! All optimizer algebra in this crate is coordinatewise over a
//! [`ParamVector`]. The scalar type carries the precision: `ParamVector<f64>`
//! is the default, `ParamVector<f32>` exists to reproduce single-precision
//! round-off effects.

use std::fmt::{Debug, Display};
use std::ops::Index;

use num_traits::{Float, NumAssignOps};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problems::Problem;

/// Default central-difference step.
pub const DEFAULT_FD_STEP: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    F32,
    #[default]
    F64,
}

impl Display for Precision {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Precision::F32 => f.write_str("f32"),
            Precision::F64 => f.write_str("f64"),
        }
    }
}

/// Floating-point scalar usable as a parameter coordinate.
pub trait Real:
    Float + NumAssignOps + Debug + Display + Default + Send + Sync + 'static
{
    const PRECISION: Precision;

    fn from_f64(x: f64) -> Self;
    fn to_f64(self) -> f64;
}

impl Real for f32 {
    const PRECISION: Precision = Precision::F32;

    #[inline]
    fn from_f64(x: f64) -> Self {
        x as f32
    }

    #[inline]
    fn to_f64(self) -> f64 {
        self as f64
    }
}

impl Real for f64 {
    const PRECISION: Precision = Precision::F64;

    #[inline]
    fn from_f64(x: f64) -> Self {
        x
    }

    #[inline]
    fn to_f64(self) -> f64 {
        self
    }
}

/// Dense real vector of model parameters with a fixed dimension.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ParamVector<T: Real = f64> {
    data: Vec<T>,
}

impl<T: Real> ParamVector<T> {
    pub fn new(data: Vec<T>) -> Self {
        Self { data }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            data: vec![T::zero(); dim],
        }
    }

    pub fn filled(dim: usize, value: T) -> Self {
        Self {
            data: vec![value; dim],
        }
    }

    /// Rounds an `f64` vector into this precision.
    pub fn from_f64_slice(values: &[f64]) -> Self {
        Self {
            data: values.iter().map(|&x| T::from_f64(x)).collect(),
        }
    }

    pub fn to_f64_vec(&self) -> Vec<f64> {
        self.data.iter().map(|&x| Real::to_f64(x)).collect()
    }

    pub fn dim(&self) -> usize {
        self.data.len()
    }

    pub fn precision(&self) -> Precision {
        T::PRECISION
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    pub fn iter(&self) -> std::slice::Iter<'_, T> {
        self.data.iter()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn norm2(&self) -> T {
        self.data
            .iter()
            .fold(T::zero(), |acc, &x| acc + x * x)
            .sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.data
            .iter()
            .fold(T::zero(), |acc, &x| acc.max(x.abs()))
    }

    pub fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: other.dim(),
            });
        }
        Ok(())
    }

    fn finish(data: Vec<T>, what: &str) -> Result<Self> {
        let out = Self { data };
        if !out.is_finite() {
            return Err(Error::domain(format!("{what} produced a non-finite value")));
        }
        Ok(out)
    }

    fn zip_with(&self, other: &Self, what: &str, f: impl Fn(T, T) -> T) -> Result<Self> {
        self.check_dim(other)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Self::finish(data, what)
    }

    fn map_with(&self, what: &str, f: impl Fn(T) -> T) -> Result<Self> {
        Self::finish(self.data.iter().map(|&a| f(a)).collect(), what)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, "add", |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, "sub", |a, b| a - b)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, "mul", |a, b| a * b)
    }

    /// Coordinatewise quotient; any zero divisor is a domain error.
    pub fn div(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        if let Some(i) = other.data.iter().position(|x| x.is_zero()) {
            return Err(Error::domain(format!("division by zero at coordinate {i}")));
        }
        self.zip_with(other, "div", |a, b| a / b)
    }

    pub fn sqrt(&self) -> Result<Self> {
        if let Some(i) = self.data.iter().position(|x| *x < T::zero()) {
            return Err(Error::domain(format!("sqrt of negative value at coordinate {i}")));
        }
        self.map_with("sqrt", |a| a.sqrt())
    }

    pub fn scale(&self, c: T) -> Result<Self> {
        self.map_with("scale", |a| a * c)
    }

    pub fn add_scalar(&self, c: T) -> Result<Self> {
        self.map_with("add_scalar", |a| a + c)
    }
}

impl<T: Real> Index<usize> for ParamVector<T> {
    type Output = T;

    fn index(&self, i: usize) -> &T {
        &self.data[i]
    }
}

impl<T: Real> From<Vec<T>> for ParamVector<T> {
    fn from(data: Vec<T>) -> Self {
        Self { data }
    }
}

impl<'a, T: Real> IntoIterator for &'a ParamVector<T> {
    type Item = &'a T;
    type IntoIter = std::slice::Iter<'a, T>;

    fn into_iter(self) -> Self::IntoIter {
        self.data.iter()
    }
}

/// Rescales `g` onto the ball of radius `max_norm` when it lies outside.
pub fn global_norm_clip<T: Real>(g: &ParamVector<T>, max_norm: f64) -> Result<ParamVector<T>> {
    if !(max_norm > 0.0) {
        return Err(Error::contract(format!("max_norm must be positive, got {max_norm}")));
    }
    let mut out = g.clone();
    clip_in_place(&mut out, max_norm);
    Ok(out)
}

pub(crate) fn clip_in_place<T: Real>(g: &mut ParamVector<T>, max_norm: f64) {
    let limit = T::from_f64(max_norm);
    let norm = g.norm2();
    if norm <= limit {
        return;
    }
    let original = g.clone();
    let mut c = limit / norm;
    loop {
        for (x, &o) in g.as_mut_slice().iter_mut().zip(original.as_slice()) {
            *x = o * c;
        }
        // rounding can leave the product a hair above the limit
        if g.norm2() <= limit {
            break;
        }
        c = c * (T::one() - T::epsilon());
    }
}

/// Central-difference gradient of `problem`'s full-batch loss, in `f64`.
pub fn fd_gradient(problem: &dyn Problem, theta: &[f64], h: f64) -> Result<ParamVector<f64>> {
    if !(h > 0.0) {
        return Err(Error::contract(format!("finite-difference step must be positive, got {h}")));
    }
    if theta.len() != problem.dim() {
        return Err(Error::DimensionMismatch {
            expected: problem.dim(),
            actual: theta.len(),
        });
    }
    let mut probe = theta.to_vec();
    let mut grad = Vec::with_capacity(theta.len());
    for i in 0..theta.len() {
        let x = theta[i];
        probe[i] = x + h;
        let up = problem.loss(&probe);
        probe[i] = x - h;
        let down = problem.loss(&probe);
        probe[i] = x;
        if !up.is_finite() || !down.is_finite() {
            return Err(Error::domain(format!("non-finite loss while probing coordinate {i}")));
        }
        grad.push((up - down) / (2.0 * h));
    }
    Ok(ParamVector::new(grad))
}

/// `max_i |a_i - b_i| / max(max_i |b_i|, floor)`.
pub fn max_rel_error(a: &[f64], b: &[f64], floor: f64) -> f64 {
    let diff = a
        .iter()
        .zip(b)
        .fold(0.0f64, |acc, (x, y)| acc.max((x - y).abs()));
    let scale = b.iter().fold(0.0f64, |acc, y| acc.max(y.abs()));
    diff / scale.max(floor)
}

/// Reproducible random stream keyed by `(seed, stream_id)`.
///
/// Streams with different ids are independent ChaCha8 streams over the same
/// key, so the draws of one never depend on how many others are in use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    pub fn generator(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{Quadratic, Rosenbrock};
    use proptest::prelude::*;
    use rand::Rng;

    #[test]
    fn sqrt_of_exact_squares() {
        let v = ParamVector::new(vec![4.0, 9.0]);
        assert_eq!(v.sqrt().unwrap().as_slice(), &[2.0, 3.0]);
    }

    #[test]
    fn adding_zero_scaled_vector_is_identity() {
        let a = ParamVector::new(vec![1.0, 2.0]);
        let b = ParamVector::new(vec![123.0, -7.5]).scale(0.0).unwrap();
        assert_eq!(a.add(&b).unwrap(), a);
    }

    #[test]
    fn division_by_rms_denominator() {
        // 1 / (sqrt(4) + 1e-8), frozen from a 50-digit evaluation
        let num = ParamVector::new(vec![1.0]);
        let den = ParamVector::new(vec![4.0]).sqrt().unwrap().add_scalar(1e-8).unwrap();
        let q = num.div(&den).unwrap();
        let expected = 0.499_999_997_500_000_012_5_f64;
        assert!((q[0] - expected).abs() <= f64::EPSILON * expected);
    }

    #[test]
    fn errors_on_mismatch_and_zero_divisor() {
        let a = ParamVector::new(vec![1.0, 2.0]);
        let b = ParamVector::new(vec![1.0]);
        assert!(matches!(a.add(&b), Err(Error::DimensionMismatch { .. })));
        let z = ParamVector::new(vec![1.0, 0.0]);
        assert!(matches!(a.div(&z), Err(Error::Domain(_))));
    }

    #[test]
    fn clip_examples() {
        let g = ParamVector::new(vec![3.0, 4.0]);
        assert_eq!(global_norm_clip(&g, 10.0).unwrap(), g);
        let c = global_norm_clip(&g, 1.0).unwrap();
        assert!((c[0] - 0.6).abs() < 1e-15 && (c[1] - 0.8).abs() < 1e-15);
        let z = ParamVector::<f64>::zeros(2);
        assert_eq!(global_norm_clip(&z, 0.5).unwrap(), z);
        assert!(global_norm_clip(&g, 0.0).is_err());
    }

    #[test]
    fn fd_gradient_examples() {
        let q = Quadratic::new(vec![1.0, 1.0]).unwrap();
        let g = fd_gradient(&q, &[1.0, -2.0], 1e-5).unwrap();
        assert!((g[0] - 1.0).abs() < 1e-9 && (g[1] + 2.0).abs() < 1e-9);

        let r = Rosenbrock::new(2).unwrap();
        let g = fd_gradient(&r, &[1.0, 1.0], 1e-5).unwrap();
        assert!(g.max_abs() < 1e-6);
    }

    #[test]
    fn rng_streams_are_reproducible_and_distinct() {
        let draws = |s: RngStream| -> Vec<u64> {
            let mut rng = s.generator();
            (0..8).map(|_| rng.random()).collect()
        };
        let a = draws(RngStream::new(7, 3));
        let b = draws(RngStream::new(7, 3));
        let c = draws(RngStream::new(7, 4));
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn rng_streams_do_not_interfere_across_threads() {
        let serial: Vec<u64> = (0..16u64)
            .map(|s| RngStream::new(11, s).generator().random())
            .collect();
        let parallel: Vec<u64> = std::thread::scope(|scope| {
            let handles: Vec<_> = (0..16u64)
                .map(|s| scope.spawn(move || RngStream::new(11, s).generator().random::<u64>()))
                .collect();
            handles.into_iter().map(|h| h.join().unwrap()).collect()
        });
        assert_eq!(serial, parallel);
    }

    proptest! {
        #[test]
        fn integer_valued_arithmetic_is_exact(xs in prop::collection::vec(-1000i32..1000, 1..16)) {
            let a: ParamVector<f32> = ParamVector::new(xs.iter().map(|&x| x as f32).collect());
            let b: ParamVector<f32> = ParamVector::new(xs.iter().map(|&x| (x / 3) as f32).collect());
            let s = a.add(&b).unwrap();
            let d = a.sub(&b).unwrap();
            let m = a.mul(&b).unwrap();
            for i in 0..xs.len() {
                let (x, y) = (xs[i] as i64, (xs[i] / 3) as i64);
                prop_assert_eq!(s[i] as i64, x + y);
                prop_assert_eq!(d[i] as i64, x - y);
                prop_assert_eq!(m[i] as i64, x * y);
            }
            let sq = a.mul(&a).unwrap().sqrt().unwrap();
            for i in 0..xs.len() {
                prop_assert_eq!(sq[i] as i64, (xs[i] as i64).abs());
            }
        }

        #[test]
        fn clip_is_idempotent(xs in prop::collection::vec(-1e3f64..1e3, 1..32), c in 1e-3f64..1e2) {
            let g = ParamVector::new(xs);
            let once = global_norm_clip(&g, c).unwrap();
            let twice = global_norm_clip(&once, c).unwrap();
            prop_assert!(once.norm2() <= c);
            prop_assert_eq!(once.as_slice().iter().map(|x| x.to_bits()).collect::<Vec<_>>(),
                            twice.as_slice().iter().map(|x| x.to_bits()).collect::<Vec<_>>());
        }
    }

    #[test]
    fn clip_respects_limit_in_f32() {
        let mut rng = RngStream::new(3, 0).generator();
        for _ in 0..200 {
            let g: ParamVector<f32> = ParamVector::new((0..17).map(|_| rng.random_range(-50.0..50.0)).collect());
            let c = global_norm_clip(&g, 1.0).unwrap();
            assert!(c.norm2() <= 1.0);
        }
    }
}
