//! Invariant suites behind `check <suite>`. Each measurement is a public
//! function so tests can hold it to a tolerance directly.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{fd_gradient, max_rel_error, ParamVector, Real, RngStream, DEFAULT_FD_STEP};
use crate::ode::{discretization_gap, richardson_ratio, DinFlowSpec};
use crate::optimizers::{
    inna_step, inna_step_reduced, DinadamConfig, DinadamDirectState, DinadamState, InnapropConfig, InnapropState,
    MomentumBuffer, MomentumForm, MomentumVariantState, NaiveInnapropState, ReferenceKind, ReferenceParams,
    ReferenceState,
};
use crate::problems::{
    initial_point, make_problem, shipped_specs, Activation, DataSource, Problem, ProblemKind, ProblemSpec,
    Quadratic, Rosenbrock, SyntheticKind, SyntheticSpec,
};
use crate::schedulers::ScheduleSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Equivalence,
    Gradients,
    Schedulers,
    Ode,
    Instability,
}

impl Suite {
    pub const ALL: [Suite; 5] = [
        Suite::Equivalence,
        Suite::Gradients,
        Suite::Schedulers,
        Suite::Ode,
        Suite::Instability,
    ];
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_string()))
            .map_err(|_| Error::config("suite", format!("unknown suite `{s}`")))
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = serde_json::to_value(self).ok();
        f.write_str(name.as_ref().and_then(|v| v.as_str()).unwrap_or("?"))
    }
}

/// How an observed value is compared with its limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bound {
    Below(f64),
    AtLeast(f64),
    Within(f64, f64),
}

impl Bound {
    pub fn holds(self, x: f64) -> bool {
        match self {
            Bound::Below(l) => x < l,
            Bound::AtLeast(l) => x >= l,
            Bound::Within(lo, hi) => (lo..=hi).contains(&x),
        }
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::Below(l) => write!(f, "< {l:e}"),
            Bound::AtLeast(l) => write!(f, ">= {l}"),
            Bound::Within(lo, hi) => write!(f, "in [{lo}, {hi}]"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckLine {
    pub name: String,
    pub observed: f64,
    pub bound: Bound,
    pub passed: bool,
}

impl CheckLine {
    pub fn new(name: impl Into<String>, observed: f64, bound: Bound) -> Self {
        Self {
            name: name.into(),
            observed,
            passed: bound.holds(observed),
            bound,
        }
    }
}

impl fmt::Display for CheckLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:<48} observed {:<12.4e} required {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.observed,
            self.bound
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub suite: Suite,
    pub lines: Vec<CheckLine>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.lines.iter().all(|l| l.passed)
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "suite {}", self.suite)?;
        for line in &self.lines {
            writeln!(f, "  {line}")?;
        }
        write!(f, "{}", if self.passed() { "all checks passed" } else { "some checks failed" })
    }
}

pub fn run_suite(suite: Suite) -> Result<CheckReport> {
    let lines = match suite {
        Suite::Equivalence => equivalence_lines()?,
        Suite::Gradients => gradient_lines()?,
        Suite::Schedulers => scheduler_lines()?,
        Suite::Ode => ode_lines()?,
        Suite::Instability => instability_lines()?,
    };
    Ok(CheckReport { suite, lines })
}

// ---------------------------------------------------------------------------
// problems used by the suites

pub fn rosenbrock() -> Rosenbrock {
    Rosenbrock::new(2).expect("dimension 2 is valid")
}

pub fn test_quadratic() -> Quadratic {
    Quadratic::new(vec![1.0, 2.0, 5.0, 10.0]).expect("positive spectrum")
}

/// Two-Gaussian classification with a `2-8-2` tanh network.
pub fn tiny_mlp(seed: u64) -> Box<dyn Problem> {
    let spec = ProblemSpec {
        kind: ProblemKind::TinyMlp,
        hidden: vec![8],
        activation: Activation::Tanh,
        data: DataSource::Synthetic(SyntheticSpec::new(SyntheticKind::TwoGaussians, 200, 2)),
        ..Default::default()
    };
    make_problem(&spec, seed).expect("valid problem")
}

fn start(problem: &dyn Problem) -> Vec<f64> {
    initial_point(problem, 0)
}

fn grad<T: Real>(problem: &dyn Problem, theta: &ParamVector<T>) -> ParamVector<T> {
    ParamVector::from_f64_slice(&problem.grad(&theta.to_f64_vec()))
}

/// Gap between two trajectories: the largest coordinate difference seen so far
/// over the largest coordinate magnitude seen so far. Normalizing per step
/// would blow up whenever an iterate passes through zero.
#[derive(Debug, Default)]
struct TrajectoryGap {
    diff: f64,
    scale: f64,
}

impl TrajectoryGap {
    fn new(a: &ParamVector, b: &ParamVector) -> Self {
        let mut gap = Self::default();
        gap.push(a, b);
        gap
    }

    fn push(&mut self, a: &ParamVector, b: &ParamVector) {
        for (x, y) in a.as_slice().iter().zip(b.as_slice()) {
            self.diff = self.diff.max((x - y).abs());
            self.scale = self.scale.max(y.abs());
        }
    }

    fn value(&self) -> f64 {
        self.diff / self.scale.max(f64::MIN_POSITIVE)
    }
}

// ---------------------------------------------------------------------------
// equivalences

/// Largest relative gap between INNAprop(α = β = 1) and AdamW(β1 = 0) iterates,
/// each following its own gradients from the same start.
pub fn adam_equivalence(problem: &dyn Problem, weight_decay: f64, steps: u64, gamma: f64) -> Result<f64> {
    let cfg = InnapropConfig {
        alpha: 1.0,
        beta: 1.0,
        sigma: 0.999,
        epsilon: 1e-8,
        weight_decay,
        bias_correction: true,
        grad_clip: None,
    };
    let params = ReferenceParams {
        beta1: 0.0,
        beta2: 0.999,
        epsilon: 1e-8,
        weight_decay,
        bias_correction: true,
        ..Default::default()
    };
    let theta0 = ParamVector::new(start(problem));
    let mut a = InnapropState::init(&cfg, theta0.clone())?;
    let mut b = ReferenceState::init(ReferenceKind::Adamw, &params, theta0)?;
    let mut gap = TrajectoryGap::default();
    for _ in 0..steps {
        let g = grad(problem, &a.theta);
        a = a.step(&g, gamma, &cfg)?;
        let g = grad(problem, &b.theta);
        b = b.step(&g, gamma, &params)?;
        gap.push(&a.theta, &b.theta);
    }
    Ok(gap.value())
}

/// Six-slot recursion against the three-slot form with a constant step.
pub fn naive_equivalence(problem: &dyn Problem, cfg: &InnapropConfig, steps: u64, gamma: f64) -> Result<f64> {
    let theta0 = ParamVector::new(start(problem));
    let g0 = grad(problem, &theta0);
    let mut reduced = InnapropState::init(cfg, theta0.clone())?.plain_step(&g0, gamma, cfg)?;
    let mut naive = NaiveInnapropState::bootstrap(cfg, theta0, &g0, gamma)?;
    let mut gap = TrajectoryGap::new(&naive.theta_curr, &reduced.theta);
    for _ in 1..steps {
        let g = grad(problem, &reduced.theta);
        reduced = reduced.plain_step(&g, gamma, cfg)?;
        let g = grad(problem, &naive.theta_curr);
        naive = naive.step(&g, gamma, cfg)?;
        gap.push(&naive.theta_curr, &reduced.theta);
    }
    Ok(gap.value())
}

/// INNA written with the old `ψ_k` against the memory-saving `ψ_{k+1}` form.
pub fn inna_equivalence(problem: &dyn Problem, alpha: f64, beta: f64, steps: u64, gamma: f64) -> Result<f64> {
    let mut t1 = ParamVector::new(start(problem));
    let mut p1 = t1.scale(1.0 - alpha * beta)?;
    let (mut t2, mut p2) = (t1.clone(), p1.clone());
    let mut gap = TrajectoryGap::default();
    for _ in 0..steps {
        let g1 = grad(problem, &t1);
        let g2 = grad(problem, &t2);
        inna_step(&mut t1, &mut p1, &g1, gamma, alpha, beta)?;
        inna_step_reduced(&mut t2, &mut p2, &g2, gamma, alpha, beta)?;
        gap.push(&t1, &t2);
    }
    Ok(gap.value())
}

/// Direct momentum buffer against the reduced `m̃` buffer, in f64.
pub fn momentum_equivalence(problem: &dyn Problem, cfg: &InnapropConfig, steps: u64, gamma: f64) -> Result<f64> {
    let theta0 = ParamVector::new(start(problem));
    let mut d = MomentumVariantState::init(cfg, theta0.clone(), MomentumForm::Direct)?;
    let mut r = MomentumVariantState::init(cfg, theta0, MomentumForm::Reduced)?;
    let mut gap = TrajectoryGap::default();
    for _ in 0..steps {
        let g = grad(problem, &d.theta);
        d = d.step(&g, gamma, cfg)?;
        let g = grad(problem, &r.theta);
        r = r.step(&g, gamma, cfg)?;
        gap.push(&d.theta, &r.theta);
    }
    Ok(gap.value())
}

/// DINAdam(α = 1, β = 0) against Adam without bias correction.
pub fn dinadam_adam_equivalence(problem: &dyn Problem, steps: u64, eta: f64) -> Result<f64> {
    let cfg = DinadamConfig {
        alpha: 1.0,
        beta: 0.0,
        ..Default::default()
    };
    let params = ReferenceParams {
        beta1: cfg.sigma1,
        beta2: cfg.sigma2,
        epsilon: cfg.epsilon,
        bias_correction: false,
        ..Default::default()
    };
    let theta0 = ParamVector::new(start(problem));
    let mut a = DinadamState::init(&cfg, theta0.clone())?;
    let mut b = ReferenceState::init(ReferenceKind::Adam, &params, theta0)?;
    let mut gap = TrajectoryGap::default();
    for _ in 0..steps {
        let g = grad(problem, &a.theta);
        a = a.step(&g, eta, &cfg)?;
        let g = grad(problem, &b.theta);
        b = b.step(&g, eta, &params)?;
        gap.push(&a.theta, &b.theta);
    }
    Ok(gap.value())
}

/// DINAdam direct form against the `m̃` form.
pub fn dinadam_forms_equivalence(problem: &dyn Problem, cfg: &DinadamConfig, steps: u64, eta: f64) -> Result<f64> {
    let theta0 = ParamVector::new(start(problem));
    let mut a = DinadamState::init(cfg, theta0.clone())?;
    let mut b = DinadamDirectState::init(cfg, theta0)?;
    let mut gap = TrajectoryGap::default();
    for _ in 0..steps {
        let g = grad(problem, &a.theta);
        a = a.step(&g, eta, cfg)?;
        let g = grad(problem, &b.theta);
        b = b.step(&g, eta, cfg)?;
        gap.push(&a.theta, &b.theta);
    }
    Ok(gap.value())
}

fn equivalence_lines() -> Result<Vec<CheckLine>> {
    let ros = rosenbrock();
    let quad = test_quadratic();
    let mlp = tiny_mlp(0);
    let plain = InnapropConfig::plain(0.1, 0.9, 0.999, 1e-8);
    let mut lines = Vec::new();
    for decay in [0.0, 0.01] {
        lines.push(CheckLine::new(
            format!("innaprop(1,1) = adamw(beta1=0), rosenbrock, wd={decay}"),
            adam_equivalence(&ros, decay, 1000, 1e-3)?,
            Bound::Below(1e-12),
        ));
        lines.push(CheckLine::new(
            format!("innaprop(1,1) = adamw(beta1=0), tiny mlp, wd={decay}"),
            adam_equivalence(mlp.as_ref(), decay, 1000, 1e-3)?,
            Bound::Below(1e-12),
        ));
    }
    for (name, p) in [("quadratic", &quad as &dyn Problem), ("rosenbrock", &ros)] {
        lines.push(CheckLine::new(
            format!("six-slot = three-slot innaprop, {name}"),
            naive_equivalence(p, &plain, 500, 1e-3)?,
            Bound::Below(1e-10),
        ));
    }
    lines.push(CheckLine::new(
        "inna psi_k form = psi_k+1 form, rosenbrock",
        inna_equivalence(&ros, 0.5, 0.1, 100, 1e-3)?,
        Bound::Below(1e-12),
    ));
    lines.push(CheckLine::new(
        "momentum direct = reduced, rosenbrock, f64",
        momentum_equivalence(&ros, &plain, 200, 1e-3)?,
        Bound::Below(1e-10),
    ));
    lines.push(CheckLine::new(
        "dinadam(1,0) = adam without bias correction",
        dinadam_adam_equivalence(&ros, 500, 1e-3)?,
        Bound::Below(1e-12),
    ));
    lines.push(CheckLine::new(
        "dinadam direct = m-tilde form",
        dinadam_forms_equivalence(&ros, &DinadamConfig::default(), 500, 1e-3)?,
        Bound::Below(1e-12),
    ));
    Ok(lines)
}

// ---------------------------------------------------------------------------
// gradients

/// Worst relative error of the analytic gradient against central differences
/// over `points` uniform draws from `[-1.5, 1.5]^p`.
pub fn gradient_error(problem: &dyn Problem, points: usize, seed: u64) -> Result<f64> {
    let mut rng = RngStream::new(seed, 0).generator();
    let mut worst: f64 = 0.0;
    for _ in 0..points {
        let theta: Vec<f64> = (0..problem.dim()).map(|_| rng.random_range(-1.5..1.5)).collect();
        let fd = fd_gradient(problem, &theta, DEFAULT_FD_STEP)?;
        worst = worst.max(max_rel_error(fd.as_slice(), &problem.grad(&theta), 1e-12));
    }
    Ok(worst)
}

fn gradient_lines() -> Result<Vec<CheckLine>> {
    shipped_specs()
        .iter()
        .map(|spec| {
            let p = make_problem(spec, 5)?;
            let label = match spec.kind {
                ProblemKind::TinyMlp => format!("{} ({:?})", p.name(), spec.activation).to_lowercase(),
                _ => p.name().to_string(),
            };
            Ok(CheckLine::new(
                format!("gradient vs central differences, {label}"),
                gradient_error(p.as_ref(), 100, 99)?,
                Bound::Below(1e-6),
            ))
        })
        .collect()
}

// ---------------------------------------------------------------------------
// schedulers

fn ulp(x: f64) -> f64 {
    let x = x.abs();
    if x == 0.0 {
        f64::from_bits(1)
    } else {
        f64::from_bits(x.to_bits() + 1) - x
    }
}

/// Largest deviation of the documented spot values, in ulps.
pub fn schedule_spot_error() -> Result<f64> {
    let cosine = ScheduleSpec::cosine(1e-3, 0.0, 200);
    let warm = ScheduleSpec::cosine_warmup(1e-3, 0.0, 30, 300, 300);
    let linear = ScheduleSpec::linear_warmup(2e-4, 500, 10_000);
    let cases = [
        (cosine.lr_at(0)?, 1e-3),
        (cosine.lr_at(200)?, 0.0),
        (cosine.lr_at(100)?, 5e-4),
        (warm.lr_at(15)?, 1e-3 / 2.0),
        (warm.lr_at(30)?, 1e-3),
        (linear.lr_at(10_000)?, 0.0),
    ];
    Ok(cases
        .iter()
        .map(|&(got, want)| (got - want).abs() / ulp(want))
        .fold(0.0, f64::max))
}

/// Largest deviation of consecutive warmup increments from `γ0 / T_warmup`,
/// in ulps of the later value, for a ramp of length `t_warmup`.
pub fn warmup_linearity_error(spec: &ScheduleSpec) -> Result<f64> {
    let span = spec.t_warmup as f64;
    let mut worst: f64 = 0.0;
    for k in 2..spec.t_warmup {
        let (a, b) = (spec.lr_at(k - 1)?, spec.lr_at(k)?);
        // b − a is exact here (Sterbenz); the fma gives (b − a)·T − γ0 with one rounding
        let residual = (b - a).mul_add(span, -spec.gamma0).abs() / span;
        worst = worst.max(residual / ulp(b));
    }
    Ok(worst)
}

/// Number of steps on which a cosine branch increases.
pub fn cosine_increases(spec: &ScheduleSpec, from: u64, to: u64) -> Result<u64> {
    let mut count = 0;
    for k in from + 1..=to {
        if spec.lr_at(k)? > spec.lr_at(k - 1)? {
            count += 1;
        }
    }
    Ok(count)
}

fn scheduler_lines() -> Result<Vec<CheckLine>> {
    let mut lines = vec![CheckLine::new(
        "spot values (ulps)",
        schedule_spot_error()?,
        Bound::Below(1.0 + 1e-9),
    )];
    let mut linear_worst: f64 = 0.0;
    for (g0, tw, tmax) in [(1e-3, 30, 300), (6e-4, 500, 5000), (2e-4, 500, 10_000), (0.1, 7, 20)] {
        linear_worst = linear_worst.max(warmup_linearity_error(&ScheduleSpec::cosine_warmup(
            g0, 0.0, tw, tmax, tmax,
        ))?);
        linear_worst = linear_worst.max(warmup_linearity_error(&ScheduleSpec::linear_warmup(g0, tw, tmax))?);
    }
    lines.push(CheckLine::new(
        "warmup increments constant (ulps)",
        linear_worst,
        Bound::Below(1.0 + 1e-9),
    ));
    let mut rises = 0;
    for (g0, gmin, tmax) in [(1e-3, 0.0, 200), (0.5, 1e-3, 1000), (6e-4, 6e-5, 5000)] {
        rises += cosine_increases(&ScheduleSpec::cosine(g0, gmin, tmax), 0, tmax)?;
    }
    let warm = ScheduleSpec::cosine_warmup(6e-4, 6e-5, 500, 4000, 5000);
    rises += cosine_increases(&warm, 500, 5000)?;
    lines.push(CheckLine::new(
        "cosine increases (count)",
        rises as f64,
        Bound::Below(0.5),
    ));
    Ok(lines)
}

// ---------------------------------------------------------------------------
// ode

fn ode_quadratic() -> Quadratic {
    Quadratic::new(vec![1.0, 4.0]).expect("positive spectrum")
}

/// RK4 self-convergence ratio on the quadratic with `(α, β) = (0.5, 0.5)`.
pub fn ode_richardson() -> Result<f64> {
    let q = ode_quadratic();
    let spec = DinFlowSpec {
        alpha: 0.5,
        beta: 0.5,
        problem: &q,
        t_end: 4.0,
        dt: 0.1,
    };
    richardson_ratio(&spec, &[1.0, -1.0])
}

/// `gap(γ) / gap(γ/2)` for INNA against the flow on the quadratic.
pub fn ode_gap_halving(gamma: f64) -> Result<f64> {
    let q = ode_quadratic();
    let spec = DinFlowSpec {
        alpha: 0.5,
        beta: 0.5,
        problem: &q,
        t_end: 2.0,
        dt: 1e-3,
    };
    let theta0 = [1.0, -1.0];
    Ok(discretization_gap(&spec, gamma, &theta0)? / discretization_gap(&spec, gamma / 2.0, &theta0)?)
}

fn ode_lines() -> Result<Vec<CheckLine>> {
    Ok(vec![
        CheckLine::new("rk4 richardson ratio", ode_richardson()?, Bound::Within(8.0, 32.0)),
        CheckLine::new("inna vs flow gap halving ratio", ode_gap_halving(0.02)?, Bound::Within(1.5, 3.0)),
    ])
}

// ---------------------------------------------------------------------------
// instability

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StagnationReport {
    /// Share of `m̃` coordinate updates in f32 that left the value bit-identical.
    pub noop_fraction_f32: f64,
    pub f32_initial_loss: f64,
    pub f32_final_loss: f64,
    pub f64_initial_loss: f64,
    pub f64_final_loss: f64,
}

impl StagnationReport {
    pub fn f64_decreases(&self) -> bool {
        self.f64_final_loss < self.f64_initial_loss
    }
}

fn momentum_run<T: Real>(problem: &dyn Problem, cfg: &InnapropConfig, gamma: f64, steps: u64) -> Result<(f64, f64, f64)> {
    let theta0 = start(problem);
    let mut s = MomentumVariantState::init(cfg, ParamVector::<T>::from_f64_slice(&theta0), MomentumForm::Reduced)?;
    let (mut noops, mut total) = (0u64, 0u64);
    for _ in 0..steps {
        let before = match &s.buffer {
            MomentumBuffer::Reduced { m_tilde } => m_tilde.clone(),
            MomentumBuffer::Direct { m, .. } => m.clone(),
        };
        let g = grad(problem, &s.theta);
        s = s.step(&g, gamma, cfg)?;
        let MomentumBuffer::Reduced { m_tilde } = &s.buffer else {
            unreachable!("reduced form requested")
        };
        for (a, b) in before.iter().zip(m_tilde) {
            total += 1;
            if Real::to_f64(*a).to_bits() == Real::to_f64(*b).to_bits() {
                noops += 1;
            }
        }
    }
    let initial = problem.loss(&theta0);
    let last = problem.loss(&s.theta.to_f64_vec());
    Ok((noops as f64 / total.max(1) as f64, initial, last))
}

/// Runs the reduced momentum variant on Rosenbrock from `(−1.2, 1)` with
/// `(α, β) = (0.1, 0.9)` and `γ = 1e-4` in both precisions.
pub fn momentum_stagnation(steps: u64) -> Result<StagnationReport> {
    let p = rosenbrock();
    let cfg = InnapropConfig::plain(0.1, 0.9, 0.999, 1e-8);
    let (noop_fraction_f32, f32_initial_loss, f32_final_loss) = momentum_run::<f32>(&p, &cfg, 1e-4, steps)?;
    let (_, f64_initial_loss, f64_final_loss) = momentum_run::<f64>(&p, &cfg, 1e-4, steps)?;
    Ok(StagnationReport {
        noop_fraction_f32,
        f32_initial_loss,
        f32_final_loss,
        f64_initial_loss,
        f64_final_loss,
    })
}

fn instability_lines() -> Result<Vec<CheckLine>> {
    let r = momentum_stagnation(2000)?;
    Ok(vec![
        CheckLine::new(
            "f32 momentum variant: m-tilde no-op share",
            r.noop_fraction_f32,
            Bound::AtLeast(0.9),
        ),
        CheckLine::new(
            "f64 twin: final loss / initial loss",
            r.f64_final_loss / r.f64_initial_loss,
            Bound::Below(1.0),
        ),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.to_string().parse::<Suite>().unwrap(), s);
        }
        assert!("everything".parse::<Suite>().is_err());
    }

    #[test]
    fn bounds() {
        assert!(Bound::Below(1.0).holds(0.5) && !Bound::Below(1.0).holds(1.0));
        assert!(Bound::AtLeast(0.9).holds(0.9));
        assert!(Bound::Within(8.0, 32.0).holds(16.0) && !Bound::Within(8.0, 32.0).holds(33.0));
    }

    #[test]
    fn scheduler_suite_passes() {
        let r = run_suite(Suite::Schedulers).unwrap();
        assert!(r.passed(), "{r}");
    }
}
