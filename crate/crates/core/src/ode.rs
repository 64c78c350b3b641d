//! The continuous inertial Newton flow in first-order form,
//!
//! ```text
//! θ̇ = −(α − 1/β)θ − ψ/β − β∇J(θ)
//! ψ̇ = −(α − 1/β)θ − ψ/β
//! ```
//!
//! integrated with classical RK4. The Hessian never appears: the damping term
//! is carried by `ψ`. The explicit Euler step of this system is INNA, so the
//! gap between the two measures how faithfully the discrete method tracks it.

use crate::error::{Error, Result};
use crate::numerics::ParamVector;
use crate::optimizers::inna_step;
use crate::problems::Problem;

#[derive(Clone, Copy)]
pub struct DinFlowSpec<'a> {
    pub alpha: f64,
    pub beta: f64,
    pub problem: &'a dyn Problem,
    pub t_end: f64,
    pub dt: f64,
}

impl std::fmt::Debug for DinFlowSpec<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DinFlowSpec")
            .field("alpha", &self.alpha)
            .field("beta", &self.beta)
            .field("problem", &self.problem.name())
            .field("t_end", &self.t_end)
            .field("dt", &self.dt)
            .finish()
    }
}

impl DinFlowSpec<'_> {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha >= 0.0) || !self.alpha.is_finite() {
            return Err(Error::contract(format!("alpha must be >= 0, got {}", self.alpha)));
        }
        if !(self.beta > 0.0) || !self.beta.is_finite() {
            return Err(Error::contract(format!("beta must be > 0, got {}", self.beta)));
        }
        if !(self.t_end > 0.0) || !self.t_end.is_finite() {
            return Err(Error::contract(format!("t_end must be positive, got {}", self.t_end)));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::contract(format!("dt must be positive, got {}", self.dt)));
        }
        Ok(())
    }

    /// `ψ0 = (1 − αβ)θ0`, the choice that makes critical points equilibria.
    pub fn default_psi0(&self, theta0: &[f64]) -> Vec<f64> {
        let c = 1.0 - self.alpha * self.beta;
        theta0.iter().map(|t| c * t).collect()
    }
}

/// Number of steps of size `step` that cover `span`, if it divides it.
fn whole_steps(span: f64, step: f64) -> Result<usize> {
    let n = (span / step).round();
    if n < 1.0 || ((n * step - span).abs() > 1e-9 * span.max(step)) {
        return Err(Error::contract(format!("step {step} does not divide {span}")));
    }
    Ok(n as usize)
}

/// Right-hand side of the flow. One gradient call, no Hessian.
pub fn din_rhs(theta: &[f64], psi: &[f64], spec: &DinFlowSpec<'_>) -> Result<(Vec<f64>, Vec<f64>)> {
    if theta.len() != psi.len() {
        return Err(Error::DimensionMismatch {
            expected: theta.len(),
            actual: psi.len(),
        });
    }
    if theta.len() != spec.problem.dim() {
        return Err(Error::DimensionMismatch {
            expected: spec.problem.dim(),
            actual: theta.len(),
        });
    }
    let grad = spec.problem.grad(theta);
    if grad.iter().any(|g| !g.is_finite()) {
        return Err(Error::domain("non-finite gradient in the flow right-hand side"));
    }
    // −(α − 1/β)θ − ψ/β == ((1 − αβ)θ − ψ)/β
    let anchor = 1.0 - spec.alpha * spec.beta;
    let mut dtheta = Vec::with_capacity(theta.len());
    let mut dpsi = Vec::with_capacity(theta.len());
    for i in 0..theta.len() {
        let drift = (anchor * theta[i] - psi[i]) / spec.beta;
        dpsi.push(drift);
        dtheta.push(drift - spec.beta * grad[i]);
    }
    Ok((dtheta, dpsi))
}

/// Samples of `(t, θ(t), ψ(t))` at every integrator step, including `t = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub theta: Vec<Vec<f64>>,
    pub psi: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_theta(&self) -> &[f64] {
        self.theta.last().map_or(&[], Vec::as_slice)
    }
}

fn axpy(x: &[f64], a: f64, d: &[f64]) -> Vec<f64> {
    x.iter().zip(d).map(|(x, d)| x + a * d).collect()
}

fn rk4_step(theta: &mut [f64], psi: &mut [f64], h: f64, spec: &DinFlowSpec<'_>) -> Result<()> {
    let (k1t, k1p) = din_rhs(theta, psi, spec)?;
    let (k2t, k2p) = din_rhs(&axpy(theta, h / 2.0, &k1t), &axpy(psi, h / 2.0, &k1p), spec)?;
    let (k3t, k3p) = din_rhs(&axpy(theta, h / 2.0, &k2t), &axpy(psi, h / 2.0, &k2p), spec)?;
    let (k4t, k4p) = din_rhs(&axpy(theta, h, &k3t), &axpy(psi, h, &k3p), spec)?;
    for i in 0..theta.len() {
        theta[i] += h / 6.0 * (k1t[i] + 2.0 * k2t[i] + 2.0 * k3t[i] + k4t[i]);
        psi[i] += h / 6.0 * (k1p[i] + 2.0 * k2p[i] + 2.0 * k3p[i] + k4p[i]);
    }
    Ok(())
}

/// Integrates from `(θ0, ψ0)` to `t_end` with fixed step `dt`; `ψ0` defaults
/// to `(1 − αβ)θ0`.
pub fn rk4_integrate(spec: &DinFlowSpec<'_>, theta0: &[f64], psi0: Option<&[f64]>) -> Result<Trajectory> {
    spec.validate()?;
    let n = whole_steps(spec.t_end, spec.dt)?;
    let mut theta = theta0.to_vec();
    let mut psi = match psi0 {
        Some(p) => p.to_vec(),
        None => spec.default_psi0(theta0),
    };
    let mut traj = Trajectory {
        times: Vec::with_capacity(n + 1),
        theta: Vec::with_capacity(n + 1),
        psi: Vec::with_capacity(n + 1),
    };
    traj.times.push(0.0);
    traj.theta.push(theta.clone());
    traj.psi.push(psi.clone());
    for k in 1..=n {
        rk4_step(&mut theta, &mut psi, spec.dt, spec)?;
        if theta.iter().chain(&psi).any(|x| !x.is_finite()) {
            return Err(Error::Divergence { step: k as u64 });
        }
        traj.times.push(k as f64 * spec.dt);
        traj.theta.push(theta.clone());
        traj.psi.push(psi.clone());
    }
    Ok(traj)
}

/// Observed self-convergence ratio `|x_h − x_{h/2}| / |x_{h/2} − x_{h/4}|`
/// of the final `θ`, with `h = spec.dt`. Close to 16 for a fourth-order scheme.
pub fn richardson_ratio(spec: &DinFlowSpec<'_>, theta0: &[f64]) -> Result<f64> {
    let at = |dt: f64| -> Result<Vec<f64>> {
        let s = DinFlowSpec { dt, ..*spec };
        Ok(rk4_integrate(&s, theta0, None)?.final_theta().to_vec())
    };
    let (a, b, c) = (at(spec.dt)?, at(spec.dt / 2.0)?, at(spec.dt / 4.0)?);
    Ok(dist(&a, &b) / dist(&b, &c))
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// `max_k ‖θ_INNA(k) − θ_flow(kγ)‖` over `kγ ≤ t_end`, both started from
/// `θ0` and `ψ0 = (1 − αβ)θ0`. The flow is integrated with RK4 at the
/// largest step no greater than `spec.dt` that divides `gamma`.
pub fn discretization_gap(spec: &DinFlowSpec<'_>, gamma: f64, theta0: &[f64]) -> Result<f64> {
    spec.validate()?;
    if !(gamma > 0.0) || gamma >= spec.beta {
        return Err(Error::WellPosedness { gamma, beta: spec.beta });
    }
    let steps = whole_steps(spec.t_end, gamma)?;
    let substeps = (gamma / spec.dt).ceil().max(1.0) as usize;
    let h = gamma / substeps as f64;

    let mut flow_theta = theta0.to_vec();
    let mut flow_psi = spec.default_psi0(theta0);
    let mut theta = ParamVector::from_f64_slice(theta0);
    let mut psi = ParamVector::new(flow_psi.clone());

    let mut gap: f64 = 0.0;
    for k in 1..=steps {
        let g = ParamVector::new(spec.problem.grad(theta.as_slice()));
        inna_step(&mut theta, &mut psi, &g, gamma, spec.alpha, spec.beta)
            .map_err(|_| Error::Divergence { step: k as u64 })?;
        for _ in 0..substeps {
            rk4_step(&mut flow_theta, &mut flow_psi, h, spec)?;
        }
        if flow_theta.iter().any(|x| !x.is_finite()) {
            return Err(Error::Divergence { step: k as u64 });
        }
        gap = gap.max(dist(theta.as_slice(), &flow_theta));
    }
    Ok(gap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::Quadratic;

    fn spec(problem: &dyn Problem, alpha: f64, beta: f64, t_end: f64, dt: f64) -> DinFlowSpec<'_> {
        DinFlowSpec {
            alpha,
            beta,
            problem,
            t_end,
            dt,
        }
    }

    #[test]
    fn rhs_literal_example() {
        let q = Quadratic::new(vec![1.0]).unwrap();
        let s = spec(&q, 1.0, 1.0, 1.0, 0.1);
        let (dt, dp) = din_rhs(&[1.0], &[0.0], &s).unwrap();
        assert_eq!(dt, vec![-1.0]);
        assert_eq!(dp, vec![0.0]);
    }

    #[test]
    fn equilibrium_at_critical_point() {
        let q = Quadratic::new(vec![1.0, 3.0]).unwrap();
        let s = spec(&q, 0.3, 1.7, 1.0, 0.1);
        let (dt, dp) = din_rhs(&[0.0, 0.0], &[0.0, 0.0], &s).unwrap();
        assert!(dt.iter().chain(&dp).all(|x| *x == 0.0));
        let (dt, _) = din_rhs(&[0.5, 0.0], &s.default_psi0(&[0.5, 0.0]), &s).unwrap();
        assert!(dt[0] != 0.0);
    }

    #[test]
    fn dpsi_ignores_the_gradient() {
        let a = Quadratic::new(vec![1.0, 1.0]).unwrap();
        let b = Quadratic::new(vec![10.0, 0.1]).unwrap();
        let (_, pa) = din_rhs(&[0.4, -0.2], &[1.0, 2.0], &spec(&a, 0.5, 0.5, 1.0, 0.1)).unwrap();
        let (_, pb) = din_rhs(&[0.4, -0.2], &[1.0, 2.0], &spec(&b, 0.5, 0.5, 1.0, 0.1)).unwrap();
        assert_eq!(pa, pb);
    }

    #[test]
    fn loss_decays_along_the_flow() {
        let q = Quadratic::new(vec![1.0, 4.0]).unwrap();
        let s = spec(&q, 1.0, 1.0, 10.0, 0.01);
        let traj = rk4_integrate(&s, &[1.0, 1.0], None).unwrap();
        assert_eq!(traj.len(), 1001);
        assert!(q.loss(traj.final_theta()) < q.loss(&[1.0, 1.0]));
    }

    #[test]
    fn dt_must_divide_horizon() {
        let q = Quadratic::new(vec![1.0]).unwrap();
        assert!(rk4_integrate(&spec(&q, 1.0, 1.0, 1.0, 0.3), &[1.0], None).is_err());
    }

    #[test]
    fn tiny_step_gap_is_small() {
        let q = Quadratic::new(vec![1.0, 10.0]).unwrap();
        let s = spec(&q, 0.5, 0.5, 1.0, 1e-4);
        let gap = discretization_gap(&s, 1e-4, &[1.0, 1.0]).unwrap();
        assert!(gap < 1e-3, "gap {gap}");
    }

    struct Flat;

    impl Problem for Flat {
        fn name(&self) -> &str {
            "flat"
        }
        fn dim(&self) -> usize {
            2
        }
        fn loss(&self, _: &[f64]) -> f64 {
            0.0
        }
        fn grad(&self, theta: &[f64]) -> Vec<f64> {
            vec![0.0; theta.len()]
        }
        fn initial_point(&self, _: &mut rand_chacha::ChaCha8Rng) -> Vec<f64> {
            vec![0.0; 2]
        }
    }

    #[test]
    fn zero_gradient_gap_is_zero() {
        let s = spec(&Flat, 0.5, 0.9, 1.0, 0.01);
        let traj = rk4_integrate(&s, &[1.0, -2.0], None).unwrap();
        assert!(traj.theta.iter().all(|t| t == &[1.0, -2.0]));
        assert_eq!(discretization_gap(&s, 0.1, &[1.0, -2.0]).unwrap(), 0.0);
    }
}
