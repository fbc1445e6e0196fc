//! Inner solvers for `min_{x∈X} L_N(x, λ)` at fixed duals.
//!
//! All randomized solvers share the estimator
//!
//! ```text
//! G(y, φ, I) = A_I(y) - φ_I + Σ_i q_i φ_i,   A_i = (℘_i/q_i) B_i,   I ~ q
//! ```
//!
//! with `φ ≡ 0` for SGD and `φ_i = A_i(anchor)` for SVRG. SVRG proxies are
//! kept implicitly as the anchor point and the full gradient there.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::{AugmentedLagrangian, BoxBounds};
use crate::sampling::{variance_ratio, DistributionSource, SamplerKind, SamplingDistribution, SolverRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubroutineKind {
    Sgd,
    Svrg,
    FullGradient,
}

impl std::str::FromStr for SubroutineKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sgd" => Ok(SubroutineKind::Sgd),
            "svrg" => Ok(SubroutineKind::Svrg),
            "full" | "full_gradient" => Ok(SubroutineKind::FullGradient),
            other => Err(Error::config(format!(
                "unknown subroutine {other:?}, expected sgd, svrg or full"
            ))),
        }
    }
}

impl SubroutineKind {
    pub fn label(self) -> &'static str {
        match self {
            SubroutineKind::Sgd => "RanNLR-SGD",
            SubroutineKind::Svrg => "RanNLR-SVRG",
            SubroutineKind::FullGradient => "NLR-full-gradient",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepMode {
    /// Step sizes from the convergence theorems, computed from `mu_f`, `L`
    /// and the variance ratio.
    Theory,
    #[default]
    Constant,
}

/// Which distribution the inner solver samples constraints from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingPolicy {
    #[default]
    DualProportional,
    Uniform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SubroutineSpec {
    pub kind: SubroutineKind,
    pub step_mode: StepMode,
    pub constant_step: f64,
    /// SVRG epoch length `M` in inner iterations.
    pub epoch_length: u64,
    pub check_interval: u64,
    pub max_inner_iters: u64,
    pub sampling: SamplingPolicy,
    pub sampler: SamplerKind,
}

impl Default for SubroutineSpec {
    fn default() -> Self {
        SubroutineSpec {
            kind: SubroutineKind::Svrg,
            step_mode: StepMode::Constant,
            constant_step: 1e-4,
            epoch_length: 20,
            check_interval: 1000,
            max_inner_iters: 1_000_000,
            sampling: SamplingPolicy::DualProportional,
            sampler: SamplerKind::Cumulative,
        }
    }
}

impl SubroutineSpec {
    pub fn validate(&self) -> Result<()> {
        if self.step_mode == StepMode::Constant && !(self.constant_step > 0.0 && self.constant_step.is_finite()) {
            return Err(Error::config(format!(
                "constant_step must be positive, got {}",
                self.constant_step
            )));
        }
        if self.epoch_length == 0 {
            return Err(Error::config("epoch_length must be at least 1"));
        }
        if self.check_interval == 0 {
            return Err(Error::config("check_interval must be at least 1"));
        }
        if self.max_inner_iters == 0 {
            return Err(Error::config("max_inner_iters must be at least 1"));
        }
        Ok(())
    }
}

/// `L_N(·, λ)` together with the distribution `q` that indices are drawn from.
pub struct InnerProblem<'a> {
    lag: AugmentedLagrangian<'a>,
    q: SamplingDistribution,
    ratio: f64,
}

impl<'a> InnerProblem<'a> {
    pub fn new(lag: AugmentedLagrangian<'a>, q: SamplingDistribution) -> Result<Self> {
        let p = SamplingDistribution::scaled(lag.dual());
        let ratio = variance_ratio(&p, &q)?;
        Ok(InnerProblem { lag, q, ratio })
    }

    /// Samples from `℘(λ)` or the uniform distribution per `policy`.
    pub fn with_policy(lag: AugmentedLagrangian<'a>, policy: SamplingPolicy, sampler: SamplerKind) -> Result<Self> {
        let q = match policy {
            SamplingPolicy::DualProportional => SamplingDistribution::scaled(lag.dual()),
            SamplingPolicy::Uniform => SamplingDistribution::uniform(lag.dual().len())?,
        };
        Self::new(lag, q.with_sampler(sampler))
    }

    pub fn lagrangian(&self) -> &AugmentedLagrangian<'a> {
        &self.lag
    }

    pub fn distribution(&self) -> &SamplingDistribution {
        &self.q
    }

    /// `r^Q` for the sampling distribution in use.
    pub fn variance_ratio(&self) -> f64 {
        self.ratio
    }

    pub fn dim(&self) -> usize {
        self.lag.dim()
    }

    /// `℘_i/q_i`, exactly 1 under dual-proportional sampling.
    #[inline]
    pub fn importance_weight(&self, i: usize) -> f64 {
        if self.q.source() == DistributionSource::DualProportional {
            1.0
        } else {
            self.lag.dual().weight(i) / self.q.prob(i)
        }
    }

    /// `A_i(x) = (℘_i/q_i) B_i(x)` into `out`; `scratch` has length `n`.
    #[inline]
    pub fn scaled_operator_into(&self, i: usize, x: &[f64], out: &mut [f64], scratch: &mut [f64]) -> Result<()> {
        self.lag.component_into(i, x, out, scratch)?;
        let w = self.importance_weight(i);
        if w != 1.0 {
            for o in out.iter_mut() {
                *o *= w;
            }
        }
        Ok(())
    }

    pub fn scaled_operator(&self, i: usize, x: &[f64]) -> Result<Vec<f64>> {
        let n = self.dim();
        if x.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: x.len() });
        }
        let mut out = vec![0.0; n];
        let mut scratch = vec![0.0; n];
        self.scaled_operator_into(i, x, &mut out, &mut scratch)?;
        Ok(out)
    }
}

/// Convenience wrapper for [`InnerProblem::scaled_operator`].
pub fn scaled_operator(inner: &InnerProblem<'_>, i: usize, x: &[f64]) -> Result<Vec<f64>> {
    inner.scaled_operator(i, x)
}

#[derive(Debug, Clone, PartialEq)]
enum Proxies {
    Zero,
    Anchored(Vec<f64>),
    Explicit(Vec<Vec<f64>>),
}

/// Proxy variables `φ` and the cached sum `Σ_i q_i φ_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorState {
    proxies: Proxies,
    mean: Vec<f64>,
}

impl EstimatorState {
    /// `φ ≡ 0`, the SGD estimator.
    pub fn zero(n: usize) -> Self {
        EstimatorState {
            proxies: Proxies::Zero,
            mean: vec![0.0; n],
        }
    }

    /// `φ_i = A_i(anchor)` for all `i`; the cached sum is the full gradient
    /// `∇L_N(anchor)`.
    pub fn anchored(inner: &InnerProblem<'_>, anchor: &[f64]) -> Result<Self> {
        let mean = inner.lag.gradient(anchor)?;
        Ok(Self::anchored_with_gradient(anchor.to_vec(), mean))
    }

    fn anchored_with_gradient(anchor: Vec<f64>, full_gradient: Vec<f64>) -> Self {
        EstimatorState {
            proxies: Proxies::Anchored(anchor),
            mean: full_gradient,
        }
    }

    /// Arbitrary per-index proxies, one vector of length `n` per constraint.
    pub fn explicit(inner: &InnerProblem<'_>, proxies: Vec<Vec<f64>>) -> Result<Self> {
        let m = inner.q.len();
        let n = inner.dim();
        if proxies.len() != m {
            return Err(Error::DimensionMismatch { expected: m, got: proxies.len() });
        }
        let mut mean = vec![0.0; n];
        for (i, phi) in proxies.iter().enumerate() {
            if phi.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: phi.len() });
            }
            let qi = inner.q.prob(i);
            for (a, v) in mean.iter_mut().zip(phi) {
                *a += qi * v;
            }
        }
        Ok(EstimatorState {
            proxies: Proxies::Explicit(proxies),
            mean,
        })
    }

    /// `Σ_i q_i φ_i`
    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn anchor(&self) -> Option<&[f64]> {
        match &self.proxies {
            Proxies::Anchored(a) => Some(a),
            _ => None,
        }
    }

    /// `φ_i`, materialized.
    pub fn proxy(&self, inner: &InnerProblem<'_>, i: usize) -> Result<Vec<f64>> {
        match &self.proxies {
            Proxies::Zero => Ok(vec![0.0; self.mean.len()]),
            Proxies::Anchored(anchor) => inner.scaled_operator(i, anchor),
            Proxies::Explicit(p) => p
                .get(i)
                .cloned()
                .ok_or(Error::IndexOutOfRange { index: i, len: p.len() }),
        }
    }
}

/// Scratch buffers for [`gradient_estimator_into`].
pub struct EstimatorBuffers {
    a: Vec<f64>,
    b: Vec<f64>,
    scratch: Vec<f64>,
}

impl EstimatorBuffers {
    pub fn new(n: usize) -> Self {
        EstimatorBuffers {
            a: vec![0.0; n],
            b: vec![0.0; n],
            scratch: vec![0.0; n],
        }
    }
}

/// `G(y, φ, i) = A_i(y) - φ_i + Σ_j q_j φ_j` into `out`.
pub fn gradient_estimator_into(
    inner: &InnerProblem<'_>,
    y: &[f64],
    state: &EstimatorState,
    i: usize,
    out: &mut [f64],
    buf: &mut EstimatorBuffers,
) -> Result<()> {
    inner.scaled_operator_into(i, y, &mut buf.a, &mut buf.scratch)?;
    match &state.proxies {
        Proxies::Zero => out.copy_from_slice(&buf.a),
        Proxies::Anchored(anchor) => {
            inner.scaled_operator_into(i, anchor, &mut buf.b, &mut buf.scratch)?;
            for ((o, a), (b, c)) in out.iter_mut().zip(&buf.a).zip(buf.b.iter().zip(&state.mean)) {
                *o = (a - b) + c;
            }
        }
        Proxies::Explicit(p) => {
            for ((o, a), (b, c)) in out.iter_mut().zip(&buf.a).zip(p[i].iter().zip(&state.mean)) {
                *o = (a - b) + c;
            }
        }
    }
    Ok(())
}

pub fn gradient_estimator(inner: &InnerProblem<'_>, y: &[f64], state: &EstimatorState, i: usize) -> Result<Vec<f64>> {
    let n = inner.dim();
    if y.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: y.len() });
    }
    let mut out = vec![0.0; n];
    let mut buf = EstimatorBuffers::new(n);
    gradient_estimator_into(inner, y, state, i, &mut out, &mut buf)?;
    Ok(out)
}

/// Componentwise clamp onto the box.
pub fn project_box(x: &[f64], bounds: &BoxBounds) -> Vec<f64> {
    bounds.project(x)
}

/// Decreasing SGD step `γ_t = 2 / (μ (t + 2(1+2r) L²/μ²))`.
pub fn sgd_stepsize(t: u64, mu_f: f64, lipschitz: f64, r: f64) -> f64 {
    2.0 / (mu_f * (t as f64 + 2.0 * (1.0 + 2.0 * r) * lipschitz * lipschitz / (mu_f * mu_f)))
}

fn svrg_factor(epoch_length: u64, r: f64) -> f64 {
    1.0 + 2.0 * r + 2.0 * epoch_length as f64 * r
}

/// `γ* = μ / ((1 + 2r + 2Mr) L²)`, the minimizer of [`svrg_contraction`].
pub fn svrg_stepsize(mu_f: f64, lipschitz: f64, epoch_length: u64, r: f64) -> f64 {
    mu_f / (svrg_factor(epoch_length, r) * lipschitz * lipschitz)
}

/// `α(γ) = 1 - 2γμ + (1 + 2r + 2Mr) γ² L²`.
pub fn svrg_contraction(gamma: f64, mu_f: f64, lipschitz: f64, epoch_length: u64, r: f64) -> f64 {
    1.0 - 2.0 * gamma * mu_f + svrg_factor(epoch_length, r) * gamma * gamma * lipschitz * lipschitz
}

/// Rejects steps for which the SVRG contraction factor is not below one.
pub fn check_svrg_step(gamma: f64, mu_f: f64, lipschitz: f64, epoch_length: u64, r: f64) -> Result<()> {
    let upper = 2.0 * mu_f / (svrg_factor(epoch_length, r) * lipschitz * lipschitz);
    if !(gamma > 0.0 && gamma < upper) {
        return Err(Error::config(format!(
            "SVRG step {gamma} outside the admissible interval (0, {upper})"
        )));
    }
    Ok(())
}

/// How long an inner run lasts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InnerBudget {
    /// Until the stationarity tolerance is met or `max_inner_iters` is hit.
    Adaptive,
    /// Exactly this many iterations, then record the achieved norm.
    Fixed(u64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct InnerOutcome {
    pub x: Vec<f64>,
    pub iterations: u64,
    /// Stationarity norm at `x`.
    pub achieved: f64,
    pub converged: bool,
}

enum Step {
    Constant(f64),
    Sgd { mu: f64, l: f64, r: f64 },
}

impl Step {
    #[inline]
    fn at(&self, t: u64) -> f64 {
        match *self {
            Step::Constant(g) => g,
            Step::Sgd { mu, l, r } => sgd_stepsize(t, mu, l, r),
        }
    }
}

fn step_policy(inner: &InnerProblem<'_>, spec: &SubroutineSpec) -> Result<Step> {
    if spec.step_mode == StepMode::Constant {
        return Ok(Step::Constant(spec.constant_step));
    }
    let p = inner.lag.problem();
    let (mu, l, r) = (p.mu_f(), p.lipschitz_grad(), inner.ratio);
    if mu <= 0.0 {
        return Err(Error::config("theory step sizes require mu_f > 0"));
    }
    Ok(match spec.kind {
        SubroutineKind::Sgd => Step::Sgd { mu, l, r },
        SubroutineKind::Svrg => Step::Constant(svrg_stepsize(mu, l, spec.epoch_length, r)),
        SubroutineKind::FullGradient => Step::Constant(1.0 / l),
    })
}

#[inline]
fn projected_step(y: &mut [f64], g: &[f64], gamma: f64, bounds: &BoxBounds, t: u64) -> Result<()> {
    for (v, d) in y.iter_mut().zip(g) {
        *v -= gamma * d;
    }
    bounds.project_in_place(y);
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteIterate { iteration: t });
    }
    Ok(())
}

/// Runs the subroutine from `start` (projected onto the box first).
///
/// In adaptive mode the stationarity norm is checked before the first
/// step, every `check_interval` steps, and additionally at every SVRG epoch
/// boundary (where the full gradient is already available).
pub fn run_inner(
    inner: &InnerProblem<'_>,
    spec: &SubroutineSpec,
    start: &[f64],
    eps: f64,
    budget: InnerBudget,
    rng: &mut SolverRng,
) -> Result<InnerOutcome> {
    spec.validate()?;
    let n = inner.dim();
    if start.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: start.len() });
    }
    if !(eps > 0.0) {
        return Err(Error::config(format!("inner eps must be positive, got {eps}")));
    }
    let step = step_policy(inner, spec)?;
    let lag = &inner.lag;
    let bounds = lag.problem().bounds();
    let adaptive = budget == InnerBudget::Adaptive;
    let limit = match budget {
        InnerBudget::Adaptive => spec.max_inner_iters,
        InnerBudget::Fixed(j) => j,
    };

    let mut y = bounds.project(start);
    let mut grad = vec![0.0; n];
    let mut est = vec![0.0; n];
    let mut buf = EstimatorBuffers::new(n);

    let done = |y: Vec<f64>, t: u64, achieved: f64| InnerOutcome {
        x: y,
        iterations: t,
        achieved,
        converged: achieved <= eps,
    };

    match spec.kind {
        SubroutineKind::FullGradient => {
            for t in 0..limit {
                lag.gradient_into(&y, &mut grad)?;
                if adaptive {
                    let s = lag.stationarity_from_gradient(&y, &grad);
                    if s <= eps {
                        return Ok(done(y, t, s));
                    }
                }
                projected_step(&mut y, &grad, step.at(t), bounds, t)?;
            }
        }
        SubroutineKind::Sgd => {
            let state = EstimatorState::zero(n);
            for t in 0..limit {
                if adaptive && t % spec.check_interval == 0 {
                    lag.gradient_into(&y, &mut grad)?;
                    let s = lag.stationarity_from_gradient(&y, &grad);
                    if s <= eps {
                        return Ok(done(y, t, s));
                    }
                }
                let i = inner.q.draw(rng);
                gradient_estimator_into(inner, &y, &state, i, &mut est, &mut buf)?;
                projected_step(&mut y, &est, step.at(t), bounds, t)?;
            }
        }
        SubroutineKind::Svrg => {
            let m_len = spec.epoch_length;
            let mut state = EstimatorState::zero(n);
            for t in 0..limit {
                if t % m_len == 0 {
                    lag.gradient_into(&y, &mut grad)?;
                    if adaptive {
                        let s = lag.stationarity_from_gradient(&y, &grad);
                        if s <= eps {
                            return Ok(done(y, t, s));
                        }
                    }
                    state = EstimatorState::anchored_with_gradient(y.clone(), grad.clone());
                } else if adaptive && t % spec.check_interval == 0 {
                    lag.gradient_into(&y, &mut grad)?;
                    let s = lag.stationarity_from_gradient(&y, &grad);
                    if s <= eps {
                        return Ok(done(y, t, s));
                    }
                }
                let i = inner.q.draw(rng);
                gradient_estimator_into(inner, &y, &state, i, &mut est, &mut buf)?;
                projected_step(&mut y, &est, step.at(t), bounds, t)?;
            }
        }
    }

    lag.gradient_into(&y, &mut grad)?;
    let s = lag.stationarity_from_gradient(&y, &grad);
    Ok(done(y, limit, s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::testing::{tiny, QuadraticLinear};
    use crate::problem::{DualState, ProblemInstance};
    use crate::rescaling::RescalingFunction;
    use crate::sampling::stream_rng;
    use std::sync::Arc;

    #[test]
    fn sgd_step_examples() {
        assert!((sgd_stepsize(0, 1.0, 1.0, 1.0) - 1.0 / 3.0).abs() < 1e-15);
        let steps: Vec<f64> = (0..50).map(|t| sgd_stepsize(t, 0.5, 3.0, 1.7)).collect();
        assert!(steps.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn svrg_step_examples() {
        let g = svrg_stepsize(1.0, 10.0, 20, 1.0);
        assert!((g - 1.0 / 4300.0).abs() < 1e-18);
        let a = svrg_contraction(g, 1.0, 10.0, 20, 1.0);
        assert!((a - (1.0 - 1.0 / 4300.0)).abs() < 1e-15);
        assert!(check_svrg_step(g, 1.0, 10.0, 20, 1.0).is_ok());
        assert!(check_svrg_step(2.0 / 4300.0, 1.0, 10.0, 20, 1.0).is_err());
        assert!(check_svrg_step(0.0, 1.0, 10.0, 20, 1.0).is_err());
    }

    #[test]
    fn svrg_optimal_step_minimizes_contraction() {
        let (mu, l, m, r) = (0.7, 4.0, 15, 1.3);
        let best = svrg_contraction(svrg_stepsize(mu, l, m, r), mu, l, m, r);
        let upper = 2.0 * mu / ((1.0 + 2.0 * r + 2.0 * m as f64 * r) * l * l);
        for k in 1..1000 {
            let g = upper * k as f64 / 1000.0;
            assert!(svrg_contraction(g, mu, l, m, r) >= best - 1e-15);
        }
    }

    #[test]
    fn dual_proportional_ratio_is_exactly_one() {
        let p = tiny();
        let psi = RescalingFunction::default();
        let d = DualState::new(vec![0.3]).unwrap();
        let lag = AugmentedLagrangian::new(&p, &psi, &d, 2.0).unwrap();
        let inner = InnerProblem::with_policy(lag, SamplingPolicy::DualProportional, SamplerKind::Cumulative).unwrap();
        assert_eq!(inner.variance_ratio(), 1.0);
        assert_eq!(inner.scaled_operator(0, &[0.4]).unwrap(), lag.component_operator(0, &[0.4]).unwrap());
    }

    fn two_constraint() -> ProblemInstance {
        let oracle = QuadraticLinear {
            mu: 1.0,
            center: vec![1.0, 2.0],
            a: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            b: vec![0.5, 3.0],
        };
        ProblemInstance::new("two", Arc::new(oracle), BoxBounds::uniform(2, -5.0, 5.0).unwrap(), 1.0, 10.0).unwrap()
    }

    #[test]
    fn uniform_sampling_halves_operator() {
        let p = two_constraint();
        let psi = RescalingFunction::default();
        let d = DualState::new(vec![1.0, 3.0]).unwrap();
        let lag = AugmentedLagrangian::new(&p, &psi, &d, 1.0).unwrap();
        let inner = InnerProblem::with_policy(lag, SamplingPolicy::Uniform, SamplerKind::Cumulative).unwrap();
        let x = [0.2, -0.1];
        let b = lag.component_operator(0, &x).unwrap();
        let a = inner.scaled_operator(0, &x).unwrap();
        for (ai, bi) in a.iter().zip(&b) {
            assert!((ai - 0.5 * bi).abs() < 1e-15);
        }
        assert!((inner.variance_ratio() - 1.25).abs() < 1e-15);
    }

    #[test]
    fn anchored_estimator_at_anchor_is_full_gradient() {
        let p = two_constraint();
        let psi = RescalingFunction::default();
        let d = DualState::new(vec![1.0, 3.0]).unwrap();
        let lag = AugmentedLagrangian::new(&p, &psi, &d, 4.0).unwrap();
        let inner = InnerProblem::with_policy(lag, SamplingPolicy::Uniform, SamplerKind::Cumulative).unwrap();
        let y = [0.3, 0.9];
        let state = EstimatorState::anchored(&inner, &y).unwrap();
        for i in 0..2 {
            assert_eq!(gradient_estimator(&inner, &y, &state, i).unwrap(), state.mean());
        }
    }

    #[test]
    fn full_gradient_finds_unconstrained_minimizer() {
        // Constraints slack at the center so L_N is nearly the quadratic.
        let oracle = QuadraticLinear {
            mu: 2.0,
            center: vec![0.5, -0.25],
            a: vec![vec![0.0, 0.0]],
            b: vec![1.0],
        };
        let p = ProblemInstance::new("q", Arc::new(oracle), BoxBounds::uniform(2, -5.0, 5.0).unwrap(), 2.0, 2.0).unwrap();
        let psi = RescalingFunction::default();
        let d = DualState::ones(1);
        let lag = AugmentedLagrangian::new(&p, &psi, &d, 1.0).unwrap();
        let inner = InnerProblem::with_policy(lag, SamplingPolicy::DualProportional, SamplerKind::Cumulative).unwrap();
        let spec = SubroutineSpec {
            kind: SubroutineKind::FullGradient,
            constant_step: 0.1,
            ..Default::default()
        };
        let out = run_inner(&inner, &spec, &[3.0, 3.0], 1e-9, InnerBudget::Adaptive, &mut stream_rng(0, 0)).unwrap();
        assert!(out.converged);
        assert!((out.x[0] - 0.5).abs() < 1e-6 && (out.x[1] + 0.25).abs() < 1e-6);
    }

    #[test]
    fn svrg_started_at_optimum_stays() {
        let oracle = QuadraticLinear {
            mu: 2.0,
            center: vec![0.5],
            a: vec![vec![0.0], vec![0.0]],
            b: vec![1.0, 2.0],
        };
        let p = ProblemInstance::new("q", Arc::new(oracle), BoxBounds::uniform(1, -5.0, 5.0).unwrap(), 2.0, 2.0).unwrap();
        let psi = RescalingFunction::default();
        let d = DualState::ones(2);
        let lag = AugmentedLagrangian::new(&p, &psi, &d, 1.0).unwrap();
        let inner = InnerProblem::with_policy(lag, SamplingPolicy::DualProportional, SamplerKind::Cumulative).unwrap();
        let spec = SubroutineSpec::default();
        let out = run_inner(&inner, &spec, &[0.5], 1e-12, InnerBudget::Fixed(1), &mut stream_rng(0, 0)).unwrap();
        assert_eq!(out.x, vec![0.5]);
    }

    #[test]
    fn theory_mode_rejects_zero_mu() {
        let oracle = QuadraticLinear {
            mu: 0.0,
            center: vec![0.0],
            a: vec![vec![1.0]],
            b: vec![1.0],
        };
        let p = ProblemInstance::new("lin", Arc::new(oracle), BoxBounds::uniform(1, -1.0, 1.0).unwrap(), 0.0, 1.0).unwrap();
        let psi = RescalingFunction::default();
        let d = DualState::ones(1);
        let lag = AugmentedLagrangian::new(&p, &psi, &d, 1.0).unwrap();
        let inner = InnerProblem::with_policy(lag, SamplingPolicy::DualProportional, SamplerKind::Cumulative).unwrap();
        let spec = SubroutineSpec {
            step_mode: StepMode::Theory,
            ..Default::default()
        };
        let err = run_inner(&inner, &spec, &[0.0], 1e-3, InnerBudget::Adaptive, &mut stream_rng(0, 0)).unwrap_err();
        assert!(err.is_config_error());
    }
}
