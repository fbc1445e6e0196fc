//! The outer RanNLR loop: inexact primal minimization of `L_N(·, λ^k)`
//! followed by the multiplicative dual update `λ^{k+1} = λ^k ψ'(N g(x^{k+1}))`.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::{max_violation, AugmentedLagrangian, DualState, ProblemInstance};
use crate::report::{relative_gap, IterationRecord, RunReport};
use crate::rescaling::RescalingFunction;
use crate::sampling::stream_rng;
use crate::subroutines::{run_inner, InnerBudget, InnerProblem, SubroutineKind, SubroutineSpec};

/// Number of outer iterations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OuterIterations {
    Fixed(usize),
    /// `K` from the outer-iteration formula; needs theory constants.
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BudgetMode {
    /// Inner runs stop once the stationarity tolerance is verified.
    #[default]
    Adaptive,
    /// Inner runs last exactly the theoretical budget `J_k`.
    Theory,
}

/// Analysis constants, supplied by the user for theory mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TheoryConstants {
    pub c_r: f64,
    pub c_phi: f64,
    /// Sublinear rate constants `A`, `B`.
    pub a: f64,
    pub b: f64,
    /// Linear rate constants `ζ`, `α`.
    pub zeta: f64,
    pub alpha: f64,
    /// Estimate of `‖λ⁰ - λ*‖_∞`.
    pub lambda_star_gap: f64,
    /// Estimate of `‖x⁰ - x*‖_∞`.
    pub x_star_gap: f64,
}

impl TheoryConstants {
    fn validate(&self) -> Result<()> {
        let positive = [
            ("c_r", self.c_r),
            ("c_phi", self.c_phi),
            ("zeta", self.zeta),
            ("lambda_star_gap", self.lambda_star_gap),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::config(format!("theory constant {name} must be positive, got {v}")));
            }
        }
        for (name, v) in [("a", self.a), ("b", self.b), ("x_star_gap", self.x_star_gap)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::config(format!("theory constant {name} must be >= 0, got {v}")));
            }
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::config(format!("theory constant alpha must lie in (0, 1), got {}", self.alpha)));
        }
        Ok(())
    }
}

/// Initial duals: one value for every constraint, or explicit values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Lambda0 {
    Constant(f64),
    Values(Vec<f64>),
}

impl Default for Lambda0 {
    fn default() -> Self {
        Lambda0::Constant(1.0)
    }
}

impl Lambda0 {
    pub fn build(&self, m: usize) -> Result<DualState> {
        match self {
            Lambda0::Constant(v) => DualState::constant(m, *v),
            Lambda0::Values(v) if v.len() != m => Err(Error::DimensionMismatch { expected: m, got: v.len() }),
            Lambda0::Values(v) => DualState::new(v.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Scaling parameter `N`.
    pub scaling: f64,
    pub outer_iterations: OuterIterations,
    /// Inner stationarity tolerance.
    pub eps: f64,
    pub delta: f64,
    /// Final accuracy used by the outer-iteration formula.
    pub target_eps: f64,
    pub subroutine: SubroutineSpec,
    pub budget_mode: BudgetMode,
    pub theory_constants: Option<TheoryConstants>,
    pub lambda0: Lambda0,
    /// Starting point; the box center when absent.
    pub x0: Option<Vec<f64>>,
    pub master_seed: u64,
    pub warm_start: bool,
    /// Abort after this many consecutive outer iterations whose inner
    /// stationarity exceeds `stall_factor * eps`.
    pub stall_patience: usize,
    pub stall_factor: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            scaling: 100.0,
            outer_iterations: OuterIterations::Fixed(50),
            eps: 1e-4,
            delta: 0.1,
            target_eps: 1e-3,
            subroutine: SubroutineSpec::default(),
            budget_mode: BudgetMode::Adaptive,
            theory_constants: None,
            lambda0: Lambda0::default(),
            x0: None,
            master_seed: 0,
            warm_start: true,
            stall_patience: 3,
            stall_factor: 10.0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.scaling > 0.0 && self.scaling.is_finite()) {
            return Err(Error::config(format!("scaling N must be positive, got {}", self.scaling)));
        }
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(Error::config(format!("eps must be positive, got {}", self.eps)));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::config(format!("delta must lie in (0, 1), got {}", self.delta)));
        }
        if !(self.target_eps > 0.0 && self.target_eps.is_finite()) {
            return Err(Error::config(format!("target_eps must be positive, got {}", self.target_eps)));
        }
        if self.stall_patience == 0 || !(self.stall_factor >= 1.0) {
            return Err(Error::config("stall_patience must be >= 1 and stall_factor >= 1"));
        }
        self.subroutine.validate()?;
        let needs_constants =
            self.budget_mode == BudgetMode::Theory || self.outer_iterations == OuterIterations::Auto;
        match (&self.theory_constants, needs_constants) {
            (None, true) => Err(Error::config(
                "theory budget mode and automatic outer iterations require theory_constants",
            )),
            (Some(c), _) => c.validate(),
            (None, false) => Ok(()),
        }
    }

    /// The number of outer iterations this configuration runs.
    pub fn resolve_outer_iterations(&self) -> Result<usize> {
        match self.outer_iterations {
            OuterIterations::Fixed(k) => Ok(k),
            OuterIterations::Auto => {
                let c = self
                    .theory_constants
                    .as_ref()
                    .ok_or_else(|| Error::config("automatic outer iterations require theory_constants"))?;
                outer_iterations_for(self.target_eps, self.scaling, c.c_r, c.lambda_star_gap)
            }
        }
    }
}

/// `λ'_i = λ_i ψ'(N g_i(x))`. Entries that underflow are held at
/// [`crate::problem::DUAL_FLOOR`].
pub fn dual_update(
    dual: &DualState,
    x: &[f64],
    problem: &ProblemInstance,
    psi: &RescalingFunction,
    scaling: f64,
) -> Result<DualState> {
    if dual.len() != problem.num_constraints() {
        return Err(Error::DimensionMismatch { expected: problem.num_constraints(), got: dual.len() });
    }
    let g = problem.constraint_values(x);
    let mut next = Vec::with_capacity(g.len());
    for (i, (l, gi)) in dual.lambda().iter().zip(&g).enumerate() {
        let d = psi.psi_d1(scaling * gi);
        if !d.is_finite() {
            return Err(Error::NonFinite { what: "rescaling derivative", index: Some(i) });
        }
        next.push(l * d);
    }
    DualState::from_updated(next)
}

fn check_contraction(scaling: f64, c_r: f64) -> Result<f64> {
    if !(scaling > c_r) {
        return Err(Error::config(format!("scaling N = {scaling} must exceed c_R = {c_r}")));
    }
    Ok(c_r / scaling)
}

/// `K = ⌈ln(2‖λ⁰ - λ*‖_∞ / ε) / ln(N / c_R)⌉`, at least 1.
pub fn outer_iterations_for(target_eps: f64, scaling: f64, c_r: f64, lambda_gap: f64) -> Result<usize> {
    check_contraction(scaling, c_r)?;
    if !(target_eps > 0.0 && lambda_gap > 0.0) {
        return Err(Error::config("target_eps and lambda_gap must be positive"));
    }
    let k = ((2.0 * lambda_gap / target_eps).ln() / (scaling / c_r).ln()).ceil();
    Ok(if k < 1.0 { 1 } else { k as usize })
}

/// Inner tolerance `(1 - c_R/N) ε / (4 C_Φ)` that yields final accuracy `ε`.
pub fn inner_eps_for(target_eps: f64, scaling: f64, c_r: f64, c_phi: f64) -> Result<f64> {
    let ratio = check_contraction(scaling, c_r)?;
    if !(c_phi > 0.0) {
        return Err(Error::config("c_phi must be positive"));
    }
    Ok((1.0 - ratio) * target_eps / (4.0 * c_phi))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateKind {
    /// `E‖y_t - x*‖² ≤ (A‖y_0 - x*‖² + B)/t`, as for SGD.
    Sublinear,
    /// `E‖y_t - x*‖² ≤ ζ α^t ‖y_0 - x*‖²`, as for SVRG (t in epochs).
    Linear,
}

impl RateKind {
    pub fn of(kind: SubroutineKind) -> Self {
        match kind {
            SubroutineKind::Sgd => RateKind::Sublinear,
            SubroutineKind::Svrg | SubroutineKind::FullGradient => RateKind::Linear,
        }
    }
}

/// Inputs of [`theory_budget`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BudgetQuery {
    /// Outer iteration `k` (0-based).
    pub k: usize,
    /// Total outer iterations `K`.
    pub outer_iterations: usize,
    pub eps: f64,
    pub delta: f64,
    pub n: usize,
    /// Bound on the component Lipschitz constant `L_N(λ^k)`.
    pub lipschitz: f64,
    pub scaling: f64,
    pub rate: RateKind,
}

/// Number of inner iterations (epochs for the linear rate) after which
/// the inner tolerance holds with probability `(1 - δ)^{1/K}`.
pub fn theory_budget(q: &BudgetQuery, c: &TheoryConstants) -> Result<u64> {
    c.validate()?;
    if q.outer_iterations == 0 {
        return Err(Error::config("theory budget needs K >= 1"));
    }
    if !(q.eps > 0.0) || !(q.delta > 0.0 && q.delta < 1.0) {
        return Err(Error::config("theory budget needs eps > 0 and delta in (0, 1)"));
    }
    let denom = (1.0 - (1.0 - q.delta).powf(1.0 / q.outer_iterations as f64)) * q.eps * q.eps;
    let l2 = q.lipschitz * q.lipschitz;
    let n = q.n as f64;
    // Bound on E‖y_0 - x*(λ^k)‖² entering the inner rate.
    let distance = if q.k == 0 {
        let ratio = c.c_r / q.scaling;
        c.x_star_gap.powi(2) + ratio.powi(2) * c.lambda_star_gap.powi(2)
    } else {
        let ratio = check_contraction(q.scaling, c.c_r)?;
        let radius = 2.0 * c.c_phi * q.eps / (1.0 - ratio) + ratio.powi(q.k as i32) * c.lambda_star_gap;
        (1.0 + ratio * ratio) * radius * radius
    };
    let j = match q.rate {
        RateKind::Sublinear => (l2 * (n * c.a * distance + c.b) / denom).ceil(),
        RateKind::Linear => ((n * c.zeta * l2 * distance / denom).ln() / (1.0 / c.alpha).ln()).ceil(),
    };
    Ok(if j.is_nan() || j < 1.0 { 1 } else { j as u64 })
}

/// Read-only view of the solver state after each outer iteration.
pub struct OuterSnapshot<'a> {
    pub k: usize,
    pub x: &'a [f64],
    /// Duals after the update at iteration `k`.
    pub dual: &'a DualState,
    pub record: &'a IterationRecord,
}

pub fn solve(problem: &ProblemInstance, psi: &RescalingFunction, cfg: &SolverConfig) -> Result<RunReport> {
    solve_with_observer(problem, psi, cfg, |_| {})
}

/// Runs the outer loop, calling `observer` after every dual update.
pub fn solve_with_observer<F>(
    problem: &ProblemInstance,
    psi: &RescalingFunction,
    cfg: &SolverConfig,
    mut observer: F,
) -> Result<RunReport>
where
    F: FnMut(&OuterSnapshot<'_>),
{
    cfg.validate()?;
    let big_k = cfg.resolve_outer_iterations()?;
    let m = problem.num_constraints();
    let n = problem.dim();
    let mut dual = cfg.lambda0.build(m)?;
    let x0 = match &cfg.x0 {
        Some(x) if x.len() != n => return Err(Error::DimensionMismatch { expected: n, got: x.len() }),
        Some(x) if x.iter().any(|v| !v.is_finite()) => {
            return Err(Error::config("x0 must be finite"));
        }
        Some(x) => x.clone(),
        None => problem.bounds().center(),
    };
    let reference = problem.reference().map(|r| r.objective);
    let spec = &cfg.subroutine;
    let start = Instant::now();

    let mut x = x0.clone();
    let mut records = Vec::with_capacity(big_k);
    let mut cum = 0u64;
    let mut stalled = 0usize;

    for k in 0..big_k {
        let lag = AugmentedLagrangian::new(problem, psi, &dual, cfg.scaling)?;
        let inner = InnerProblem::with_policy(lag, spec.sampling, spec.sampler)?;
        let budget = match cfg.budget_mode {
            BudgetMode::Adaptive => InnerBudget::Adaptive,
            BudgetMode::Theory => {
                let c = cfg.theory_constants.as_ref().expect("validated");
                let rate = RateKind::of(spec.kind);
                let j = theory_budget(
                    &BudgetQuery {
                        k,
                        outer_iterations: big_k,
                        eps: cfg.eps,
                        delta: cfg.delta,
                        n,
                        lipschitz: problem.lipschitz_grad(),
                        scaling: cfg.scaling,
                        rate,
                    },
                    c,
                )?;
                let per_unit = if spec.kind == SubroutineKind::Svrg { spec.epoch_length } else { 1 };
                InnerBudget::Fixed(j.saturating_mul(per_unit))
            }
        };
        let start_point = if cfg.warm_start { &x } else { &x0 };
        let mut rng = stream_rng(cfg.master_seed, k as u64);
        let out = run_inner(&inner, spec, start_point, cfg.eps, budget, &mut rng)?;
        x = out.x;
        cum += out.iterations;
        dual = dual_update(&dual, &x, problem, psi, cfg.scaling)?;

        let objective = problem.objective(&x);
        let viol = max_violation(problem, &x);
        let record = IterationRecord {
            k: k + 1,
            objective,
            max_violation: viol.value,
            max_violation_index: viol.index,
            stationarity: out.achieved,
            inner_converged: out.converged,
            inner_iters: out.iterations,
            cum_inner_iters: cum,
            wall_ms: start.elapsed().as_secs_f64() * 1e3,
            lambda_min: dual.min(),
            lambda_max: dual.max(),
            lambda_l1: dual.l1_norm(),
            relative_gap: reference.map(|r| relative_gap(objective, r)),
        };
        observer(&OuterSnapshot { k: k + 1, x: &x, dual: &dual, record: &record });
        records.push(record);

        if cfg.budget_mode == BudgetMode::Adaptive {
            if out.achieved > cfg.stall_factor * cfg.eps {
                stalled += 1;
            } else {
                stalled = 0;
            }
            if stalled >= cfg.stall_patience {
                let report = build_report(problem, psi, cfg, x, records, cum, start, reference)?;
                return Err(Error::SolverAbort {
                    outer: k + 1,
                    achieved: out.achieved,
                    eps: cfg.eps,
                    factor: cfg.stall_factor,
                    patience: cfg.stall_patience,
                    report: Box::new(report),
                });
            }
        }
    }

    build_report(problem, psi, cfg, x, records, cum, start, reference)
}

#[allow(clippy::too_many_arguments)]
fn build_report(
    problem: &ProblemInstance,
    psi: &RescalingFunction,
    cfg: &SolverConfig,
    x: Vec<f64>,
    iterations: Vec<IterationRecord>,
    total_inner_iters: u64,
    start: Instant,
    reference: Option<f64>,
) -> Result<RunReport> {
    let final_objective = problem.objective(&x);
    let viol = max_violation(problem, &x);
    let mut config = serde_json::to_value(cfg)?;
    if let serde_json::Value::Object(map) = &mut config {
        map.insert("rescaling".into(), serde_json::Value::String(psi.name()));
        map.insert("beta".into(), serde_json::json!(problem.beta()));
    }
    Ok(RunReport {
        algorithm: cfg.subroutine.kind.label().to_string(),
        instance: problem.name().to_string(),
        n: problem.dim(),
        m: problem.num_constraints(),
        seed: cfg.master_seed,
        iterations,
        final_objective,
        final_max_violation: viol.value,
        reference_objective: reference,
        relative_gap: reference.map(|r| relative_gap(final_objective, r)),
        final_x: x,
        total_inner_iters,
        precompute_ms: problem.build_ms(),
        solve_ms: start.elapsed().as_secs_f64() * 1e3,
        config,
    })
}
