//! Projected primal-dual subgradient (Arrow–Hurwicz) baseline:
//!
//! ```text
//! x ← Π_X[x - γ (∇f(x) - Σ_i λ_i ∇g_i(x))]
//! λ ← max(0, λ - γ g(x))
//! ```
//!
//! Both updates use the current `(x, λ)`. Every step touches all `m`
//! constraints.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::{max_violation, ProblemInstance};
use crate::report::{relative_gap, IterationRecord, RunReport};

pub const BASELINE_LABEL: &str = "baseline-primal-dual (reimplementation)";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BaselineConfig {
    pub steps: u64,
    pub step: f64,
    /// Initial value of every dual.
    pub lambda0: f64,
    pub x0: Option<Vec<f64>>,
    /// Trajectory record spacing in iterations.
    pub record_every: u64,
    /// Echoed in the report; the method itself is deterministic.
    pub seed: u64,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        BaselineConfig {
            steps: 30_000,
            step: 1e-4,
            lambda0: 0.0,
            x0: None,
            record_every: 1000,
            seed: 0,
        }
    }
}

pub fn baseline_primal_dual(p: &ProblemInstance, cfg: &BaselineConfig) -> Result<RunReport> {
    if !(cfg.step > 0.0 && cfg.step.is_finite()) {
        return Err(Error::config(format!("baseline step must be positive, got {}", cfg.step)));
    }
    if !(cfg.lambda0 >= 0.0 && cfg.lambda0.is_finite()) {
        return Err(Error::config("baseline lambda0 must be finite and >= 0"));
    }
    if cfg.record_every == 0 {
        return Err(Error::config("record_every must be at least 1"));
    }
    let n = p.dim();
    let m = p.num_constraints();
    let mut x = match &cfg.x0 {
        Some(x) if x.len() != n => return Err(Error::DimensionMismatch { expected: n, got: x.len() }),
        Some(x) => x.clone(),
        None => p.bounds().center(),
    };
    p.bounds().project_in_place(&mut x);
    let mut lambda = vec![cfg.lambda0; m];
    let reference = p.reference().map(|r| r.objective);
    let start = Instant::now();

    let mut grad = vec![0.0; n];
    let mut acc = vec![0.0; n];
    let mut gi = vec![0.0; n];
    let mut records = Vec::new();
    let gamma = cfg.step;

    for t in 1..=cfg.steps {
        p.objective_grad(&x, &mut grad);
        acc.fill(0.0);
        for (i, l) in lambda.iter_mut().enumerate() {
            let g = p.constraint_with_grad(i, &x, &mut gi);
            if *l != 0.0 {
                for (a, d) in acc.iter_mut().zip(&gi) {
                    *a += *l * d;
                }
            }
            *l = (*l - gamma * g).max(0.0);
        }
        for ((xj, g), a) in x.iter_mut().zip(&grad).zip(&acc) {
            *xj -= gamma * (g - a);
        }
        p.bounds().project_in_place(&mut x);
        if x.iter().any(|v| !v.is_finite()) || lambda.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteIterate { iteration: t });
        }
        if t % cfg.record_every == 0 || t == cfg.steps {
            let objective = p.objective(&x);
            let viol = max_violation(p, &x);
            // Projected residual of the ordinary Lagrangian at (x, λ).
            let bounds = p.bounds();
            let stationarity = x
                .iter()
                .zip(grad.iter().zip(&acc))
                .zip(bounds.lower().iter().zip(bounds.upper()))
                .map(|((xj, (g, a)), (lo, hi))| (xj - (xj - (g - a)).clamp(*lo, *hi)).abs())
                .fold(0.0, f64::max);
            let (lmin, lmax, l1) = lambda
                .iter()
                .fold((f64::INFINITY, 0.0f64, 0.0), |(a, b, c), v| (a.min(*v), b.max(*v), c + v));
            let last_k = records.last().map_or(0, |r: &IterationRecord| r.cum_inner_iters);
            records.push(IterationRecord {
                k: t as usize,
                objective,
                max_violation: viol.value,
                max_violation_index: viol.index,
                stationarity,
                inner_converged: false,
                inner_iters: t - last_k,
                cum_inner_iters: t,
                wall_ms: start.elapsed().as_secs_f64() * 1e3,
                lambda_min: lmin,
                lambda_max: lmax,
                lambda_l1: l1,
                relative_gap: reference.map(|r| relative_gap(objective, r)),
            });
        }
    }

    let final_objective = p.objective(&x);
    Ok(RunReport {
        algorithm: BASELINE_LABEL.to_string(),
        instance: p.name().to_string(),
        n,
        m,
        seed: cfg.seed,
        iterations: records,
        final_max_violation: max_violation(p, &x).value,
        final_objective,
        reference_objective: reference,
        relative_gap: reference.map(|r| relative_gap(final_objective, r)),
        final_x: x,
        total_inner_iters: cfg.steps,
        precompute_ms: p.build_ms(),
        solve_ms: start.elapsed().as_secs_f64() * 1e3,
        config: serde_json::to_value(cfg)?,
    })
}
