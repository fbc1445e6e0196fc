//! Approximate linear program for a single-item inventory MDP.
//!
//! States `s ∈ [-10, 10]` (negative stock is backlog), order quantities
//! `a ∈ [0, 20]` and demand `D ∈ [0, 10]` share one grid step `h`. Demand
//! follows a normal(5, 2²) law truncated to `[0, 10]` and binned on the
//! grid. With basis `(1, s)` and discount 0.95 the value-function LP is
//!
//! ```text
//! max θ₁ + θ₂ E_q[s]
//! s.t. θ₁ (1 - 0.95) + θ₂ (s - 0.95 E[s' | s, a]) ≤ c(s, a)   for all (s, a)
//! ```
//!
//! which the builder states as a minimization with constraints
//! `g_{(s,a)}(θ) = c(s, a) - θ·v(s, a) ≥ 0`, divided by `β`.

use std::ops::Range;
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::instances::lp::{lp_reference, HalfPlane, LpSolution};
use crate::problem::{BoxBounds, ProblemInstance, ProblemOracle, Reference};

pub const STATE_LO: f64 = -10.0;
pub const STATE_HI: f64 = 10.0;
pub const ACTION_HI: f64 = 20.0;
pub const DEMAND_HI: f64 = 10.0;
pub const DEMAND_MEAN: f64 = 5.0;
pub const DEMAND_SD: f64 = 2.0;
pub const DISCOUNT: f64 = 0.95;

/// Purchase, holding, backlog, disposal and lost-sale unit costs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostCoefficients {
    pub purchase: f64,
    pub holding: f64,
    pub backlog: f64,
    pub disposal: f64,
    pub lost_sale: f64,
}

impl Default for CostCoefficients {
    fn default() -> Self {
        CostCoefficients {
            purchase: 20.0,
            holding: 2.0,
            backlog: 10.0,
            disposal: 10.0,
            lost_sale: 100.0,
        }
    }
}

/// Optimal value of the `h = 0.02` instance from a commercial LP solve.
pub const FULL_SCALE_REFERENCE: f64 = 2146.94;

/// Largest instance for which the builder computes the exact LP optimum.
pub const LP_REFERENCE_MAX_CONSTRAINTS: usize = 100_000;

fn grid_steps(range: f64, h: f64) -> Result<usize> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::config(format!("precision h must be positive, got {h}")));
    }
    let k = (range / h).round();
    if k < 1.0 || ((k * h - range).abs() > 1e-9 * range) {
        return Err(Error::config(format!("precision {h} does not divide the range {range} evenly")));
    }
    Ok(k as usize)
}

fn grid(lo: f64, steps: usize, h: f64) -> Vec<f64> {
    (0..=steps).map(|j| lo + j as f64 * h).collect()
}

/// Binned truncated-normal demand pmf on `0, h, ..., 10`. Boundary cells
/// cover half a step, so the masses telescope to one.
pub fn demand_pmf(h: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let steps = grid_steps(DEMAND_HI, h)?;
    let support = grid(0.0, steps, h);
    let normal = Normal::new(DEMAND_MEAN, DEMAND_SD).expect("valid normal parameters");
    let mass = normal.cdf(DEMAND_HI) - normal.cdf(0.0);
    let pmf = support
        .iter()
        .map(|d| {
            let hi = (d + 0.5 * h).min(DEMAND_HI);
            let lo = (d - 0.5 * h).max(0.0);
            (normal.cdf(hi) - normal.cdf(lo)) / mass
        })
        .collect();
    Ok((support, pmf))
}

/// Cost table and constraint rows before normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct AlpModel {
    pub h: f64,
    pub states: Vec<f64>,
    pub actions: Vec<f64>,
    pub demand: Vec<f64>,
    pub pmf: Vec<f64>,
    /// `c(s, a)` indexed by `s_index * |A| + a_index`.
    pub cost: Vec<f64>,
    /// `s - γ E[s' | s, a]`, the second component of each row `v`.
    pub state_coeff: Vec<f64>,
    /// `E_q[s]` under the uniform state weighting.
    pub mean_state: f64,
    pub costs: CostCoefficients,
    pub build_ms: f64,
}

impl AlpModel {
    pub fn build(h: f64) -> Result<Self> {
        Self::build_with_costs(h, CostCoefficients::default())
    }

    pub fn build_with_costs(h: f64, costs: CostCoefficients) -> Result<Self> {
        let start = Instant::now();
        let s_steps = grid_steps(STATE_HI - STATE_LO, h)?;
        let a_steps = grid_steps(ACTION_HI, h)?;
        let states = grid(STATE_LO, s_steps, h);
        let actions = grid(0.0, a_steps, h);
        let (demand, pmf) = demand_pmf(h)?;
        let n_a = actions.len();
        let rows: Vec<(f64, f64)> = (0..states.len() * n_a)
            .into_par_iter()
            .map(|idx| {
                let s = states[idx / n_a];
                let a = actions[idx % n_a];
                let mut next = 0.0;
                let mut cost = costs.purchase * a;
                for (d, p) in demand.iter().zip(&pmf) {
                    let raw = s + a - d;
                    let sp = raw.clamp(STATE_LO, STATE_HI);
                    next += p * sp;
                    cost += p
                        * (costs.holding * sp.max(0.0)
                            + costs.backlog * (-sp).max(0.0)
                            + costs.disposal * (raw - STATE_HI).max(0.0)
                            + costs.lost_sale * (STATE_LO - raw).max(0.0));
                }
                (cost, s - DISCOUNT * next)
            })
            .collect();
        let (cost, state_coeff) = rows.into_iter().unzip();
        let mean_state = states.iter().sum::<f64>() / states.len() as f64;
        Ok(AlpModel {
            h,
            states,
            actions,
            demand,
            pmf,
            cost,
            state_coeff,
            mean_state,
            costs,
            build_ms: start.elapsed().as_secs_f64() * 1e3,
        })
    }

    pub fn num_constraints(&self) -> usize {
        self.cost.len()
    }

    /// Coefficient of `θ₁` in every row.
    pub fn constant_coeff(&self) -> f64 {
        1.0 - DISCOUNT
    }

    /// Rows `v·θ ≤ c` of the unnormalized LP.
    pub fn half_planes(&self) -> Vec<HalfPlane> {
        self.cost
            .iter()
            .zip(&self.state_coeff)
            .map(|(c, v2)| HalfPlane {
                a: [self.constant_coeff(), *v2],
                b: *c,
            })
            .collect()
    }

    /// Objective `w·θ` to minimize.
    pub fn objective_direction(&self) -> [f64; 2] {
        [-1.0, -self.mean_state]
    }

    /// Exact optimum of the two-variable LP.
    pub fn lp_reference(&self) -> Result<LpSolution> {
        lp_reference(&self.half_planes(), self.objective_direction())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AlpOptions {
    /// Adds `(μ/2)‖θ‖²` to the objective so that it is strongly convex.
    pub tikhonov: f64,
    /// Box `[-b, b]²` on `θ`. When absent the box comes from the value
    /// bounds `0 ≤ θ₁ + θ₂ s ≤ max c / (1 - γ)` on `[-10, 10]`.
    pub theta_bound: Option<f64>,
    /// Attach the LP optimum as the reference when it is affordable.
    pub reference: bool,
}

impl Default for AlpOptions {
    fn default() -> Self {
        AlpOptions {
            tikhonov: 0.0,
            theta_bound: None,
            reference: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct AlpOracle {
    cost: Vec<f64>,
    state_coeff: Vec<f64>,
    constant_coeff: f64,
    mean_state: f64,
    tikhonov: f64,
}

impl ProblemOracle for AlpOracle {
    fn dim(&self) -> usize {
        2
    }

    fn num_constraints(&self) -> usize {
        self.cost.len()
    }

    fn objective(&self, x: &[f64]) -> f64 {
        -x[0] - self.mean_state * x[1] + 0.5 * self.tikhonov * (x[0] * x[0] + x[1] * x[1])
    }

    fn objective_grad(&self, x: &[f64], grad: &mut [f64]) {
        grad[0] = -1.0 + self.tikhonov * x[0];
        grad[1] = -self.mean_state + self.tikhonov * x[1];
    }

    #[inline]
    fn constraint(&self, i: usize, x: &[f64]) -> f64 {
        self.cost[i] - self.constant_coeff * x[0] - self.state_coeff[i] * x[1]
    }

    #[inline]
    fn constraint_with_grad(&self, i: usize, x: &[f64], grad: &mut [f64]) -> f64 {
        grad[0] = -self.constant_coeff;
        grad[1] = -self.state_coeff[i];
        self.constraint(i, x)
    }

    fn eval_range(&self, x: &[f64], range: Range<usize>, out: &mut [f64]) {
        let base = self.constant_coeff * x[0];
        for ((o, c), v) in out.iter_mut().zip(&self.cost[range.clone()]).zip(&self.state_coeff[range]) {
            *o = c - base - v * x[1];
        }
    }
}

impl AlpModel {
    /// The instance with constraints divided by `beta`.
    pub fn into_instance(self, beta: f64, options: AlpOptions) -> Result<ProblemInstance> {
        if !(options.tikhonov >= 0.0 && options.theta_bound.is_none_or(|b| b > 0.0)) {
            return Err(Error::config("tikhonov must be >= 0 and theta_bound > 0"));
        }
        let reference = if !options.reference {
            None
        } else if self.num_constraints() <= LP_REFERENCE_MAX_CONSTRAINTS && options.tikhonov == 0.0 {
            let sol = self.lp_reference()?;
            Some(Reference {
                objective: sol.value,
                x: Some(sol.x.to_vec()),
            })
        } else if (self.h - 0.02).abs() < 1e-12 && options.tikhonov == 0.0 {
            Some(Reference {
                objective: -FULL_SCALE_REFERENCE,
                x: None,
            })
        } else {
            None
        };
        let max_row = self
            .state_coeff
            .iter()
            .map(|v| self.constant_coeff() * self.constant_coeff() + v * v)
            .fold(0.0, f64::max);
        let lipschitz = (max_row / (beta * beta)).max(options.tikhonov).max(f64::MIN_POSITIVE);
        let v_max = self.cost.iter().copied().fold(0.0, f64::max) / (1.0 - DISCOUNT);
        let h = self.h;
        let build_ms = self.build_ms;
        let oracle = AlpOracle {
            constant_coeff: self.constant_coeff(),
            cost: self.cost,
            state_coeff: self.state_coeff,
            mean_state: self.mean_state,
            tikhonov: options.tikhonov,
        };
        let bounds = match options.theta_bound {
            Some(b) => BoxBounds::uniform(2, -b, b)?,
            None => value_box(v_max),
        };
        let mut p = ProblemInstance::new(format!("alp-h{h}"), Arc::new(oracle), bounds, options.tikhonov, lipschitz)?
            .with_beta(beta)?
            .with_build_ms(build_ms);
        if let Some(r) = reference {
            p = p.with_reference(r);
        }
        Ok(p)
    }
}

/// `V(s) = θ₁ + θ₂ s` with `0 ≤ V ≤ v_max` at `s = ±10` gives
/// `θ₁ ∈ [0, v_max]` and `|θ₂| ≤ v_max / 10`.
fn value_box(v_max: f64) -> BoxBounds {
    let v_max = v_max.max(1.0);
    let slope = v_max / STATE_HI;
    BoxBounds::new(vec![0.0, -slope], vec![v_max, slope]).expect("nonempty value box")
}

/// Builds the ALP at grid step `h` with constraints divided by `beta`.
pub fn build_alp(h: f64, beta: f64) -> Result<ProblemInstance> {
    build_alp_with(h, beta, AlpOptions::default())
}

pub fn build_alp_with(h: f64, beta: f64, options: AlpOptions) -> Result<ProblemInstance> {
    AlpModel::build(h)?.into_instance(beta, options)
}
