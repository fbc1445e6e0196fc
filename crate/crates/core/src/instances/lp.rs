//! Exact solver for linear programs in two variables.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The half-plane `a·θ ≤ b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalfPlane {
    pub a: [f64; 2],
    pub b: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub x: [f64; 2],
    /// Minimum of `w·θ`.
    pub value: f64,
    /// Index of a constraint active at the optimum.
    pub active: usize,
}

enum LineOutcome {
    Infeasible,
    Unbounded,
    Optimum(f64, [f64; 2]),
}

/// Minimizes `w·θ` over the intersection of `planes`.
///
/// A bounded optimum lies on some constraint line. For every line the
/// feasible segment is found by clipping against all other half-planes and
/// the objective is minimized over that segment, so the cost is `O(m²)`.
pub fn lp_reference(planes: &[HalfPlane], w: [f64; 2]) -> Result<LpSolution> {
    if planes.is_empty() {
        return Err(Error::UnboundedLp);
    }
    if planes.iter().any(|p| !(p.a[0].is_finite() && p.a[1].is_finite() && p.b.is_finite())) {
        return Err(Error::config("LP data must be finite"));
    }
    let scale = planes
        .iter()
        .map(|p| p.b.abs().max(p.a[0].abs()).max(p.a[1].abs()))
        .fold(1.0, f64::max);
    let tol = 1e-12 * scale;

    let outcomes: Vec<(usize, LineOutcome)> = planes
        .par_iter()
        .enumerate()
        .map(|(i, line)| (i, solve_on_line(planes, line, w, tol)))
        .collect();

    let mut best: Option<LpSolution> = None;
    let mut any_feasible = false;
    for (i, outcome) in outcomes {
        match outcome {
            LineOutcome::Infeasible => {}
            LineOutcome::Unbounded => return Err(Error::UnboundedLp),
            LineOutcome::Optimum(value, x) => {
                any_feasible = true;
                if best.is_none_or(|b| value < b.value) {
                    best = Some(LpSolution { x, value, active: i });
                }
            }
        }
    }
    match best {
        Some(sol) => Ok(sol),
        None if any_feasible => Err(Error::UnboundedLp),
        None => Err(Error::InfeasibleLp),
    }
}

fn solve_on_line(planes: &[HalfPlane], line: &HalfPlane, w: [f64; 2], tol: f64) -> LineOutcome {
    let norm2 = line.a[0] * line.a[0] + line.a[1] * line.a[1];
    if norm2 == 0.0 {
        return LineOutcome::Infeasible;
    }
    let p0 = [line.b * line.a[0] / norm2, line.b * line.a[1] / norm2];
    let dir = [-line.a[1], line.a[0]];
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for other in planes {
        let slope = other.a[0] * dir[0] + other.a[1] * dir[1];
        let slack = other.b - (other.a[0] * p0[0] + other.a[1] * p0[1]);
        let parallel = slope.abs() <= 1e-14 * (other.a[0].abs() + other.a[1].abs()) * norm2.sqrt();
        if parallel {
            if slack < -tol {
                return LineOutcome::Infeasible;
            }
        } else if slope > 0.0 {
            hi = hi.min(slack / slope);
        } else {
            lo = lo.max(slack / slope);
        }
    }
    if lo > hi {
        return LineOutcome::Infeasible;
    }
    let base = w[0] * p0[0] + w[1] * p0[1];
    let rate = w[0] * dir[0] + w[1] * dir[1];
    let t = if rate > 0.0 {
        lo
    } else if rate < 0.0 {
        hi
    } else if lo.is_finite() {
        lo
    } else if hi.is_finite() {
        hi
    } else {
        0.0
    };
    if !t.is_finite() {
        return LineOutcome::Unbounded;
    }
    LineOutcome::Optimum(base + rate * t, [p0[0] + t * dir[0], p0[1] + t * dir[1]])
}
