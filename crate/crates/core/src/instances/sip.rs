//! Discretized semi-infinite program
//!
//! ```text
//! min (x₁ - 2)² + (x₂ - 0.2)²
//! s.t. x₂ - a_i x₁² ≥ 0,   a_i = 5 sin(π √(i/m)) / (1 + (i/m)²),   i = 1..m
//!      x₁ ∈ [-1, 1], x₂ ∈ [0, 0.2]
//! ```
//!
//! The semi-infinite form writes the constraints as `a_i x₁² - x₂ ≤ 0`; the
//! builder flips the sign once so that they read `g_i ≥ 0`.

use std::f64::consts::PI;
use std::ops::Range;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::{BoxBounds, ProblemInstance, ProblemOracle, Reference};

/// `a_i` for `i = 1..=m`, stored zero-based.
pub fn sip_coefficients(m: usize) -> Vec<f64> {
    (1..=m)
        .map(|i| {
            let u = i as f64 / m as f64;
            5.0 * (PI * u.sqrt()).sin() / (1.0 + u * u)
        })
        .map(|a: f64| a.max(0.0))
        .collect()
}

#[derive(Debug, Clone)]
pub struct SipOracle {
    coefficients: Vec<f64>,
}

impl SipOracle {
    pub fn new(m: usize) -> Self {
        SipOracle { coefficients: sip_coefficients(m) }
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }
}

impl ProblemOracle for SipOracle {
    fn dim(&self) -> usize {
        2
    }

    fn num_constraints(&self) -> usize {
        self.coefficients.len()
    }

    fn objective(&self, x: &[f64]) -> f64 {
        (x[0] - 2.0).powi(2) + (x[1] - 0.2).powi(2)
    }

    fn objective_grad(&self, x: &[f64], grad: &mut [f64]) {
        grad[0] = 2.0 * (x[0] - 2.0);
        grad[1] = 2.0 * (x[1] - 0.2);
    }

    #[inline]
    fn constraint(&self, i: usize, x: &[f64]) -> f64 {
        x[1] - self.coefficients[i] * x[0] * x[0]
    }

    #[inline]
    fn constraint_with_grad(&self, i: usize, x: &[f64], grad: &mut [f64]) -> f64 {
        let a = self.coefficients[i];
        grad[0] = -2.0 * a * x[0];
        grad[1] = 1.0;
        x[1] - a * x[0] * x[0]
    }

    fn eval_range(&self, x: &[f64], range: Range<usize>, out: &mut [f64]) {
        let sq = x[0] * x[0];
        for (o, a) in out.iter_mut().zip(&self.coefficients[range]) {
            *o = x[1] - a * sq;
        }
    }
}

/// Closed-form optimum of the discretized problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SipReference {
    pub x1: f64,
    pub x2: f64,
    pub objective: f64,
    /// Largest coefficient and its one-based index.
    pub max_coefficient: f64,
    pub argmax: usize,
}

/// At the optimum `x₂ = 0.2` and the tightest constraint binds, so
/// `x₁* = min(1, √(0.2 / max_i a_i))`.
pub fn sip_reference(coefficients: &[f64]) -> SipReference {
    let (argmax, amax) = coefficients
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, a)| if a > best.1 { (i, a) } else { best });
    let x1 = if amax > 0.0 { (0.2 / amax).sqrt().min(1.0) } else { 1.0 };
    SipReference {
        x1,
        x2: 0.2,
        objective: (x1 - 2.0).powi(2),
        max_coefficient: amax,
        argmax: argmax + 1,
    }
}

/// Strong-convexity modulus of the objective.
pub const SIP_MU: f64 = 2.0;

/// Builds the `m`-constraint instance with its reference optimum attached.
///
/// The Lipschitz bound is nominal (unit dual mass); override it with
/// [`ProblemInstance::with_lipschitz`] for theory step sizes.
pub fn build_sip(m: usize) -> Result<ProblemInstance> {
    if m == 0 {
        return Err(Error::config("SIP needs m >= 1"));
    }
    let oracle = SipOracle::new(m);
    let reference = sip_reference(oracle.coefficients());
    let lipschitz = SIP_MU + 2.0 * reference.max_coefficient.max(1.0);
    let bounds = BoxBounds::new(vec![-1.0, 0.0], vec![1.0, 0.2])?;
    Ok(ProblemInstance::new(format!("sip-{m}"), Arc::new(oracle), bounds, SIP_MU, lipschitz)?.with_reference(
        Reference {
            objective: reference.objective,
            x: Some(vec![reference.x1, reference.x2]),
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::max_violation;

    #[test]
    fn coefficient_examples() {
        let a = sip_coefficients(10_000);
        assert!(a[9_999].abs() < 1e-15);
        assert!(a.iter().all(|v| *v >= 0.0));
        let quarter = a[2_499];
        assert!((quarter - 5.0 / 1.0625).abs() < 1e-12, "{quarter}");
    }

    #[test]
    fn reference_at_ten_thousand() {
        let r = sip_reference(&sip_coefficients(10_000));
        assert!((r.x1 - 0.20523677).abs() < 1e-6);
        assert!((r.objective - 3.221).abs() < 1e-3);
        assert_eq!(r.argmax, 2134);
    }

    #[test]
    fn reference_is_feasible_and_binding() {
        for m in [1, 2, 7, 100, 1234] {
            let p = build_sip(m).unwrap();
            let x = p.reference().unwrap().x.clone().unwrap();
            assert!(max_violation(&p, &x).value <= 1e-12, "m = {m}");
        }
    }

    #[test]
    fn max_violation_at_corner() {
        let p = build_sip(10_000).unwrap();
        let v = max_violation(&p, &[1.0, 0.0]);
        let amax = sip_reference(&sip_coefficients(10_000)).max_coefficient;
        assert_eq!(v.value, amax);
        assert_eq!(v.index, Some(2133));
    }
}
