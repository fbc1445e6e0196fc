//! Problem abstraction and the augmented Lagrangian.
//!
//! Problems have the form `min f(x)` subject to `g_i(x) ≥ 0` for `i` in
//! `0..m` and `x` in a box. For fixed duals `λ > 0` and scaling `N > 0` the
//! augmented Lagrangian is
//!
//! ```text
//! L_N(x, λ) = f(x) - N⁻¹ Σ_i λ_i ψ(N g_i(x))
//!           = Σ_i (λ_i/‖λ‖₁) f_i(x),   f_i(x) = f(x) - ‖λ‖₁ N⁻¹ ψ(N g_i(x))
//! ```
//!
//! and `B_i(x) = ∇f_i(x)` are the component operators that the randomized
//! inner solvers sample.

use std::ops::Range;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rescaling::RescalingFunction;

/// Oracle access to an objective and a family of constraint functions.
///
/// Implementations must be pure: evaluating the same point twice returns
/// bitwise-identical values. They are called concurrently.
pub trait ProblemOracle: Send + Sync {
    fn dim(&self) -> usize;
    fn num_constraints(&self) -> usize;
    fn objective(&self, x: &[f64]) -> f64;
    fn objective_grad(&self, x: &[f64], grad: &mut [f64]);
    fn constraint(&self, i: usize, x: &[f64]) -> f64;
    /// Writes `∇g_i(x)` into `grad` and returns `g_i(x)`.
    fn constraint_with_grad(&self, i: usize, x: &[f64], grad: &mut [f64]) -> f64;

    /// Evaluates `g_i(x)` for every `i` in `range` into `out`.
    fn eval_range(&self, x: &[f64], range: Range<usize>, out: &mut [f64]) {
        for (slot, i) in out.iter_mut().zip(range) {
            *slot = self.constraint(i, x);
        }
    }
}

/// Axis-aligned box `lo ≤ x ≤ hi`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxBounds {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl BoxBounds {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch {
                expected: lo.len(),
                got: hi.len(),
            });
        }
        if lo.is_empty() {
            return Err(Error::config("box must have at least one coordinate"));
        }
        for (j, (l, h)) in lo.iter().zip(&hi).enumerate() {
            if !(l < h) {
                return Err(Error::config(format!(
                    "box coordinate {j}: lower bound {l} must be below upper bound {h}"
                )));
            }
        }
        Ok(BoxBounds { lo, hi })
    }

    /// The same interval `[lo, hi]` in every coordinate.
    pub fn uniform(dim: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo; dim], vec![hi; dim])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lo
    }

    pub fn upper(&self) -> &[f64] {
        &self.hi
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x
                .iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(v, (l, h))| *l <= *v && *v <= *h)
    }

    /// Euclidean projection onto the box, in place.
    #[inline]
    pub fn project_in_place(&self, x: &mut [f64]) {
        for (v, (l, h)) in x.iter_mut().zip(self.lo.iter().zip(&self.hi)) {
            *v = v.clamp(*l, *h);
        }
    }

    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        let mut y = x.to_vec();
        self.project_in_place(&mut y);
        y
    }

    /// Midpoint of the box.
    pub fn center(&self) -> Vec<f64> {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(l, h)| 0.5 * (l + h))
            .collect()
    }
}

/// A problem instance: oracle plus the metadata the solvers need.
///
/// Constraint values and gradients returned by the instance are the
/// oracle's divided by `beta`.
#[derive(Clone)]
pub struct ProblemInstance {
    name: String,
    oracle: Arc<dyn ProblemOracle>,
    bounds: BoxBounds,
    mu_f: f64,
    lipschitz_grad: f64,
    beta: f64,
    inv_beta: f64,
    reference: Option<Reference>,
    build_ms: f64,
}

/// A known optimum attached to an instance, used to report gaps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reference {
    pub objective: f64,
    pub x: Option<Vec<f64>>,
}

impl std::fmt::Debug for ProblemInstance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ProblemInstance")
            .field("name", &self.name)
            .field("n", &self.dim())
            .field("m", &self.num_constraints())
            .field("mu_f", &self.mu_f)
            .field("lipschitz_grad", &self.lipschitz_grad)
            .field("beta", &self.beta)
            .finish()
    }
}

impl ProblemInstance {
    /// `mu_f` is the strong-convexity modulus of `f` (zero is accepted for
    /// linear objectives, which rules out the theory step sizes) and
    /// `lipschitz_grad` an upper bound on the Lipschitz constant of the
    /// component operators over the box.
    pub fn new(
        name: impl Into<String>,
        oracle: Arc<dyn ProblemOracle>,
        bounds: BoxBounds,
        mu_f: f64,
        lipschitz_grad: f64,
    ) -> Result<Self> {
        if oracle.dim() == 0 || oracle.dim() != bounds.dim() {
            return Err(Error::DimensionMismatch {
                expected: oracle.dim(),
                got: bounds.dim(),
            });
        }
        if oracle.num_constraints() == 0 {
            return Err(Error::config("problem needs at least one constraint"));
        }
        if !(mu_f >= 0.0 && mu_f.is_finite()) {
            return Err(Error::config(format!("mu_f must be finite and >= 0, got {mu_f}")));
        }
        if !(lipschitz_grad > 0.0 && lipschitz_grad >= mu_f && lipschitz_grad.is_finite()) {
            return Err(Error::config(format!(
                "lipschitz_grad must be finite, positive and >= mu_f, got {lipschitz_grad}"
            )));
        }
        Ok(ProblemInstance {
            name: name.into(),
            oracle,
            bounds,
            mu_f,
            lipschitz_grad,
            beta: 1.0,
            inv_beta: 1.0,
            reference: None,
            build_ms: 0.0,
        })
    }

    /// Divides every constraint by `beta`.
    pub fn with_beta(mut self, beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::config(format!("beta must be positive, got {beta}")));
        }
        self.beta = beta;
        self.inv_beta = 1.0 / beta;
        Ok(self)
    }

    pub fn with_lipschitz(mut self, lipschitz_grad: f64) -> Result<Self> {
        if !(lipschitz_grad > 0.0 && lipschitz_grad >= self.mu_f && lipschitz_grad.is_finite()) {
            return Err(Error::config(format!(
                "lipschitz_grad must be finite, positive and >= mu_f, got {lipschitz_grad}"
            )));
        }
        self.lipschitz_grad = lipschitz_grad;
        Ok(self)
    }

    pub fn with_reference(mut self, reference: Reference) -> Self {
        self.reference = Some(reference);
        self
    }

    /// Records how long the instance took to build.
    pub fn with_build_ms(mut self, ms: f64) -> Self {
        self.build_ms = ms;
        self
    }

    pub fn reference(&self) -> Option<&Reference> {
        self.reference.as_ref()
    }

    pub fn build_ms(&self) -> f64 {
        self.build_ms
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.oracle.dim()
    }

    pub fn num_constraints(&self) -> usize {
        self.oracle.num_constraints()
    }

    pub fn bounds(&self) -> &BoxBounds {
        &self.bounds
    }

    pub fn mu_f(&self) -> f64 {
        self.mu_f
    }

    pub fn lipschitz_grad(&self) -> f64 {
        self.lipschitz_grad
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn oracle(&self) -> &Arc<dyn ProblemOracle> {
        &self.oracle
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        self.oracle.objective(x)
    }

    pub fn objective_grad(&self, x: &[f64], grad: &mut [f64]) {
        self.oracle.objective_grad(x, grad)
    }

    #[inline]
    pub fn constraint(&self, i: usize, x: &[f64]) -> f64 {
        self.oracle.constraint(i, x) * self.inv_beta
    }

    #[inline]
    pub fn constraint_with_grad(&self, i: usize, x: &[f64], grad: &mut [f64]) -> f64 {
        let v = self.oracle.constraint_with_grad(i, x, grad);
        if self.beta != 1.0 {
            for g in grad.iter_mut() {
                *g *= self.inv_beta;
            }
        }
        v * self.inv_beta
    }

    /// All constraint values at `x`.
    pub fn constraint_values(&self, x: &[f64]) -> Vec<f64> {
        let m = self.num_constraints();
        let mut out = vec![0.0; m];
        if m >= PARALLEL_THRESHOLD {
            out.par_chunks_mut(CHUNK)
                .enumerate()
                .for_each(|(c, chunk)| {
                    let start = c * CHUNK;
                    self.oracle.eval_range(x, start..start + chunk.len(), chunk);
                });
        } else {
            self.oracle.eval_range(x, 0..m, &mut out);
        }
        if self.beta != 1.0 {
            for v in &mut out {
                *v *= self.inv_beta;
            }
        }
        out
    }
}

/// Strictly positive dual vector with its cached ℓ₁ norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualState {
    lambda: Vec<f64>,
    l1_norm: f64,
}

/// Smallest representable dual entry. Entries that would underflow below
/// this are held here so the vector stays strictly positive in floating
/// point.
pub const DUAL_FLOOR: f64 = f64::MIN_POSITIVE;

impl DualState {
    pub fn new(lambda: Vec<f64>) -> Result<Self> {
        if lambda.is_empty() {
            return Err(Error::config("dual vector must be nonempty"));
        }
        if let Some((i, v)) = lambda
            .iter()
            .enumerate()
            .find(|(_, v)| !(**v > 0.0 && v.is_finite()))
        {
            return Err(Error::config(format!(
                "dual variable {i} must be finite and strictly positive, got {v}"
            )));
        }
        let l1_norm = compensated_sum(&lambda);
        Ok(DualState { lambda, l1_norm })
    }

    /// Every entry equal to `value`.
    pub fn constant(m: usize, value: f64) -> Result<Self> {
        Self::new(vec![value; m])
    }

    pub fn ones(m: usize) -> Self {
        Self::constant(m, 1.0).expect("unit duals are valid")
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    pub fn len(&self) -> usize {
        self.lambda.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambda.is_empty()
    }

    pub fn l1_norm(&self) -> f64 {
        self.l1_norm
    }

    pub fn min(&self) -> f64 {
        self.lambda.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.lambda.iter().copied().fold(0.0, f64::max)
    }

    /// `λ_i/‖λ‖₁`
    #[inline]
    pub fn weight(&self, i: usize) -> f64 {
        self.lambda[i] / self.l1_norm
    }

    pub(crate) fn from_updated(lambda: Vec<f64>) -> Result<Self> {
        Self::new(
            lambda
                .into_iter()
                .map(|v| if v < DUAL_FLOOR { DUAL_FLOOR } else { v })
                .collect(),
        )
    }
}

/// Neumaier-compensated sum.
pub fn compensated_sum(values: &[f64]) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for &v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Largest violation of `g_i(x) ≥ 0` and where it occurs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub value: f64,
    /// Index of the most violated constraint, `None` when `x` is feasible.
    pub index: Option<usize>,
}

/// `max_i max(0, -g_i(x))` with its argmax.
pub fn max_violation(p: &ProblemInstance, x: &[f64]) -> Violation {
    let values = p.constraint_values(x);
    let mut worst = Violation {
        value: 0.0,
        index: None,
    };
    for (i, g) in values.iter().enumerate() {
        if -g > worst.value {
            worst = Violation {
                value: -g,
                index: Some(i),
            };
        }
    }
    worst
}

const PARALLEL_THRESHOLD: usize = 1 << 16;
const CHUNK: usize = 1 << 13;

/// The augmented Lagrangian `L_N(·, λ)` for fixed duals and scaling.
#[derive(Clone, Copy)]
pub struct AugmentedLagrangian<'a> {
    problem: &'a ProblemInstance,
    psi: &'a RescalingFunction,
    dual: &'a DualState,
    scaling: f64,
}

impl<'a> AugmentedLagrangian<'a> {
    pub fn new(
        problem: &'a ProblemInstance,
        psi: &'a RescalingFunction,
        dual: &'a DualState,
        scaling: f64,
    ) -> Result<Self> {
        if !(scaling > 0.0 && scaling.is_finite()) {
            return Err(Error::config(format!("scaling N must be positive, got {scaling}")));
        }
        if dual.len() != problem.num_constraints() {
            return Err(Error::DimensionMismatch {
                expected: problem.num_constraints(),
                got: dual.len(),
            });
        }
        Ok(AugmentedLagrangian {
            problem,
            psi,
            dual,
            scaling,
        })
    }

    pub fn problem(&self) -> &'a ProblemInstance {
        self.problem
    }

    pub fn psi(&self) -> &'a RescalingFunction {
        self.psi
    }

    pub fn dual(&self) -> &'a DualState {
        self.dual
    }

    pub fn scaling(&self) -> f64 {
        self.scaling
    }

    pub fn dim(&self) -> usize {
        self.problem.dim()
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(())
    }

    /// `f(x) - N⁻¹ Σ λ_i ψ(N g_i(x))`
    pub fn value(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        let f = self.problem.objective(x);
        if !f.is_finite() {
            return Err(Error::NonFinite {
                what: "objective value",
                index: None,
            });
        }
        let n = self.scaling;
        let lambda = self.dual.lambda();
        let mut penalty = 0.0;
        for (i, l) in lambda.iter().enumerate() {
            let g = self.problem.constraint(i, x);
            if !g.is_finite() {
                return Err(Error::NonFinite {
                    what: "constraint value",
                    index: Some(i),
                });
            }
            penalty += l * self.psi.psi(n * g);
        }
        Ok(f - penalty / n)
    }

    /// `∇f(x) - Σ λ_i ψ'(N g_i(x)) ∇g_i(x)`, written into `out`.
    ///
    /// Large problems are reduced in fixed-size chunks whose partial sums
    /// are combined in index order, so the result does not depend on the
    /// thread count.
    pub fn gradient_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        self.check_dim(x)?;
        let n = self.dim();
        let m = self.dual.len();
        self.problem.objective_grad(x, out);
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: "objective gradient",
                index: None,
            });
        }
        if m >= PARALLEL_THRESHOLD {
            let partials: Vec<Result<Vec<f64>>> = (0..m.div_ceil(CHUNK))
                .into_par_iter()
                .map(|c| {
                    let mut acc = vec![0.0; n];
                    let mut grad = vec![0.0; n];
                    self.accumulate_constraint_terms(x, c * CHUNK..((c + 1) * CHUNK).min(m), &mut acc, &mut grad)?;
                    Ok(acc)
                })
                .collect();
            for partial in partials {
                for (o, v) in out.iter_mut().zip(partial?) {
                    *o -= v;
                }
            }
        } else {
            let mut acc = vec![0.0; n];
            let mut grad = vec![0.0; n];
            self.accumulate_constraint_terms(x, 0..m, &mut acc, &mut grad)?;
            for (o, v) in out.iter_mut().zip(acc) {
                *o -= v;
            }
        }
        Ok(())
    }

    fn accumulate_constraint_terms(
        &self,
        x: &[f64],
        range: Range<usize>,
        acc: &mut [f64],
        grad: &mut [f64],
    ) -> Result<()> {
        let lambda = self.dual.lambda();
        let n_scale = self.scaling;
        for i in range {
            let g = self.problem.constraint_with_grad(i, x, grad);
            if !g.is_finite() {
                return Err(Error::NonFinite {
                    what: "constraint value",
                    index: Some(i),
                });
            }
            let w = lambda[i] * self.psi.psi_d1(n_scale * g);
            if w == 0.0 {
                continue;
            }
            for (a, dg) in acc.iter_mut().zip(grad.iter()) {
                *a += w * dg;
            }
        }
        Ok(())
    }

    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.dim()];
        self.gradient_into(x, &mut out)?;
        Ok(out)
    }

    /// `B_i(x) = ∇f(x) - ‖λ‖₁ ψ'(N g_i(x)) ∇g_i(x)`, written into `out`.
    /// `scratch` must have length `n`.
    #[inline]
    pub fn component_into(&self, i: usize, x: &[f64], out: &mut [f64], scratch: &mut [f64]) -> Result<()> {
        let m = self.dual.len();
        if i >= m {
            return Err(Error::IndexOutOfRange { index: i, len: m });
        }
        self.problem.objective_grad(x, out);
        let g = self.problem.constraint_with_grad(i, x, scratch);
        if !g.is_finite() {
            return Err(Error::NonFinite {
                what: "constraint value",
                index: Some(i),
            });
        }
        let w = self.dual.l1_norm() * self.psi.psi_d1(self.scaling * g);
        for (o, dg) in out.iter_mut().zip(scratch.iter()) {
            *o -= w * dg;
        }
        Ok(())
    }

    pub fn component_operator(&self, i: usize, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        let mut out = vec![0.0; self.dim()];
        let mut scratch = vec![0.0; self.dim()];
        self.component_into(i, x, &mut out, &mut scratch)?;
        Ok(out)
    }

    /// Stationarity measure `‖x - Π_X[x - ∇L_N(x)]‖_∞` for a known gradient.
    ///
    /// Equals `‖∇L_N(x)‖_∞` whenever `x - ∇L_N(x)` lies in the box, and
    /// vanishes exactly at minimizers of `L_N` over the box.
    pub fn stationarity_from_gradient(&self, x: &[f64], grad: &[f64]) -> f64 {
        let bounds = self.problem.bounds();
        x.iter()
            .zip(grad)
            .zip(bounds.lower().iter().zip(bounds.upper()))
            .map(|((xi, gi), (l, h))| (xi - (xi - gi).clamp(*l, *h)).abs())
            .fold(0.0, f64::max)
    }

    /// Box-aware stationarity of `x`; see [`Self::stationarity_from_gradient`].
    pub fn stationarity_norm(&self, x: &[f64]) -> Result<f64> {
        let grad = self.gradient(x)?;
        Ok(self.stationarity_from_gradient(x, &grad))
    }

    /// Estimates `max_i ‖∇²f_i(x)‖₂` over `indices` by power iteration on
    /// finite differences of the component operators.
    pub fn estimate_component_lipschitz(&self, x: &[f64], indices: &[usize], iters: usize) -> Result<f64> {
        self.check_dim(x)?;
        let n = self.dim();
        let h = 1e-6 * (1.0 + x.iter().fold(0.0f64, |a, v| a.max(v.abs())));
        let mut best: f64 = 0.0;
        let mut base = vec![0.0; n];
        let mut shifted = vec![0.0; n];
        let mut scratch = vec![0.0; n];
        let mut xp = vec![0.0; n];
        for &i in indices {
            self.component_into(i, x, &mut base, &mut scratch)?;
            let mut v: Vec<f64> = (0..n).map(|j| 1.0 + 0.1 * j as f64).collect();
            let mut estimate = 0.0;
            for _ in 0..iters.max(1) {
                let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
                if norm == 0.0 {
                    break;
                }
                for (a, b) in xp.iter_mut().zip(x.iter().zip(&v)) {
                    *a = b.0 + h * b.1 / norm;
                }
                self.component_into(i, &xp, &mut shifted, &mut scratch)?;
                for (vj, (s, b)) in v.iter_mut().zip(shifted.iter().zip(&base)) {
                    *vj = (s - b) / h;
                }
                estimate = v.iter().map(|a| a * a).sum::<f64>().sqrt();
            }
            best = best.max(estimate);
        }
        Ok(best)
    }
}

/// Summary statistics of a dual vector recorded in reports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DualSummary {
    pub min: f64,
    pub max: f64,
    pub l1: f64,
}

impl From<&DualState> for DualSummary {
    fn from(d: &DualState) -> Self {
        DualSummary {
            min: d.min(),
            max: d.max(),
            l1: d.l1_norm(),
        }
    }
}


#[cfg(test)]
mod tests {
    use super::testing::*;
    use super::*;

    #[test]
    fn tiny_instance_closed_forms() {
        let p = tiny();
        let psi = RescalingFunction::default();
        let d = DualState::new(vec![2.0]).unwrap();
        let lag = AugmentedLagrangian::new(&p, &psi, &d, 1.0).unwrap();
        let e1 = (-1.0f64).exp();
        assert!((lag.value(&[0.0]).unwrap() - (-2.0 * (1.0 - e1))).abs() < 1e-12);
        assert!((lag.value(&[0.0]).unwrap() + 1.264241).abs() < 1e-6);
        let grad = lag.gradient(&[0.0]).unwrap();
        assert!((grad[0] - 2.0 * e1).abs() < 1e-12);
        assert!((grad[0] - 0.735759).abs() < 1e-6);
        let b = lag.component_operator(0, &[0.0]).unwrap();
        assert_eq!(b, grad);
        assert!((lag.stationarity_norm(&[0.0]).unwrap() - 0.735759).abs() < 1e-6);
    }

    #[test]
    fn value_is_objective_when_constraints_vanish() {
        // g(x) = 1 - x vanishes at x = 1.
        let p = tiny();
        let psi = RescalingFunction::default();
        for scale in [0.1, 1.0, 37.0] {
            let d = DualState::new(vec![scale]).unwrap();
            let lag = AugmentedLagrangian::new(&p, &psi, &d, 3.0).unwrap();
            assert_eq!(lag.value(&[1.0]).unwrap(), 1.0);
            // ψ'(0) = 1 so the gradient is ∇f - λ∇g.
            assert!((lag.gradient(&[1.0]).unwrap()[0] - (2.0 + scale)).abs() < 1e-12);
        }
    }

    #[test]
    fn component_index_out_of_range() {
        let p = tiny();
        let psi = RescalingFunction::default();
        let d = DualState::ones(1);
        let lag = AugmentedLagrangian::new(&p, &psi, &d, 1.0).unwrap();
        assert!(matches!(
            lag.component_operator(3, &[0.0]),
            Err(Error::IndexOutOfRange { index: 3, len: 1 })
        ));
    }

    #[test]
    fn max_violation_reports_argmax() {
        let oracle = QuadraticLinear {
            mu: 1.0,
            center: vec![0.0],
            a: vec![vec![0.0], vec![0.0]],
            b: vec![0.5, -0.3],
        };
        let p = ProblemInstance::new("v", Arc::new(oracle), BoxBounds::uniform(1, -1.0, 1.0).unwrap(), 1.0, 1.0)
            .unwrap();
        let v = max_violation(&p, &[0.0]);
        assert!((v.value - 0.3).abs() < 1e-15);
        assert_eq!(v.index, Some(1));
        assert_eq!(max_violation(&tiny(), &[0.5]).index, None);
    }

    #[test]
    fn dual_state_rejects_nonpositive() {
        assert!(DualState::new(vec![1.0, 0.0]).is_err());
        assert!(DualState::new(vec![1.0, -2.0]).is_err());
        assert!(DualState::new(vec![f64::NAN]).is_err());
        assert!(DualState::new(vec![]).is_err());
        let d = DualState::new(vec![1.0, 2.0, 3.5]).unwrap();
        assert_eq!(d.l1_norm(), 6.5);
    }

    #[test]
    fn box_projection() {
        let b = BoxBounds::uniform(2, 0.0, 1.0).unwrap();
        assert_eq!(b.project(&[2.0, -1.0]), vec![1.0, 0.0]);
        assert_eq!(b.project(&[0.3, 0.7]), vec![0.3, 0.7]);
        assert!(BoxBounds::new(vec![0.0], vec![0.0]).is_err());
        assert!(BoxBounds::new(vec![0.0, 1.0], vec![1.0]).is_err());
    }

    #[test]
    fn beta_divides_constraints() {
        let p = tiny().with_beta(4.0).unwrap();
        assert_eq!(p.constraint(0, &[-1.0]), 0.5);
        let mut g = [0.0];
        assert_eq!(p.constraint_with_grad(0, &[-1.0], &mut g), 0.5);
        assert_eq!(g[0], -0.25);
        assert!(tiny().with_beta(0.0).is_err());
    }
}
