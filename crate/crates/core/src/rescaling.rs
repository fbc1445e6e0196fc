//! Nonlinear rescaling functions.
//!
//! A rescaling function `ψ: ℝ → ℝ` is twice continuously differentiable with
//!
//! 1. `ψ(0) = 0`,
//! 2. `ψ'(t) > 0` everywhere and `ψ'(0) = 1`,
//! 3. `ψ''(t) < 0` everywhere,
//! 4. `ψ(t) ≤ -a t²` for some `a > 0` and all `t ≤ 0`,
//! 5. `ψ'(t) ≤ d₁/t` and `-ψ''(t) ≤ d₂/t²` for some `d₁, d₂ > 0` and all `t > 0`.
//!
//! The built-in functions take one of the classical bases
//! `1 - e^{-t}`, `ln(t + 1)` or `t/(t + 1)` and replace it below a branch
//! point `τ ∈ (-1, 0)` by its second-order Taylor polynomial at `τ`. The
//! result is defined on all of `ℝ`, so the rescaled constraints stay finite
//! even at points that violate the original constraints.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Base function that gets extrapolated below the branch point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaseFunction {
    /// `1 - e^{-t}`
    Exp,
    /// `ln(t + 1)`, defined for `t > -1`
    Log,
    /// `t / (t + 1)`, defined for `t > -1` on the branch we use
    Fraction,
}

impl BaseFunction {
    fn value(self, t: f64) -> f64 {
        match self {
            BaseFunction::Exp => -(-t).exp_m1(),
            BaseFunction::Log => t.ln_1p(),
            BaseFunction::Fraction => t / (t + 1.0),
        }
    }

    fn d1(self, t: f64) -> f64 {
        match self {
            BaseFunction::Exp => (-t).exp(),
            BaseFunction::Log => 1.0 / (t + 1.0),
            BaseFunction::Fraction => 1.0 / ((t + 1.0) * (t + 1.0)),
        }
    }

    fn d2(self, t: f64) -> f64 {
        match self {
            BaseFunction::Exp => -(-t).exp(),
            BaseFunction::Log => -1.0 / ((t + 1.0) * (t + 1.0)),
            BaseFunction::Fraction => -2.0 / ((t + 1.0) * (t + 1.0) * (t + 1.0)),
        }
    }
}

impl std::str::FromStr for BaseFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exp" => Ok(BaseFunction::Exp),
            "log" => Ok(BaseFunction::Log),
            "fraction" => Ok(BaseFunction::Fraction),
            other => Err(Error::config(format!(
                "unknown rescaling kind {other:?} (expected exp, log or fraction)"
            ))),
        }
    }
}

/// Which member of the rescaling family a [`RescalingFunction`] is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RescalingKind {
    ExpExtrapolated,
    LogExtrapolated,
    FractionExtrapolated,
    Custom,
}

/// Quadratic `a2·t² + a1·t + a0` used below the branch point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadraticBranch {
    pub a2: f64,
    pub a1: f64,
    pub a0: f64,
}

impl QuadraticBranch {
    #[inline]
    fn value(&self, t: f64) -> f64 {
        (self.a2 * t + self.a1) * t + self.a0
    }

    #[inline]
    fn d1(&self, t: f64) -> f64 {
        2.0 * self.a2 * t + self.a1
    }
}

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
struct CustomRescaling {
    name: String,
    value: ScalarFn,
    d1: ScalarFn,
    d2: ScalarFn,
}

#[derive(Clone)]
enum Repr {
    Extrapolated {
        base: BaseFunction,
        tau: f64,
        quad: QuadraticBranch,
    },
    Custom(CustomRescaling),
}

/// A rescaling function together with its first two derivatives.
///
/// Immutable after construction; clones share closures for the custom kind.
#[derive(Clone)]
pub struct RescalingFunction {
    repr: Repr,
}

impl fmt::Debug for RescalingFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.repr {
            Repr::Extrapolated { base, tau, quad } => f
                .debug_struct("RescalingFunction")
                .field("base", base)
                .field("tau", tau)
                .field("quad", quad)
                .finish(),
            Repr::Custom(c) => f
                .debug_struct("RescalingFunction")
                .field("custom", &c.name)
                .finish(),
        }
    }
}

impl Default for RescalingFunction {
    /// `1 - e^{-t}` extrapolated below `τ = -0.5`.
    fn default() -> Self {
        Self::extrapolated(BaseFunction::Exp, -0.5).expect("default branch point is valid")
    }
}

impl RescalingFunction {
    /// Quadratic extrapolation of `base` below `tau`.
    ///
    /// The quadratic is the second-order Taylor polynomial of the base at
    /// `tau`, so value, slope and curvature all match at the branch point.
    pub fn extrapolated(base: BaseFunction, tau: f64) -> Result<Self> {
        if !(tau > -1.0 && tau < 0.0) {
            return Err(Error::config(format!(
                "branch point tau must lie in (-1, 0), got {tau}"
            )));
        }
        let (z0, z1, z2) = (base.value(tau), base.d1(tau), base.d2(tau));
        let quad = QuadraticBranch {
            a2: 0.5 * z2,
            a1: z1 - tau * z2,
            a0: z0 - tau * z1 + 0.5 * tau * tau * z2,
        };
        Ok(RescalingFunction {
            repr: Repr::Extrapolated { base, tau, quad },
        })
    }

    /// A user-supplied rescaling function. Nothing is checked here; run
    /// [`verify_properties`] before trusting it.
    pub fn custom<F, G, H>(name: impl Into<String>, value: F, d1: G, d2: H) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        G: Fn(f64) -> f64 + Send + Sync + 'static,
        H: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        RescalingFunction {
            repr: Repr::Custom(CustomRescaling {
                name: name.into(),
                value: Arc::new(value),
                d1: Arc::new(d1),
                d2: Arc::new(d2),
            }),
        }
    }

    pub fn kind(&self) -> RescalingKind {
        match &self.repr {
            Repr::Extrapolated { base, .. } => match base {
                BaseFunction::Exp => RescalingKind::ExpExtrapolated,
                BaseFunction::Log => RescalingKind::LogExtrapolated,
                BaseFunction::Fraction => RescalingKind::FractionExtrapolated,
            },
            Repr::Custom(_) => RescalingKind::Custom,
        }
    }

    /// Branch point, `None` for custom functions.
    pub fn tau(&self) -> Option<f64> {
        match &self.repr {
            Repr::Extrapolated { tau, .. } => Some(*tau),
            Repr::Custom(_) => None,
        }
    }

    /// Coefficients of the quadratic branch, `None` for custom functions.
    pub fn quadratic(&self) -> Option<QuadraticBranch> {
        match &self.repr {
            Repr::Extrapolated { quad, .. } => Some(*quad),
            Repr::Custom(_) => None,
        }
    }

    pub fn name(&self) -> String {
        match &self.repr {
            Repr::Extrapolated { base, tau, .. } => format!("{base:?}(tau={tau})").to_lowercase(),
            Repr::Custom(c) => c.name.clone(),
        }
    }

    #[inline]
    pub fn psi(&self, t: f64) -> f64 {
        match &self.repr {
            Repr::Extrapolated { base, tau, quad } => {
                if t >= *tau {
                    base.value(t)
                } else {
                    quad.value(t)
                }
            }
            Repr::Custom(c) => (c.value)(t),
        }
    }

    #[inline]
    pub fn psi_d1(&self, t: f64) -> f64 {
        match &self.repr {
            Repr::Extrapolated { base, tau, quad } => {
                if t >= *tau {
                    base.d1(t)
                } else {
                    quad.d1(t)
                }
            }
            Repr::Custom(c) => (c.d1)(t),
        }
    }

    #[inline]
    pub fn psi_d2(&self, t: f64) -> f64 {
        match &self.repr {
            Repr::Extrapolated { base, tau, quad } => {
                if t >= *tau {
                    base.d2(t)
                } else {
                    2.0 * quad.a2
                }
            }
            Repr::Custom(c) => (c.d2)(t),
        }
    }
}

/// Serializable description of a built-in rescaling function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RescalingSpec {
    pub kind: BaseFunction,
    pub tau: f64,
}

impl Default for RescalingSpec {
    fn default() -> Self {
        RescalingSpec {
            kind: BaseFunction::Exp,
            tau: -0.5,
        }
    }
}

impl RescalingSpec {
    pub fn build(&self) -> Result<RescalingFunction> {
        RescalingFunction::extrapolated(self.kind, self.tau)
    }
}

/// One pass/fail line of a [`PropertyReport`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyCheck {
    pub pass: bool,
    /// Worst offending grid point, if any.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub worst_point: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadraticDecayCheck {
    pub pass: bool,
    /// Largest `a` with `ψ(t) ≤ -a t²` on every grid point `t < 0`.
    pub a: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReciprocalBoundCheck {
    pub pass: bool,
    /// Smallest `d₁` with `ψ'(t) ≤ d₁/t` on every grid point `t > 0`.
    pub d1: Option<f64>,
    /// Smallest `d₂` with `-ψ''(t) ≤ d₂/t²` on every grid point `t > 0`.
    pub d2: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivativeConsistencyCheck {
    pub pass: bool,
    pub max_rel_err_d1: f64,
    pub max_rel_err_d2: f64,
}

/// Numerical check of the five defining properties on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub function: String,
    pub grid_points: usize,
    /// (i) `ψ(0) = 0`
    pub zero_at_origin: PropertyCheck,
    /// (ii) `ψ' > 0` on the grid and `ψ'(0) = 1`
    pub increasing_unit_slope: PropertyCheck,
    /// (iii) `ψ'' < 0` on the grid
    pub strictly_concave: PropertyCheck,
    /// (iv)
    pub quadratic_decay: QuadraticDecayCheck,
    /// (v)
    pub reciprocal_bounds: ReciprocalBoundCheck,
    pub derivative_consistency: DerivativeConsistencyCheck,
    pub all_pass: bool,
}

/// Step used for the central finite differences in [`verify_properties`].
pub const FD_STEP: f64 = 1e-5;
/// Relative tolerance for the finite-difference consistency check.
pub const FD_REL_TOL: f64 = 1e-6;
const ORIGIN_TOL: f64 = 1e-12;

/// Relative error of a finite-difference derivative, with a small floor on
/// the denominator so derivatives that decay to zero are not over-penalized.
fn fd_rel_err(fd: f64, exact: f64) -> f64 {
    (fd - exact).abs() / exact.abs().max(1e-4)
}

/// Checks the defining properties of a rescaling function on `grid`.
///
/// Failures are reported as data; this never returns an error for a
/// nonempty finite grid.
pub fn verify_properties(psi: &RescalingFunction, grid: &[f64]) -> Result<PropertyReport> {
    if grid.is_empty() {
        return Err(Error::config("property grid must be nonempty"));
    }
    if let Some(bad) = grid.iter().find(|t| !t.is_finite()) {
        return Err(Error::config(format!("property grid contains {bad}")));
    }

    let v0 = psi.psi(0.0);
    let zero_at_origin = PropertyCheck {
        pass: v0.abs() <= ORIGIN_TOL,
        worst_point: None,
    };

    let slope0 = psi.psi_d1(0.0);
    let mut increasing_unit_slope = PropertyCheck {
        pass: (slope0 - 1.0).abs() <= ORIGIN_TOL,
        worst_point: None,
    };
    let mut strictly_concave = PropertyCheck {
        pass: true,
        worst_point: None,
    };
    let mut a_min = f64::INFINITY;
    let mut d1_max: f64 = 0.0;
    let mut d2_max: f64 = 0.0;
    let mut saw_negative = false;
    let mut saw_positive = false;
    let mut err_d1: f64 = 0.0;
    let mut err_d2: f64 = 0.0;
    // ψ''' jumps at the branch point, so the central difference of ψ' is only
    // first-order accurate within one step of it.
    let kink = psi.tau();

    for &t in grid {
        let (v, d1, d2) = (psi.psi(t), psi.psi_d1(t), psi.psi_d2(t));
        if !(d1 > 0.0) {
            increasing_unit_slope.pass = false;
            increasing_unit_slope.worst_point.get_or_insert(t);
        }
        if !(d2 < 0.0) {
            strictly_concave.pass = false;
            strictly_concave.worst_point.get_or_insert(t);
        }
        if t < 0.0 {
            saw_negative = true;
            a_min = a_min.min(-v / (t * t));
        } else if t > 0.0 {
            saw_positive = true;
            d1_max = d1_max.max(t * d1);
            d2_max = d2_max.max(-t * t * d2);
        }

        let fd1 = (psi.psi(t + FD_STEP) - psi.psi(t - FD_STEP)) / (2.0 * FD_STEP);
        err_d1 = err_d1.max(fd_rel_err(fd1, d1));
        let near_kink = kink.is_some_and(|tau| (t - tau).abs() <= 2.0 * FD_STEP);
        if !near_kink {
            let fd2 = (psi.psi_d1(t + FD_STEP) - psi.psi_d1(t - FD_STEP)) / (2.0 * FD_STEP);
            err_d2 = err_d2.max(fd_rel_err(fd2, d2));
        }
    }

    let quadratic_decay = if saw_negative {
        QuadraticDecayCheck {
            pass: a_min > 0.0 && a_min.is_finite(),
            a: Some(a_min),
        }
    } else {
        QuadraticDecayCheck {
            pass: true,
            a: None,
        }
    };
    let reciprocal_bounds = if saw_positive {
        ReciprocalBoundCheck {
            pass: d1_max.is_finite() && d2_max.is_finite(),
            d1: Some(d1_max),
            d2: Some(d2_max),
        }
    } else {
        ReciprocalBoundCheck {
            pass: true,
            d1: None,
            d2: None,
        }
    };
    let derivative_consistency = DerivativeConsistencyCheck {
        pass: err_d1 <= FD_REL_TOL && err_d2 <= FD_REL_TOL,
        max_rel_err_d1: err_d1,
        max_rel_err_d2: err_d2,
    };
    let all_pass = zero_at_origin.pass
        && increasing_unit_slope.pass
        && strictly_concave.pass
        && quadratic_decay.pass
        && reciprocal_bounds.pass
        && derivative_consistency.pass;

    Ok(PropertyReport {
        function: psi.name(),
        grid_points: grid.len(),
        zero_at_origin,
        increasing_unit_slope,
        strictly_concave,
        quadratic_decay,
        reciprocal_bounds,
        derivative_consistency,
        all_pass,
    })
}

/// Evenly spaced grid `lo, lo + step, …` up to and including `hi`
/// (within half a step).
pub fn uniform_grid(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !lo.is_finite() || !hi.is_finite() || hi < lo {
        return Err(Error::config(format!(
            "invalid grid lo={lo} hi={hi} step={step}"
        )));
    }
    let count = ((hi - lo) / step + 0.5).floor() as usize + 1;
    Ok((0..count).map(|j| lo + j as f64 * step).collect())
}
