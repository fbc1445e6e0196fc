//! Randomized nonlinear rescaling (RanNLR) for convex programs with many
//! inequality constraints.
//!
//! The outer loop minimizes the augmented Lagrangian
//! `L_N(x, λ) = f(x) - N⁻¹ Σ λ_i ψ(N g_i(x))` inexactly with a randomized
//! first-order method that samples constraints in proportion to the duals,
//! then updates `λ_i ← λ_i ψ'(N g_i(x))`.
//!
//! ```
//! use rannlr_core::{instances::sip, solve, RescalingFunction, SolverConfig};
//!
//! let problem = sip::build_sip(200).unwrap();
//! let mut cfg = SolverConfig::default();
//! cfg.lambda0 = rannlr_core::Lambda0::Constant(1.0 / 200.0);
//! cfg.outer_iterations = rannlr_core::OuterIterations::Fixed(5);
//! let report = solve(&problem, &RescalingFunction::default(), &cfg).unwrap();
//! assert_eq!(report.iterations.len(), 5);
//! ```
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baseline;
pub mod error;
pub mod experiment;
pub mod instances;
pub mod problem;
pub mod report;
pub mod rescaling;
pub mod sampling;
pub mod solver;
pub mod subroutines;

pub use error::{Error, Result};
pub use problem::{
    max_violation, AugmentedLagrangian, BoxBounds, DualState, ProblemInstance, ProblemOracle, Reference, Violation,
};
pub use report::{IterationRecord, RunReport};
pub use rescaling::{verify_properties, BaseFunction, PropertyReport, RescalingFunction, RescalingKind, RescalingSpec};
pub use sampling::{stream_rng, variance_ratio, SamplerKind, SamplingDistribution, SolverRng};
pub use solver::{
    dual_update, inner_eps_for, outer_iterations_for, solve, solve_with_observer, theory_budget, BudgetMode,
    BudgetQuery, Lambda0, OuterIterations, RateKind, SolverConfig, TheoryConstants,
};
pub use subroutines::{
    gradient_estimator, project_box, run_inner, sgd_stepsize, svrg_contraction, svrg_stepsize, EstimatorState,
    InnerBudget, InnerOutcome, InnerProblem, SamplingPolicy, StepMode, SubroutineKind, SubroutineSpec,
};
