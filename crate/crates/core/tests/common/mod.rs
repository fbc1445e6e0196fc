//! Fixtures and reference computations shared by the integration tests.
//!
//! Everything here is written against closed forms so that it can serve as
//! an independent oracle for the library code.

#![allow(dead_code)]

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rannlr_core::{BoxBounds, ProblemInstance, ProblemOracle};

pub const TAU: f64 = -0.5;

/// `1 - e^{-t}` above `τ`, its second-order Taylor polynomial at `τ` below.
pub fn psi(t: f64) -> f64 {
    if t >= TAU {
        1.0 - (-t).exp()
    } else {
        let e = (-TAU).exp();
        let d = t - TAU;
        (1.0 - e) + e * d - 0.5 * e * d * d
    }
}

pub fn psi_d1(t: f64) -> f64 {
    if t >= TAU {
        (-t).exp()
    } else {
        let e = (-TAU).exp();
        e - e * (t - TAU)
    }
}

pub fn psi_d2(t: f64) -> f64 {
    if t >= TAU {
        -(-t).exp()
    } else {
        -(-TAU).exp()
    }
}

/// Largest `|ψ''|`, attained on the quadratic branch.
pub fn psi_d2_bound() -> f64 {
    (-TAU).exp()
}

/// `f(x) = ½ Σ μ_j (x_j - c_j)²` with constraints `g_i(x) = b_i - a_iᵀx ≥ 0`.
#[derive(Debug, Clone)]
pub struct QuadraticLinear {
    pub mu: Vec<f64>,
    pub center: Vec<f64>,
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
}

impl ProblemOracle for QuadraticLinear {
    fn dim(&self) -> usize {
        self.center.len()
    }

    fn num_constraints(&self) -> usize {
        self.b.len()
    }

    fn objective(&self, x: &[f64]) -> f64 {
        0.5 * x
            .iter()
            .zip(&self.center)
            .zip(&self.mu)
            .map(|((v, c), m)| m * (v - c) * (v - c))
            .sum::<f64>()
    }

    fn objective_grad(&self, x: &[f64], grad: &mut [f64]) {
        for (((g, v), c), m) in grad.iter_mut().zip(x).zip(&self.center).zip(&self.mu) {
            *g = m * (v - c);
        }
    }

    fn constraint(&self, i: usize, x: &[f64]) -> f64 {
        self.b[i] - dot(&self.a[i], x)
    }

    fn constraint_with_grad(&self, i: usize, x: &[f64], grad: &mut [f64]) -> f64 {
        for (g, a) in grad.iter_mut().zip(&self.a[i]) {
            *g = -a;
        }
        self.constraint(i, x)
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

impl QuadraticLinear {
    /// Random instance with `x = 0` strictly feasible and the unconstrained
    /// minimizer `c` usually infeasible.
    pub fn random<R: Rng>(rng: &mut R, n: usize, m: usize) -> Self {
        let mu = (0..n).map(|_| rng.random_range(1.0..3.0)).collect();
        let center = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let a = (0..m)
            .map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let b = (0..m).map(|_| rng.random_range(0.1..1.0)).collect();
        QuadraticLinear { mu, center, a, b }
    }

    pub fn mu_min(&self) -> f64 {
        self.mu.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn mu_max(&self) -> f64 {
        self.mu.iter().copied().fold(0.0, f64::max)
    }

    /// Lipschitz bound for every `B_i(·, λ)` with `‖λ‖₁ ≤ l1`.
    pub fn component_lipschitz(&self, l1: f64, scaling: f64) -> f64 {
        let a_max = self.a.iter().map(|r| dot(r, r)).fold(0.0, f64::max);
        self.mu_max() + l1 * scaling * psi_d2_bound() * a_max
    }

    pub fn instance(&self, half_width: f64, lipschitz: f64) -> ProblemInstance {
        let n = self.center.len();
        ProblemInstance::new(
            "quadratic-linear",
            Arc::new(self.clone()),
            BoxBounds::uniform(n, -half_width, half_width).unwrap(),
            self.mu_min(),
            lipschitz,
        )
        .unwrap()
    }

    /// `f(x) - N⁻¹ Σ λ_i ψ(N g_i(x))`
    pub fn lagrangian(&self, lambda: &[f64], scaling: f64, x: &[f64]) -> f64 {
        let pen: f64 = lambda
            .iter()
            .enumerate()
            .map(|(i, l)| l * psi(scaling * self.constraint(i, x)))
            .sum();
        self.objective(x) - pen / scaling
    }

    pub fn lagrangian_grad(&self, lambda: &[f64], scaling: f64, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; x.len()];
        self.objective_grad(x, &mut g);
        for (i, l) in lambda.iter().enumerate() {
            let w = l * psi_d1(scaling * self.constraint(i, x));
            for (gj, aj) in g.iter_mut().zip(&self.a[i]) {
                *gj += w * aj;
            }
        }
        g
    }

    pub fn lagrangian_hess(&self, lambda: &[f64], scaling: f64, x: &[f64]) -> DMatrix<f64> {
        let n = x.len();
        let mut h = DMatrix::from_diagonal(&DVector::from_vec(self.mu.clone()));
        for (i, l) in lambda.iter().enumerate() {
            let w = -l * scaling * psi_d2(scaling * self.constraint(i, x));
            let a = DVector::from_column_slice(&self.a[i]);
            h += w * &a * a.transpose();
        }
        assert_eq!(h.nrows(), n);
        h
    }

    /// Unconstrained minimizer of the Lagrangian by damped Newton.
    pub fn exact_minimizer(&self, lambda: &[f64], scaling: f64, start: &[f64]) -> Vec<f64> {
        let mut x = start.to_vec();
        for _ in 0..200 {
            let g = self.lagrangian_grad(lambda, scaling, &x);
            if g.iter().all(|v| v.abs() < 1e-13) {
                break;
            }
            let h = self.lagrangian_hess(lambda, scaling, &x);
            let d = h.cholesky().expect("Hessian is positive definite").solve(&-DVector::from_vec(g.clone()));
            let f0 = self.lagrangian(lambda, scaling, &x);
            let slope: f64 = d.iter().zip(&g).map(|(a, b)| a * b).sum();
            let mut t = 1.0;
            loop {
                let trial: Vec<f64> = x.iter().zip(d.iter()).map(|(v, dv)| v + t * dv).collect();
                if self.lagrangian(lambda, scaling, &trial) <= f0 + 1e-4 * t * slope || t < 1e-12 {
                    x = trial;
                    break;
                }
                t *= 0.5;
            }
        }
        x
    }

    /// Classical NLR with exact primal solves. Returns `(x^k, λ^k)` for
    /// `k = 1..=iters`.
    pub fn classical_nlr(&self, lambda0: &[f64], scaling: f64, iters: usize) -> Vec<(Vec<f64>, Vec<f64>)> {
        let mut lambda = lambda0.to_vec();
        let mut x = vec![0.0; self.center.len()];
        let mut out = Vec::with_capacity(iters);
        for _ in 0..iters {
            x = self.exact_minimizer(&lambda, scaling, &x);
            lambda = lambda
                .iter()
                .enumerate()
                .map(|(i, l)| l * psi_d1(scaling * self.constraint(i, &x)))
                .collect();
            out.push((x.clone(), lambda.clone()));
        }
        out
    }
}

/// Log-uniform duals in `[lo, hi]`.
pub fn log_uniform<R: Rng>(rng: &mut R, m: usize, lo: f64, hi: f64) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..m).map(|_| rng.random_range(a..b).exp()).collect()
}

/// A random point of the probability simplex with every entry positive.
pub fn random_simplex<R: Rng>(rng: &mut R, m: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..m).map(|_| -rng.random_range(1e-9..1.0f64).ln()).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|v| v / s).collect()
}
