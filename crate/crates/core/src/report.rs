//! Run reports and their JSON/CSV serializations.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// State after one outer iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    /// Outer iteration index; the record describes `x^k`.
    pub k: usize,
    pub objective: f64,
    pub max_violation: f64,
    pub max_violation_index: Option<usize>,
    /// Inner stationarity norm achieved when `x^k` was produced.
    pub stationarity: f64,
    pub inner_converged: bool,
    pub inner_iters: u64,
    pub cum_inner_iters: u64,
    pub wall_ms: f64,
    /// Summary of the duals after the update at this iteration.
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub lambda_l1: f64,
    pub relative_gap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub algorithm: String,
    pub instance: String,
    pub n: usize,
    pub m: usize,
    pub seed: u64,
    pub iterations: Vec<IterationRecord>,
    pub final_x: Vec<f64>,
    pub final_objective: f64,
    pub final_max_violation: f64,
    pub reference_objective: Option<f64>,
    pub relative_gap: Option<f64>,
    pub total_inner_iters: u64,
    /// Instance construction time, reported separately from the solve.
    pub precompute_ms: f64,
    pub solve_ms: f64,
    pub config: serde_json::Value,
}

/// `|f - f*| / |f*|`, or the absolute gap when `f* = 0`.
pub fn relative_gap(value: f64, reference: f64) -> f64 {
    let diff = (value - reference).abs();
    if reference == 0.0 {
        diff
    } else {
        diff / reference.abs()
    }
}

pub const CSV_HEADER: &str = "k,f,max_violation,stationarity,inner_iters,cum_inner_iters,wall_ms";

impl RunReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn write_json<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }

    /// One row per outer iteration at 17 significant digits. With
    /// `timing = false` the `wall_ms` column is written as zero so that
    /// repeated runs produce identical bytes.
    pub fn write_csv<W: Write>(&self, mut out: W, timing: bool) -> Result<()> {
        writeln!(out, "{CSV_HEADER}")?;
        for r in &self.iterations {
            let wall = if timing { r.wall_ms } else { 0.0 };
            writeln!(
                out,
                "{},{:.16e},{:.16e},{:.16e},{},{},{:.16e}",
                r.k, r.objective, r.max_violation, r.stationarity, r.inner_iters, r.cum_inner_iters, wall
            )?;
        }
        Ok(())
    }

    pub fn to_csv(&self, timing: bool) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf, timing).expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("csv output is ascii")
    }

    pub fn last(&self) -> Option<&IterationRecord> {
        self.iterations.last()
    }
}
