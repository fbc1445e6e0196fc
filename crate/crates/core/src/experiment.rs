//! Named instances, experiment files and benchmark presets.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instances::{build_alp_with, build_sip, AlpOptions};
use crate::problem::ProblemInstance;
use crate::rescaling::RescalingSpec;
use crate::solver::{Lambda0, OuterIterations, SolverConfig};
use crate::subroutines::{SubroutineKind, SubroutineSpec};

/// Built-in instances by name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum InstanceSpec {
    Sip {
        m: usize,
    },
    Alp {
        precision: f64,
        #[serde(default = "default_beta")]
        beta: f64,
        #[serde(default)]
        options: AlpOptions,
    },
}

fn default_beta() -> f64 {
    600.0
}

pub const INSTANCE_NAMES: &[&str] = &["sip", "alp"];

impl InstanceSpec {
    pub fn build(&self) -> Result<ProblemInstance> {
        match self {
            InstanceSpec::Sip { m } => build_sip(*m),
            InstanceSpec::Alp { precision, beta, options } => build_alp_with(*precision, *beta, *options),
        }
    }
}

/// Contents of a `solve --config` file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub instance: InstanceSpec,
    #[serde(default)]
    pub rescaling: RescalingSpec,
    #[serde(default)]
    pub solver: SolverConfig,
    /// Overrides the instance's Lipschitz bound.
    #[serde(default)]
    pub lipschitz: Option<f64>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::config(format!("malformed experiment config: {e}")))
    }

    pub fn build_instance(&self) -> Result<ProblemInstance> {
        let p = self.instance.build()?;
        match self.lipschitz {
            Some(l) => p.with_lipschitz(l),
            None => Ok(p),
        }
    }
}

/// SIP settings: constant step, unit total initial dual mass.
pub fn sip_preset(m: usize, kind: SubroutineKind, scaling: f64, epoch_length: u64, step: f64, eps: f64) -> SolverConfig {
    SolverConfig {
        scaling,
        eps,
        outer_iterations: OuterIterations::Fixed(62),
        lambda0: Lambda0::Constant(1.0 / m.max(1) as f64),
        x0: Some(vec![0.0, 0.0]),
        subroutine: SubroutineSpec {
            kind,
            constant_step: step,
            epoch_length,
            max_inner_iters: 2_000_000,
            ..SubroutineSpec::default()
        },
        ..SolverConfig::default()
    }
}

/// ALP settings for constraints normalized by `β = 600`.
///
/// The objective gradient has unit sup-norm, so the inner tolerance is
/// scaled down to 0.03. Inner runs that hit the iteration cap are common
/// in the first outer steps and do not abort the run.
pub fn alp_preset(kind: SubroutineKind) -> SolverConfig {
    SolverConfig {
        scaling: 1000.0,
        eps: 0.03,
        outer_iterations: OuterIterations::Fixed(30),
        lambda0: Lambda0::Constant(1.0),
        x0: Some(vec![0.0, 0.0]),
        subroutine: SubroutineSpec {
            kind,
            constant_step: 0.005,
            epoch_length: 1000,
            check_interval: 1000,
            max_inner_iters: 2_000_000,
            ..SubroutineSpec::default()
        },
        stall_patience: 30,
        ..SolverConfig::default()
    }
}
