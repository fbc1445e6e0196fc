//! Benchmark instances and their reference optima.

pub mod alp;
pub mod lp;
pub mod sip;

pub use alp::{build_alp, build_alp_with, AlpModel, AlpOptions};
pub use lp::{lp_reference, HalfPlane, LpSolution};
pub use sip::{build_sip, sip_coefficients, sip_reference, SipReference};
