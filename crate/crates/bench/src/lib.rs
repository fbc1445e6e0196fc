//! Fixtures shared by the criterion benches.

use rannlr_core::{instances, DualState, ProblemInstance, RescalingFunction};

/// SIP instance with duals concentrated near the binding constraint, as
/// they are late in a run.
pub fn sip_fixture(m: usize) -> (ProblemInstance, RescalingFunction, DualState) {
    let p = instances::build_sip(m).expect("valid m");
    let peak = p.reference().and_then(|r| r.x.clone()).expect("sip has a reference");
    let lambda = (0..m)
        .map(|i| {
            let g = p.constraint(i, &peak);
            (-100.0 * g).exp().max(1e-300) / m as f64
        })
        .collect();
    (p, RescalingFunction::default(), DualState::new(lambda).expect("positive duals"))
}
