mod common;

use proptest::prelude::*;
use rannlr_core::{BaseFunction, RescalingFunction};

const H: f64 = 1e-5;

fn kinds() -> impl Strategy<Value = BaseFunction> {
    prop_oneof![Just(BaseFunction::Exp), Just(BaseFunction::Log), Just(BaseFunction::Fraction)]
}

fn closed_form(base: BaseFunction, t: f64) -> [f64; 3] {
    match base {
        BaseFunction::Exp => [1.0 - (-t).exp(), (-t).exp(), -(-t).exp()],
        BaseFunction::Log => [(1.0 + t).ln(), 1.0 / (1.0 + t), -1.0 / (1.0 + t).powi(2)],
        BaseFunction::Fraction => [t / (t + 1.0), 1.0 / (t + 1.0).powi(2), -2.0 / (t + 1.0).powi(3)],
    }
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

proptest! {
    #[test]
    fn branches_agree_at_tau(base in kinds(), tau in -0.9f64..-0.1) {
        let psi = RescalingFunction::extrapolated(base, tau).unwrap();
        let q = psi.quadratic().unwrap();
        let exact = closed_form(base, tau);
        let branch = [(q.a2 * tau + q.a1) * tau + q.a0, 2.0 * q.a2 * tau + q.a1, 2.0 * q.a2];
        for d in 0..3 {
            prop_assert!((branch[d] - exact[d]).abs() <= 1e-10 * exact[d].abs().max(1.0), "derivative {d}");
        }
        let below = tau - 1e-13;
        prop_assert!((psi.psi(below) - psi.psi(tau)).abs() <= 1e-10);
        prop_assert!((psi.psi_d1(below) - psi.psi_d1(tau)).abs() <= 1e-10 * exact[1].abs());
    }

    #[test]
    fn derivatives_match_finite_differences(base in kinds(), tau in -0.9f64..-0.1, t in -10.0f64..10.0) {
        prop_assume!((t - tau).abs() > 2.0 * H);
        let psi = RescalingFunction::extrapolated(base, tau).unwrap();
        let fd1 = (psi.psi(t + H) - psi.psi(t - H)) / (2.0 * H);
        let fd2 = (psi.psi_d1(t + H) - psi.psi_d1(t - H)) / (2.0 * H);
        prop_assert!(rel_err(fd1, psi.psi_d1(t)) <= 1e-6, "d1 at {t}: {fd1} vs {}", psi.psi_d1(t));
        prop_assert!(rel_err(fd2, psi.psi_d2(t)) <= 1e-6, "d2 at {t}: {fd2} vs {}", psi.psi_d2(t));
    }

    #[test]
    fn concave(base in kinds(), tau in -0.9f64..-0.1, t1 in -10.0f64..10.0, t2 in -10.0f64..10.0, th in 0.0f64..1.0) {
        let psi = RescalingFunction::extrapolated(base, tau).unwrap();
        let lhs = psi.psi(th * t1 + (1.0 - th) * t2);
        let rhs = th * psi.psi(t1) + (1.0 - th) * psi.psi(t2);
        prop_assert!(lhs >= rhs - 1e-12 * rhs.abs().max(1.0));
    }

    #[test]
    fn matches_closed_form_above_tau(base in kinds(), tau in -0.9f64..-0.1, t in -0.1f64..10.0) {
        let psi = RescalingFunction::extrapolated(base, tau).unwrap();
        let exact = closed_form(base, t);
        let lib = [psi.psi(t), psi.psi_d1(t), psi.psi_d2(t)];
        for d in 0..3 {
            prop_assert!((lib[d] - exact[d]).abs() <= 1e-13 * exact[d].abs().max(1.0));
        }
    }
}

#[test]
fn strictly_increasing_and_concave_on_dense_sample() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
    for base in [BaseFunction::Exp, BaseFunction::Log, BaseFunction::Fraction] {
        let psi = RescalingFunction::extrapolated(base, -0.5).unwrap();
        for _ in 0..10_000 {
            let t = rng.random_range(-10.0..10.0);
            assert!(psi.psi_d1(t) > 0.0 && psi.psi_d2(t) < 0.0, "{} at {t}", psi.name());
        }
    }
}

#[test]
fn default_is_extrapolated_exponential() {
    let psi = RescalingFunction::default();
    for k in -200..=200 {
        let t = k as f64 * 0.05;
        assert!((psi.psi(t) - common::psi(t)).abs() <= 1e-12 * common::psi(t).abs().max(1.0));
        assert!((psi.psi_d1(t) - common::psi_d1(t)).abs() <= 1e-12 * common::psi_d1(t).abs());
        assert!((psi.psi_d2(t) - common::psi_d2(t)).abs() <= 1e-12 * common::psi_d2(t).abs());
    }
}
