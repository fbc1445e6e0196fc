mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rannlr_core::{stream_rng, variance_ratio, DualState, SamplerKind, SamplingDistribution};

use common::random_simplex;

fn weights() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(1e-6f64..1.0, 2..=100)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn ratio_at_least_one(p in weights(), q in weights()) {
        let m = p.len().min(q.len());
        let pd = SamplingDistribution::custom(p[..m].to_vec()).unwrap();
        let qd = SamplingDistribution::custom(q[..m].to_vec()).unwrap();
        let r = variance_ratio(&pd, &qd).unwrap();
        let direct: f64 = pd.probs().iter().zip(qd.probs()).map(|(a, b)| a * a / b).sum();
        prop_assert!(r >= 1.0 - 1e-12);
        prop_assert!((r - direct).abs() <= 1e-12 * direct);
    }

    #[test]
    fn ratio_is_one_for_matching_distributions(p in weights()) {
        let pd = SamplingDistribution::custom(p.clone()).unwrap();
        let qd = SamplingDistribution::custom(p).unwrap();
        prop_assert!((variance_ratio(&pd, &qd).unwrap() - 1.0).abs() <= 1e-12);
    }
}

#[test]
fn ratio_exceeds_one_away_from_equality() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for m in 2..=100 {
        for _ in 0..100 {
            let p = random_simplex(&mut rng, m);
            let q = random_simplex(&mut rng, m);
            let gap = p.iter().zip(&q).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            let r = variance_ratio(&SamplingDistribution::custom(p).unwrap(), &SamplingDistribution::custom(q).unwrap())
                .unwrap();
            if gap > 1e-6 {
                assert!(r > 1.0 + 1e-12, "m = {m}, gap = {gap}, r = {r}");
            }
        }
    }
}

#[test]
fn draw_frequencies_within_four_sigma() {
    const T: usize = 1_000_000;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut checked = 0;
    let mut failures = 0;
    for sampler in [SamplerKind::Cumulative, SamplerKind::Alias] {
        for m in [2, 17, 60] {
            let dist = SamplingDistribution::custom(random_simplex(&mut rng, m)).unwrap().with_sampler(sampler);
            let mut counts = vec![0usize; m];
            let mut draws = stream_rng(m as u64, sampler as u64);
            for _ in 0..T {
                counts[dist.draw(&mut draws)] += 1;
            }
            for (c, p) in counts.iter().zip(dist.probs()) {
                let freq = *c as f64 / T as f64;
                checked += 1;
                if (freq - p).abs() > 4.0 * (p * (1.0 - p) / T as f64).sqrt() {
                    failures += 1;
                }
            }
        }
    }
    // One failure in 10⁴ components is tolerated.
    assert!(failures * 10_000 <= checked.max(10_000), "{failures} of {checked}");
}

#[test]
fn rebuilt_samplers_replay_identical_draws() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let probs = random_simplex(&mut rng, 40);
    for sampler in [SamplerKind::Cumulative, SamplerKind::Alias] {
        let a = SamplingDistribution::custom(probs.clone()).unwrap().with_sampler(sampler);
        let b = SamplingDistribution::custom(probs.clone()).unwrap().with_sampler(sampler);
        let (mut ra, mut rb) = (stream_rng(9, 3), stream_rng(9, 3));
        for _ in 0..10_000 {
            assert_eq!(a.draw(&mut ra), b.draw(&mut rb));
        }
    }
}

#[test]
fn dual_proportional_probabilities() {
    let dual = DualState::new(vec![1.0, 3.0]).unwrap();
    let d = SamplingDistribution::scaled(&dual);
    assert_eq!(d.probs(), &[0.25, 0.75]);
    let mut rng = stream_rng(0, 0);
    let hits = (0..1_000_000).filter(|_| d.draw(&mut rng) == 1).count();
    assert!((hits as f64 / 1e6 - 0.75).abs() <= 0.002);
}
