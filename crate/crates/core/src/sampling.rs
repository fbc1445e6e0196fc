//! Sampling distributions over constraint indices.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::{compensated_sum, DualState};

/// Seeded generator used for every random draw in the crate.
pub type SolverRng = ChaCha8Rng;

/// Independent stream `k` of the generator seeded by `master_seed`.
pub fn stream_rng(master_seed: u64, k: u64) -> SolverRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(k);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistributionSource {
    DualProportional,
    Uniform,
    Custom,
}

/// Draw structure used by [`SamplingDistribution::draw`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplerKind {
    /// Binary search over cumulative sums, `O(log m)` per draw.
    #[default]
    Cumulative,
    /// Vose alias table, `O(1)` per draw.
    Alias,
}

#[derive(Debug, Clone, PartialEq)]
struct AliasTable {
    prob: Vec<f64>,
    alias: Vec<usize>,
}

impl AliasTable {
    fn build(probs: &[f64]) -> Self {
        let m = probs.len();
        let mut scaled: Vec<f64> = probs.iter().map(|p| p * m as f64).collect();
        let mut prob = vec![1.0; m];
        let mut alias: Vec<usize> = (0..m).collect();
        let mut small = Vec::new();
        let mut large = Vec::new();
        for (i, s) in scaled.iter().enumerate() {
            if *s < 1.0 {
                small.push(i);
            } else {
                large.push(i);
            }
        }
        while let (Some(&s), Some(&l)) = (small.last(), large.last()) {
            small.pop();
            large.pop();
            prob[s] = scaled[s];
            alias[s] = l;
            scaled[l] = (scaled[l] + scaled[s]) - 1.0;
            if scaled[l] < 1.0 {
                small.push(l);
            } else {
                large.push(l);
            }
        }
        // Leftovers are 1 up to rounding.
        for i in small.into_iter().chain(large) {
            prob[i] = 1.0;
        }
        AliasTable { prob, alias }
    }

    #[inline]
    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let m = self.prob.len();
        let u: f64 = rng.random::<f64>() * m as f64;
        let col = (u as usize).min(m - 1);
        let frac = u - col as f64;
        if frac < self.prob[col] {
            col
        } else {
            self.alias[col]
        }
    }
}

/// A strictly positive probability vector over `m` indices with a
/// structure for fast draws.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingDistribution {
    probs: Vec<f64>,
    cumulative: Vec<f64>,
    alias: Option<AliasTable>,
    source: DistributionSource,
}

impl SamplingDistribution {
    /// `℘(λ) = λ/‖λ‖₁`.
    pub fn scaled(dual: &DualState) -> Self {
        let l1 = dual.l1_norm();
        let probs = dual.lambda().iter().map(|v| v / l1).collect();
        Self::from_parts(probs, DistributionSource::DualProportional)
    }

    pub fn uniform(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::config("distribution needs at least one index"));
        }
        Ok(Self::from_parts(vec![1.0 / m as f64; m], DistributionSource::Uniform))
    }

    /// A user-supplied distribution. Weights are normalized; they must be
    /// finite and strictly positive.
    pub fn custom(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::config("distribution needs at least one index"));
        }
        if let Some((i, w)) = weights.iter().enumerate().find(|(_, w)| !(**w > 0.0 && w.is_finite())) {
            return Err(Error::config(format!(
                "sampling weight {i} must be finite and strictly positive, got {w}"
            )));
        }
        let total = compensated_sum(&weights);
        let probs = weights.iter().map(|w| w / total).collect();
        Ok(Self::from_parts(probs, DistributionSource::Custom))
    }

    fn from_parts(probs: Vec<f64>, source: DistributionSource) -> Self {
        let mut cumulative = Vec::with_capacity(probs.len());
        let mut acc = 0.0;
        for p in &probs {
            acc += p;
            cumulative.push(acc);
        }
        SamplingDistribution {
            probs,
            cumulative,
            alias: None,
            source,
        }
    }

    /// Builds the alias table so that subsequent draws use it.
    pub fn with_sampler(mut self, kind: SamplerKind) -> Self {
        self.alias = match kind {
            SamplerKind::Cumulative => None,
            SamplerKind::Alias => Some(AliasTable::build(&self.probs)),
        };
        self
    }

    pub fn sampler(&self) -> SamplerKind {
        if self.alias.is_some() {
            SamplerKind::Alias
        } else {
            SamplerKind::Cumulative
        }
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    #[inline]
    pub fn prob(&self, i: usize) -> f64 {
        self.probs[i]
    }

    pub fn source(&self) -> DistributionSource {
        self.source
    }

    /// Draws an index with probability `probs[i]`.
    #[inline]
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        if let Some(table) = &self.alias {
            return table.draw(rng);
        }
        let total = *self.cumulative.last().expect("nonempty distribution");
        let u = rng.random::<f64>() * total;
        self.cumulative
            .partition_point(|c| *c <= u)
            .min(self.probs.len() - 1)
    }

    /// Writes `constraint_index,prob` rows (one-based indices).
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "constraint_index,prob")?;
        for (i, p) in self.probs.iter().enumerate() {
            writeln!(out, "{},{:.16e}", i + 1, p)?;
        }
        Ok(())
    }
}

/// `r^Q = Σ_i p_i²/q_i`.
pub fn variance_ratio(p: &SamplingDistribution, q: &SamplingDistribution) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch {
            expected: p.len(),
            got: q.len(),
        });
    }
    let terms: Vec<f64> = p.probs.iter().zip(&q.probs).map(|(a, b)| a * a / b).collect();
    Ok(compensated_sum(&terms))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scaled_examples() {
        let d = DualState::ones(4);
        assert_eq!(SamplingDistribution::scaled(&d).probs(), &[0.25; 4]);
        let d = DualState::new(vec![1.0, 3.0]).unwrap();
        assert_eq!(SamplingDistribution::scaled(&d).probs(), &[0.25, 0.75]);
        let d7 = DualState::new(vec![7.0, 21.0]).unwrap();
        assert_eq!(SamplingDistribution::scaled(&d7).probs(), &[0.25, 0.75]);
    }

    #[test]
    fn variance_ratio_examples() {
        let p = SamplingDistribution::custom(vec![0.25, 0.75]).unwrap();
        let u = SamplingDistribution::uniform(2).unwrap();
        assert!((variance_ratio(&p, &u).unwrap() - 1.25).abs() < 1e-15);
        assert_eq!(variance_ratio(&p, &p).unwrap(), 1.0);
        assert!(variance_ratio(&p, &SamplingDistribution::uniform(3).unwrap()).is_err());
    }

    #[test]
    fn degenerate_distribution_always_draws_zero() {
        let d = SamplingDistribution::uniform(1).unwrap();
        let a = d.clone().with_sampler(SamplerKind::Alias);
        let mut rng = stream_rng(5, 0);
        for _ in 0..1000 {
            assert_eq!(d.draw(&mut rng), 0);
            assert_eq!(a.draw(&mut rng), 0);
        }
    }

    #[test]
    fn monte_carlo_frequency() {
        let p = SamplingDistribution::custom(vec![0.25, 0.75]).unwrap();
        for dist in [p.clone(), p.with_sampler(SamplerKind::Alias)] {
            let mut rng = stream_rng(2024, 0);
            let t = 1_000_000;
            let hits = (0..t).filter(|_| dist.draw(&mut rng) == 1).count();
            let freq = hits as f64 / t as f64;
            assert!((freq - 0.75).abs() <= 0.002, "frequency {freq}");
        }
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: Vec<u64> = {
            let mut r = stream_rng(9, 3);
            (0..8).map(|_| r.random()).collect()
        };
        let b: Vec<u64> = {
            let mut r = stream_rng(9, 3);
            (0..8).map(|_| r.random()).collect()
        };
        let c: Vec<u64> = {
            let mut r = stream_rng(9, 4);
            (0..8).map(|_| r.random()).collect()
        };
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn csv_dump() {
        let d = SamplingDistribution::custom(vec![1.0, 3.0]).unwrap();
        let mut buf = Vec::new();
        d.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("constraint_index,prob"));
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(row[0], "1");
        assert_eq!(row[1].parse::<f64>().unwrap(), 0.25);
    }

    #[test]
    fn custom_rejects_zero_weight() {
        assert!(SamplingDistribution::custom(vec![1.0, 0.0]).is_err());
        assert!(SamplingDistribution::custom(vec![]).is_err());
    }
}
