//! Deterministic per-image random streams and weighted discrete sampling.
//!
//! Every synthetic image draws from its own stream, a pure function of
//! (master seed, stream id). Streams never interact, so generation order and
//! thread count cannot change any output byte.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::stats_index::{PatchDescriptor, ScaleIndex};

/// Seedable counter-based random stream. The value sequence depends only on
/// `(master_seed, stream_id)`.
#[derive(Clone, Debug)]
pub struct RngStream {
    rng: ChaCha8Rng,
    master_seed: u64,
    stream_id: u64,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
        rng.set_stream(stream_id);
        RngStream {
            rng,
            master_seed,
            stream_id,
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Uniform draw in [0, 1) with 53-bit mantissa resolution.
    #[inline]
    pub fn next_unit(&mut self) -> f64 {
        const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
        (self.rng.next_u64() >> 11) as f64 * SCALE
    }

    #[inline]
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_unit()
    }

    #[inline]
    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.next_unit() < p
    }

    /// Uniform integer in [0, n).
    #[inline]
    pub fn uniform_index(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        ((self.next_unit() * n as f64) as usize).min(n - 1)
    }
}

/// Per-scale selection weights; replacement is always on.
#[derive(Clone, Debug)]
pub struct SamplingConfig {
    pub scale_probabilities: Vec<f64>,
    pub mirror_patches: bool,
}

impl SamplingConfig {
    pub fn new(scale_probabilities: Vec<f64>, mirror_patches: bool) -> Result<Self> {
        if scale_probabilities.is_empty() {
            return Err(Error::Config("no scale probabilities".into()));
        }
        if scale_probabilities.iter().any(|&p| p < 0.0) {
            return Err(Error::Config("negative scale probability".into()));
        }
        let sum: f64 = scale_probabilities.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!(
                "scale probabilities sum to {sum}, expected 1"
            )));
        }
        Ok(SamplingConfig {
            scale_probabilities,
            mirror_patches,
        })
    }
}

/// Pick a scale ordinal with the configured probabilities.
pub fn choose_scale(rng: &mut RngStream, config: &SamplingConfig) -> usize {
    let u = rng.next_unit();
    let mut acc = 0.0;
    for (i, &p) in config.scale_probabilities.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    config.scale_probabilities.len() - 1
}

/// Weight-proportional draw: binary search of a uniform value in
/// [0, total_weight) against the exact prefix-sum table.
pub fn choose_patch<'a>(
    rng: &mut RngStream,
    scale_index: &'a ScaleIndex,
) -> Result<&'a PatchDescriptor> {
    if scale_index.total_weight <= 0.0 {
        return Err(Error::EmptyScale {
            scale: scale_index.scale,
        });
    }
    let u = rng.next_unit() * scale_index.total_weight;
    let mut idx = scale_index.cumulative.partition_point(|&c| c <= u);
    if idx >= scale_index.descriptors.len() {
        // u rounded up to the total; fall back to the last positive-weight entry
        idx = scale_index
            .descriptors
            .iter()
            .rposition(|d| d.weight > 0.0)
            .expect("total weight is positive");
    }
    Ok(&scale_index.descriptors[idx])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_scale_index(weights: &[f64]) -> ScaleIndex {
        let descriptors = weights
            .iter()
            .enumerate()
            .map(|(i, &w)| PatchDescriptor {
                sample_idx: 0,
                x: i,
                y: 0,
                side: 2,
                weight: w,
            })
            .collect::<Vec<_>>();
        let mut cumulative = Vec::new();
        let mut acc = 0.0;
        for d in &descriptors {
            acc += d.weight;
            cumulative.push(acc);
        }
        ScaleIndex {
            scale: 1,
            side: 2,
            descriptors,
            cumulative,
            total_weight: acc,
        }
    }

    #[test]
    fn stream_is_reproducible() {
        let mut a = RngStream::new(42, 7);
        let mut b = RngStream::new(42, 7);
        for _ in 0..100 {
            assert_eq!(a.next_unit(), b.next_unit());
        }
    }

    #[test]
    fn distinct_streams_differ() {
        let mut a = RngStream::new(42, 0);
        let mut b = RngStream::new(42, 1);
        let va: Vec<f64> = (0..8).map(|_| a.next_unit()).collect();
        let vb: Vec<f64> = (0..8).map(|_| b.next_unit()).collect();
        assert_ne!(va, vb);
    }

    #[test]
    fn unit_draws_stay_in_range() {
        let mut rng = RngStream::new(1, 0);
        for _ in 0..10_000 {
            let u = rng.next_unit();
            assert!((0.0..1.0).contains(&u));
        }
    }

    #[test]
    fn degenerate_scale_distribution() {
        let cfg = SamplingConfig::new(vec![1.0, 0.0], false).unwrap();
        let mut rng = RngStream::new(3, 0);
        for _ in 0..1000 {
            assert_eq!(choose_scale(&mut rng, &cfg), 0);
        }
    }

    #[test]
    fn scale_sequence_is_deterministic() {
        let cfg = SamplingConfig::new(vec![0.5, 0.5], false).unwrap();
        let seq = |seed, stream| {
            let mut rng = RngStream::new(seed, stream);
            (0..50).map(|_| choose_scale(&mut rng, &cfg)).collect::<Vec<_>>()
        };
        assert_eq!(seq(9, 4), seq(9, 4));
    }

    #[test]
    fn bad_scale_probabilities_rejected() {
        assert!(SamplingConfig::new(vec![0.5, 0.6], false).is_err());
        assert!(SamplingConfig::new(vec![-0.5, 1.5], false).is_err());
        assert!(SamplingConfig::new(vec![], false).is_err());
    }

    #[test]
    fn single_positive_weight_always_wins() {
        let si = toy_scale_index(&[5.0, 0.0, 0.0]);
        let mut rng = RngStream::new(11, 0);
        for _ in 0..1000 {
            assert_eq!(choose_patch(&mut rng, &si).unwrap().x, 0);
        }
    }

    #[test]
    fn binary_search_hand_trace() {
        // weights [2,2,2], cumulative [2,4,6], u = 3.5 -> descriptor 1
        let si = toy_scale_index(&[2.0, 2.0, 2.0]);
        let u = 3.5;
        let idx = si.cumulative.partition_point(|&c| c <= u);
        assert_eq!(idx, 1);
    }

    #[test]
    fn zero_weight_descriptors_never_selected() {
        let si = toy_scale_index(&[1.0, 0.0, 3.0, 0.0, 2.0]);
        let mut rng = RngStream::new(5, 0);
        for _ in 0..20_000 {
            let d = choose_patch(&mut rng, &si).unwrap();
            assert!(d.weight > 0.0);
        }
    }

    #[test]
    fn weighted_frequency_within_binomial_bound() {
        let si = toy_scale_index(&[1.0, 3.0]);
        let mut rng = RngStream::new(123, 0);
        let n = 100_000;
        let mut hits = 0u64;
        for _ in 0..n {
            if choose_patch(&mut rng, &si).unwrap().x == 1 {
                hits += 1;
            }
        }
        let expected = 0.75 * n as f64;
        let sigma = (n as f64 * 0.75 * 0.25).sqrt();
        assert!((hits as f64 - expected).abs() < 3.0 * sigma, "hits = {hits}");
    }

    #[test]
    fn empty_scale_is_error() {
        let si = toy_scale_index(&[0.0, 0.0]);
        let mut rng = RngStream::new(1, 0);
        assert!(matches!(
            choose_patch(&mut rng, &si),
            Err(Error::EmptyScale { .. })
        ));
    }
}
