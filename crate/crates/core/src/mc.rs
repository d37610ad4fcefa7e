//! Seeded, sharded Monte Carlo.
//!
//! Trials are cut into fixed-size shards. Shard `s` draws from the ChaCha8
//! stream `s` of the base seed, and shard results are reduced in shard order,
//! so totals depend only on `(seed, shard size)` and never on how many rayon
//! workers executed them.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;

/// Trials per shard.
pub const SHARD_SIZE: u64 = 1 << 16;

pub type McRng = ChaCha8Rng;

/// Independent generator for shard `shard` of `seed`.
pub fn shard_rng(seed: u64, shard: u64) -> McRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shard);
    rng
}

/// SplitMix64 finalizer; derives sub-seeds for independent experiments
/// sharing one configured seed.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Runs `work(rng, n)` once per shard in parallel and returns the per-shard
/// results in shard order.
pub fn run_sharded<T, F>(trials: u64, seed: u64, work: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&mut McRng, u64) -> Result<T> + Sync,
{
    let shards = trials.div_ceil(SHARD_SIZE);
    (0..shards)
        .into_par_iter()
        .map(|s| {
            let n = SHARD_SIZE.min(trials - s * SHARD_SIZE);
            let mut rng = shard_rng(seed, s);
            work(&mut rng, n)
        })
        .collect()
}

/// Outcome counts over `trials` draws.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Tally {
    pub counts: Vec<u64>,
    pub trials: u64,
}

impl Tally {
    pub fn new(outcomes: usize) -> Self {
        Self {
            counts: vec![0; outcomes],
            trials: 0,
        }
    }

    pub fn record(&mut self, outcome: usize) {
        self.counts[outcome] += 1;
        self.trials += 1;
    }

    pub fn merge(&mut self, other: &Tally) {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.trials += other.trials;
    }

    pub fn frequencies(&self) -> Vec<f64> {
        let n = self.trials.max(1) as f64;
        self.counts.iter().map(|&c| c as f64 / n).collect()
    }

    /// Binomial standard error of each frequency under the expected law.
    pub fn binomial_sigma(&self, expected: &[f64]) -> Vec<f64> {
        let n = self.trials.max(1) as f64;
        expected.iter().map(|p| (p * (1.0 - p) / n).sqrt()).collect()
    }

    /// Empirical standard error of each frequency.
    pub fn stderr(&self) -> Vec<f64> {
        let n = self.trials.max(1) as f64;
        self.frequencies().iter().map(|p| (p * (1.0 - p) / n).sqrt()).collect()
    }

    /// Largest `|freq - expected| / sigma` over outcomes. Degenerate outcomes
    /// (sigma = 0) must match exactly, otherwise they count as infinite.
    pub fn max_z(&self, expected: &[f64]) -> f64 {
        self.frequencies()
            .iter()
            .zip(expected)
            .zip(self.binomial_sigma(expected))
            .map(|((f, p), s)| {
                let d = (f - p).abs();
                if s > 0.0 {
                    d / s
                } else if d <= 1e-12 {
                    0.0
                } else {
                    f64::INFINITY
                }
            })
            .fold(0.0, f64::max)
    }
}

/// Tallies `trials` draws of `draw`, which returns an outcome in `0..outcomes`.
pub fn tally<F>(outcomes: usize, trials: u64, seed: u64, draw: F) -> Result<Tally>
where
    F: Fn(&mut McRng) -> Result<usize> + Sync,
{
    let parts = run_sharded(trials, seed, |rng, n| {
        let mut t = Tally::new(outcomes);
        for _ in 0..n {
            t.record(draw(rng)?);
        }
        Ok(t)
    })?;
    let mut total = Tally::new(outcomes);
    for p in &parts {
        total.merge(p);
    }
    Ok(total)
}

/// A vector estimate with per-component standard errors.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
}

impl Estimate {
    pub fn exact(mean: Vec<f64>) -> Self {
        let stderr = vec![0.0; mean.len()];
        Self { mean, stderr }
    }
}
