//! Monte-Carlo estimate of the asymptotic conversion rate of a filter.
//!
//! Each batch runs `n` independent filter attempts with success
//! probability `p`; the rate estimate of a batch is its success fraction.
//! Batch `b` draws from the ChaCha stream `b` of the given seed, so batches
//! are reproducible independently of each other.

use rand::distr::{Bernoulli, Distribution};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateEstimate {
    pub p_succ: f64,
    pub n: u64,
    pub seed: u64,
    pub batch_means: Vec<f64>,
    /// Mean of the batch estimates.
    pub mean: f64,
    /// Sample variance of the batch estimates; with a single batch, the
    /// plug-in binomial variance `p̂(1 − p̂)/n`.
    pub variance: f64,
}

impl RateEstimate {
    /// Standard deviation of a single batch estimate under the exact law.
    pub fn binomial_sigma(&self) -> f64 {
        (self.p_succ * (1.0 - self.p_succ) / self.n as f64).sqrt()
    }
}

pub fn batch_mean(p_succ: f64, n: u64, seed: u64, batch: u64) -> Result<f64> {
    let law = Bernoulli::new(p_succ)
        .map_err(|_| Error::InvalidDistribution(format!("success probability {p_succ} outside [0, 1]")))?;
    if n == 0 {
        return Err(Error::InvalidDistribution("zero trials".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(batch);
    let hits = (0..n).filter(|_| law.sample(&mut rng)).count();
    Ok(hits as f64 / n as f64)
}

pub fn simulate_rate(p_succ: f64, n: u64, batches: u64, seed: u64) -> Result<RateEstimate> {
    if batches == 0 {
        return Err(Error::InvalidDistribution("zero batches".into()));
    }
    let batch_means = (0..batches)
        .map(|b| batch_mean(p_succ, n, seed, b))
        .collect::<Result<Vec<_>>>()?;
    let k = batch_means.len() as f64;
    let mean = batch_means.iter().sum::<f64>() / k;
    let variance = if batch_means.len() > 1 {
        batch_means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (k - 1.0)
    } else {
        mean * (1.0 - mean) / n as f64
    };
    Ok(RateEstimate {
        p_succ,
        n,
        seed,
        batch_means,
        mean,
        variance,
    })
}
