//! Monte Carlo simulators for the one-shot schemes, the genie-aided hybrid
//! construction, a small-blocklength random-coding hybrid scheme, and a
//! randomized check of the linear-scheme bound.
//!
//! Every simulator is a pure function of `(seed, samples)`: samples are cut
//! into fixed chunks, each chunk draws from its own ChaCha8 stream position,
//! and chunk statistics are merged in chunk order, so results do not depend on
//! the number of workers.

mod block;
mod linear;
mod oneshot;
mod rng;

pub use block::{sim_block_hybrid, BlockCodeConfig, BlockStats, CodebookStats, LawMode, BLOCK_BUDGET_BITS};
pub use linear::{verify_linear_bound, LinearBoundReport, McCheck};
pub use oneshot::{sim_genie_hybrid_binary, sim_hybrid_spec, sim_uncoded_binary, sim_uncoded_gaussian};
pub use rng::{chunk_rng, CHUNK};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Version of the [`SimReport`] and [`LinearBoundReport`] JSON layout.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimConfig {
    pub seed: u64,
    pub samples: u64,
    pub workers: usize,
}

impl SimConfig {
    pub fn new(seed: u64, samples: u64, workers: usize) -> Result<Self> {
        let cfg = Self { seed, samples, workers };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::Invalid("samples must be >= 1".into()));
        }
        if self.workers == 0 {
            return Err(Error::Invalid("workers must be >= 1".into()));
        }
        Ok(())
    }
}

/// A Monte Carlo mean and its standard error `sample_std / sqrt(n)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
}

impl Estimate {
    /// `|mean - value|` in units of the standard error.
    pub fn z_score(&self, value: f64) -> f64 {
        let d = (self.mean - value).abs();
        if d == 0.0 {
            0.0
        } else {
            d / self.std_error
        }
    }

    /// Whether `value` lies within `sigmas` standard errors of the mean.
    pub fn within(&self, value: f64, sigmas: f64) -> bool {
        self.z_score(value) <= sigmas
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EmpiricalMarginal {
    Discrete { probs: Vec<f64> },
    Moments { second_moments: Vec<Estimate> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub schema_version: u32,
    pub scheme: String,
    pub seed: u64,
    pub samples: u64,
    pub mean_distortion: f64,
    pub std_error: f64,
    pub empirical_marginal: EmpiricalMarginal,
    pub tv_to_target: Option<f64>,
    pub channel_power: Option<Estimate>,
    pub msg_error_rate: Option<f64>,
    pub block: Option<BlockStats>,
}

impl SimReport {
    pub fn distortion(&self) -> Estimate {
        Estimate { mean: self.mean_distortion, std_error: self.std_error }
    }
}

/// Streaming mean/variance; merging is exact up to rounding and, applied in a
/// fixed order, deterministic.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub(crate) struct Welford {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Welford {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(&mut self, o: &Welford) {
        if o.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *o;
            return;
        }
        let n = self.n + o.n;
        let d = o.mean - self.mean;
        self.mean += d * o.n as f64 / n as f64;
        self.m2 += o.m2 + d * d * (self.n as f64 * o.n as f64 / n as f64);
        self.n = n;
    }

    pub fn estimate(&self) -> Estimate {
        let var = if self.n > 1 { self.m2 / (self.n - 1) as f64 } else { 0.0 };
        Estimate { mean: self.mean, std_error: (var.max(0.0) / self.n.max(1) as f64).sqrt() }
    }
}

/// Inverse-CDF sampler over a finite support.
#[derive(Debug, Clone)]
pub(crate) struct Categorical {
    cdf: Vec<f64>,
}

impl Categorical {
    pub fn new(weights: &[f64]) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::Invalid("categorical weights must have a positive finite sum".into()));
        }
        let last = weights.iter().rposition(|&w| w > 0.0).expect("positive total");
        let mut acc = 0.0;
        let cdf = weights
            .iter()
            .enumerate()
            .map(|(k, &w)| {
                acc += w;
                if k >= last {
                    1.0
                } else {
                    acc / total
                }
            })
            .collect();
        Ok(Self { cdf })
    }

    /// Index for a uniform draw `u` in `[0, 1)`.
    pub fn sample(&self, u: f64) -> usize {
        self.cdf.partition_point(|&c| c <= u).min(self.cdf.len() - 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn welford_merge_matches_single_pass() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 * 0.1).collect();
        let mut all = Welford::default();
        xs.iter().for_each(|&x| all.push(x));
        let mut a = Welford::default();
        let mut b = Welford::default();
        xs[..313].iter().for_each(|&x| a.push(x));
        xs[313..].iter().for_each(|&x| b.push(x));
        a.merge(&b);
        let (e1, e2) = (all.estimate(), a.estimate());
        assert!((e1.mean - e2.mean).abs() < 1e-12);
        assert!((e1.std_error - e2.std_error).abs() < 1e-12);
        let mean = xs.iter().sum::<f64>() / 1000.0;
        let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / 999.0;
        assert!((e1.std_error - (var / 1000.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn categorical_skips_zero_weights() {
        let c = Categorical::new(&[0.0, 0.25, 0.0, 0.75, 0.0]).unwrap();
        assert_eq!(c.sample(0.0), 1);
        assert_eq!(c.sample(0.2499), 1);
        assert_eq!(c.sample(0.25), 3);
        assert_eq!(c.sample(0.999_999_999), 3);
        assert!(Categorical::new(&[0.0, 0.0]).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(SimConfig::new(1, 0, 1).is_err());
        assert!(SimConfig::new(1, 1, 0).is_err());
        assert!(SimConfig::new(1, 1, 1).is_ok());
    }
}
