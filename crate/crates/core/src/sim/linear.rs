//! Randomized check that no linear scheme beats the uncoded bound.
//!
//! A trial draws gains `g` and a decoder
//! `Y = c (g^T X + N) d + W` with `W ~ N(0, Sigma - c^2 (P + 1) d d^T)`, where
//! `P = g^T Sigma g` and `|c|` is at most the value keeping the fill
//! covariance positive semidefinite, so `Cov(Y) = Sigma` exactly. The
//! distortion is then `2 tr(Sigma) - 2 c d^T Sigma g` in closed form.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::rng::{chunk_rng, run_chunks};
use super::{Estimate, SimConfig, Welford, SCHEMA_VERSION};
use crate::error::{Error, Result};
use crate::gaussian::{d_uncoded, linear_bound};

const STREAM_LINEAR: u64 = 5;
const STREAM_LINEAR_MC: u64 = 6;
/// Trials additionally checked by Monte Carlo.
const MC_TRIALS: usize = 4;
const VIOLATION_SLACK: f64 = 1e-9;
const EQUALITY_BUDGETS: [f64; 4] = [0.1, 1.0, 3.0, 10.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McCheck {
    pub trial: usize,
    pub closed_form: f64,
    pub bound: f64,
    pub estimate: Estimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearBoundReport {
    pub schema_version: u32,
    pub seed: u64,
    pub trials: usize,
    pub violations: usize,
    /// Largest `bound - distortion` over all trials (<= 0 when the bound holds).
    pub max_excess: f64,
    /// Largest `|distortion - bound|` for the uncoded decoder at the test budgets.
    pub equality_residual: f64,
    pub mc_checks: Vec<McCheck>,
}

struct Trial {
    g: Vec<f64>,
    d: Vec<f64>,
    c: f64,
}

impl Trial {
    fn power(&self, lambdas: &[f64]) -> f64 {
        self.g.iter().zip(lambdas).map(|(g, l)| g * g * l).sum()
    }

    fn distortion(&self, lambdas: &[f64]) -> f64 {
        let tr: f64 = lambdas.iter().sum();
        let cross: f64 = self.d.iter().zip(&self.g).zip(lambdas).map(|((d, g), l)| d * l * g).sum();
        2.0 * tr - 2.0 * self.c * cross
    }

    fn fill_covariance(&self, lambdas: &[f64]) -> DMatrix<f64> {
        let k = self.c * self.c * (self.power(lambdas) + 1.0);
        DMatrix::from_fn(lambdas.len(), lambdas.len(), |i, j| {
            let diag = if i == j { lambdas[i] } else { 0.0 };
            diag - k * self.d[i] * self.d[j]
        })
    }
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

fn draw_trial(lambdas: &[f64], k: usize, rng: &mut ChaCha8Rng) -> Trial {
    let l = lambdas.len();
    if k == 0 {
        let mut d = vec![0.0; l];
        d[0] = 1.0;
        return Trial { g: vec![0.0; l], d, c: 0.0 };
    }
    let scale = 10f64.powf(rng.random_range(-2.0..2.0));
    let g: Vec<f64> = (0..l).map(|_| scale * normal(rng)).collect();
    // odd trials use the correlation-maximizing direction Sigma^2 g
    let mut d: Vec<f64> = if k % 2 == 1 {
        g.iter().zip(lambdas).map(|(g, l)| l * l * g).collect()
    } else {
        (0..l).map(|_| normal(rng)).collect()
    };
    let norm = d.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        d.iter_mut().for_each(|v| *v /= norm);
    } else {
        d = vec![0.0; l];
        d[0] = 1.0;
    }
    let p: f64 = g.iter().zip(lambdas).map(|(g, l)| g * g * l).sum();
    let q: f64 = d.iter().zip(lambdas).map(|(d, l)| d * d / l).sum();
    let c_max = 1.0 / ((p + 1.0) * q).sqrt();
    let s = if k % 4 < 2 { 1.0 } else { rng.random_range(-1.0..1.0) };
    Trial { g, d, c: s * c_max }
}

fn monte_carlo(lambdas: &[f64], t: &Trial, sim: &SimConfig, stream: u64) -> Result<Estimate> {
    let l = lambdas.len();
    let eig = SymmetricEigen::new(t.fill_covariance(lambdas));
    let root = &eig.eigenvectors * DMatrix::from_diagonal(&eig.eigenvalues.map(|v| v.max(0.0).sqrt()));
    let sd: Vec<f64> = lambdas.iter().map(|v| v.sqrt()).collect();
    let parts = run_chunks(sim, stream, |rng, n| {
        let mut acc = Welford::default();
        for _ in 0..n {
            let x: Vec<f64> = sd.iter().map(|s| s * normal(rng)).collect();
            let s = t.g.iter().zip(&x).map(|(g, x)| g * x).sum::<f64>() + normal(rng);
            let xi = DVector::from_fn(l, |_, _| normal(rng));
            let w = &root * xi;
            let d: f64 = (0..l).map(|i| (x[i] - (t.c * s * t.d[i] + w[i])).powi(2)).sum();
            acc.push(d);
        }
        acc
    })?;
    let mut acc = Welford::default();
    parts.iter().for_each(|p| acc.merge(p));
    Ok(acc.estimate())
}

/// Draws `trials` random linear schemes (trial 0 uses `g = 0`) and counts
/// those whose distortion falls more than 1e-9 below the uncoded bound at
/// their own power. The first few nonzero trials are also simulated with
/// `sim.samples` samples as a check on the closed form.
pub fn verify_linear_bound(lambdas: &[f64], trials: usize, sim: &SimConfig) -> Result<LinearBoundReport> {
    sim.validate()?;
    if trials == 0 {
        return Err(Error::Invalid("need at least one trial".into()));
    }
    d_uncoded(lambdas, 0.0)?;
    let mut violations = 0;
    let mut max_excess = f64::NEG_INFINITY;
    let mut mc_checks = Vec::new();
    for k in 0..trials {
        let mut rng = chunk_rng(sim.seed, STREAM_LINEAR, k as u64);
        let t = draw_trial(lambdas, k, &mut rng);
        let dist = t.distortion(lambdas);
        let bound = linear_bound(lambdas, &t.g)?;
        let excess = bound - dist;
        max_excess = max_excess.max(excess);
        if excess > VIOLATION_SLACK {
            violations += 1;
        }
        if (1..=MC_TRIALS).contains(&k) {
            let estimate = monte_carlo(lambdas, &t, sim, STREAM_LINEAR_MC + k as u64)?;
            mc_checks.push(McCheck { trial: k, closed_form: dist, bound, estimate });
        }
    }
    let l1 = lambdas[0];
    let mut equality_residual: f64 = 0.0;
    for gamma in EQUALITY_BUDGETS {
        let mut g = vec![0.0; lambdas.len()];
        g[0] = (gamma / l1).sqrt();
        let mut d = vec![0.0; lambdas.len()];
        d[0] = 1.0;
        let t = Trial { g, d, c: (l1 / (gamma + 1.0)).sqrt() };
        let residual = (t.distortion(lambdas) - linear_bound(lambdas, &t.g)?).abs();
        equality_residual = equality_residual.max(residual);
    }
    Ok(LinearBoundReport {
        schema_version: SCHEMA_VERSION,
        seed: sim.seed,
        trials,
        violations,
        max_excess,
        equality_residual,
        mc_checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const L: [f64; 2] = [1.5, 0.5];

    #[test]
    fn fill_covariance_is_psd_and_restores_sigma() {
        let ls = [3.0, 1.0, 0.25];
        for k in 0..200 {
            let mut rng = chunk_rng(4, 0, k);
            let t = draw_trial(&ls, k as usize, &mut rng);
            let c = t.fill_covariance(&ls);
            let min = SymmetricEigen::new(c.clone()).eigenvalues.min();
            assert!(min >= -1e-9 * ls[0], "trial {k}: {min}");
            let k2 = t.c * t.c * (t.power(&ls) + 1.0);
            for i in 0..3 {
                assert!((c[(i, i)] + k2 * t.d[i] * t.d[i] - ls[i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn no_violations_and_equality() {
        let r = verify_linear_bound(&L, 2000, &SimConfig::new(1, 20_000, 2).unwrap()).unwrap();
        assert_eq!(r.violations, 0);
        assert!(r.max_excess <= 1e-9);
        assert!(r.equality_residual <= 1e-12);
        assert_eq!(r.mc_checks.len(), MC_TRIALS);
        for m in &r.mc_checks {
            assert!(m.estimate.within(m.closed_form, 4.0), "{m:?}");
            assert!(m.estimate.mean >= m.bound - 3.0 * m.estimate.std_error);
        }
    }

    #[test]
    fn zero_gain_trial_is_tight() {
        let mut rng = chunk_rng(0, 0, 0);
        let t = draw_trial(&L, 0, &mut rng);
        assert_eq!(t.distortion(&L), 4.0);
        assert_eq!(linear_bound(&L, &t.g).unwrap(), 4.0);
    }

    #[test]
    fn deterministic() {
        let a = verify_linear_bound(&L, 50, &SimConfig::new(8, 1000, 1).unwrap()).unwrap();
        let b = verify_linear_bound(&L, 50, &SimConfig::new(8, 1000, 3).unwrap()).unwrap();
        assert_eq!(a, b);
    }
}
