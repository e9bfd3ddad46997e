//! Symbol-by-symbol simulators.

use rand::Rng;
use rand_distr::StandardNormal;

use super::rng::run_chunks;
use super::{Categorical, EmpiricalMarginal, SimConfig, SimReport, Welford, SCHEMA_VERSION};
use crate::binary::{hybrid_spec, UncodedDecoder};
use crate::error::{Error, Result};
use crate::gaussian;
use crate::hybrid::HybridSpec;
use crate::infokit::tv_slices;

const STREAM_UNCODED_BINARY: u64 = 1;
const STREAM_UNCODED_GAUSSIAN: u64 = 2;
const STREAM_HYBRID: u64 = 3;

fn merge_counts(total: &mut [u64], part: &[u64]) {
    total.iter_mut().zip(part).for_each(|(t, p)| *t += p);
}

fn frequencies(counts: &[u64], n: u64) -> Vec<f64> {
    counts.iter().map(|&c| c as f64 / n as f64).collect()
}

/// `X ~ B(rho)` through `BSC(theta)`, then `Y` from `V` with
/// `a = p(Y=1 | V=0)` and `b = p(Y=0 | V=1)`.
pub fn sim_uncoded_binary(rho: f64, theta: f64, dec: UncodedDecoder, sim: &SimConfig) -> Result<SimReport> {
    if !(rho > 0.0 && rho <= 0.5) {
        return Err(Error::Domain(format!("rho must lie in (0, 1/2], got {rho}")));
    }
    if !(0.0..=0.5).contains(&theta) {
        return Err(Error::Domain(format!("theta must lie in [0, 1/2], got {theta}")));
    }
    if !(0.0..=1.0).contains(&dec.a) || !(0.0..=1.0).contains(&dec.b) {
        return Err(Error::Domain(format!("decoder probabilities must lie in [0, 1], got a={}, b={}", dec.a, dec.b)));
    }
    let parts = run_chunks(sim, STREAM_UNCODED_BINARY, |rng, n| {
        let mut dist = Welford::default();
        let mut ones = 0u64;
        for _ in 0..n {
            let x = rng.random::<f64>() < rho;
            let v = x ^ (rng.random::<f64>() < theta);
            let r = rng.random::<f64>();
            let y = if v { r >= dec.b } else { r < dec.a };
            ones += u64::from(y);
            dist.push(f64::from(u8::from(x != y)));
        }
        (dist, ones)
    })?;
    let mut dist = Welford::default();
    let mut ones = 0;
    for (d, o) in &parts {
        dist.merge(d);
        ones += o;
    }
    let p1 = ones as f64 / sim.samples as f64;
    let d = dist.estimate();
    Ok(SimReport {
        schema_version: SCHEMA_VERSION,
        scheme: "uncoded-binary".into(),
        seed: sim.seed,
        samples: sim.samples,
        mean_distortion: d.mean,
        std_error: d.std_error,
        empirical_marginal: EmpiricalMarginal::Discrete { probs: vec![1.0 - p1, p1] },
        tv_to_target: Some((p1 - rho).abs()),
        channel_power: None,
        msg_error_rate: None,
        block: None,
    })
}

/// Uncoded transmission of the strongest component over `AWGN(1)`; the other
/// components are regenerated independently at the decoder.
pub fn sim_uncoded_gaussian(lambdas: &[f64], gamma: f64, sim: &SimConfig) -> Result<SimReport> {
    gaussian::d_uncoded(lambdas, gamma)?;
    let l1 = lambdas[0];
    let enc_gain = (gamma / l1).sqrt();
    let dec_gain = (l1 / (gamma + 1.0)).sqrt();
    let sd: Vec<f64> = lambdas.iter().map(|l| l.sqrt()).collect();
    let parts = run_chunks(sim, STREAM_UNCODED_GAUSSIAN, |rng, n| {
        let mut dist = Welford::default();
        let mut power = Welford::default();
        let mut second = vec![Welford::default(); sd.len()];
        for _ in 0..n {
            let x1 = sd[0] * rng.sample::<f64, _>(StandardNormal);
            let u = enc_gain * x1;
            let y1 = dec_gain * (u + rng.sample::<f64, _>(StandardNormal));
            let mut d = (x1 - y1) * (x1 - y1);
            second[0].push(y1 * y1);
            for (s, acc) in sd.iter().zip(second.iter_mut()).skip(1) {
                let x = s * rng.sample::<f64, _>(StandardNormal);
                let y = s * rng.sample::<f64, _>(StandardNormal);
                d += (x - y) * (x - y);
                acc.push(y * y);
            }
            dist.push(d);
            power.push(u * u);
        }
        (dist, power, second)
    })?;
    let mut dist = Welford::default();
    let mut power = Welford::default();
    let mut second = vec![Welford::default(); sd.len()];
    for (d, p, s) in &parts {
        dist.merge(d);
        power.merge(p);
        second.iter_mut().zip(s).for_each(|(a, b)| a.merge(b));
    }
    let d = dist.estimate();
    Ok(SimReport {
        schema_version: SCHEMA_VERSION,
        scheme: "uncoded-gaussian".into(),
        seed: sim.seed,
        samples: sim.samples,
        mean_distortion: d.mean,
        std_error: d.std_error,
        empirical_marginal: EmpiricalMarginal::Moments { second_moments: second.iter().map(Welford::estimate).collect() },
        tv_to_target: None,
        channel_power: Some(power.estimate()),
        msg_error_rate: None,
        block: None,
    })
}

/// Single-letter simulation of a hybrid candidate with `Z` handed to the
/// decoder by a genie: `X ~ p_X`, `(Z, U) ~ enc(.|X)`, `V ~ ch(.|U)`,
/// `Y ~ dec(.|Z, V)`.
pub fn sim_hybrid_spec(spec: &HybridSpec, sim: &SimConfig) -> Result<SimReport> {
    let [nx, nz, nu] = spec.enc().dims();
    let nv = spec.ch().outputs();
    let ny = spec.p_y().len();
    let x_s = Categorical::new(spec.p_x().probs())?;
    let zu_s: Vec<Option<Categorical>> = (0..nx)
        .map(|x| {
            let w: Vec<f64> = (0..nz * nu).map(|k| spec.enc().get(x, k / nu, k % nu)).collect();
            Categorical::new(&w).ok()
        })
        .collect();
    let v_s = (0..nu).map(|u| Categorical::new(spec.ch().matrix().row(u))).collect::<Result<Vec<_>>>()?;
    let y_s = (0..nz * nv)
        .map(|k| {
            let w: Vec<f64> = (0..ny).map(|y| spec.dec().get(k / nv, k % nv, y)).collect();
            Categorical::new(&w)
        })
        .collect::<Result<Vec<_>>>()?;
    let cost = spec.ch().cost();
    let parts = run_chunks(sim, STREAM_HYBRID, |rng, n| {
        let mut dist = Welford::default();
        let mut power = Welford::default();
        let mut counts = vec![0u64; ny];
        for _ in 0..n {
            let x = x_s.sample(rng.random());
            let zu = zu_s[x].as_ref().expect("sampled x has positive probability").sample(rng.random());
            let (z, u) = (zu / nu, zu % nu);
            let v = v_s[u].sample(rng.random());
            let y = y_s[z * nv + v].sample(rng.random());
            counts[y] += 1;
            dist.push(spec.dist().get(x, y));
            power.push(cost[u]);
        }
        (dist, power, counts)
    })?;
    let mut dist = Welford::default();
    let mut power = Welford::default();
    let mut counts = vec![0u64; ny];
    for (d, p, c) in &parts {
        dist.merge(d);
        power.merge(p);
        merge_counts(&mut counts, c);
    }
    let probs = frequencies(&counts, sim.samples);
    let d = dist.estimate();
    Ok(SimReport {
        schema_version: SCHEMA_VERSION,
        scheme: "genie-hybrid".into(),
        seed: sim.seed,
        samples: sim.samples,
        mean_distortion: d.mean,
        std_error: d.std_error,
        tv_to_target: Some(tv_slices(&probs, spec.p_y().probs())),
        empirical_marginal: EmpiricalMarginal::Discrete { probs },
        channel_power: Some(power.estimate()),
        msg_error_rate: None,
        block: None,
    })
}

/// The binary hybrid construction at `delta1`, simulated with a genie-supplied `Z`.
pub fn sim_genie_hybrid_binary(rho: f64, theta: f64, delta1: f64, sim: &SimConfig) -> Result<SimReport> {
    if !(theta > 0.0) {
        return Err(Error::Domain(format!("theta must be > 0, got {theta}")));
    }
    sim_hybrid_spec(&hybrid_spec(rho, theta, delta1)?, sim)
}
