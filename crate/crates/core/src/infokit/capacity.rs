//! Capacity-cost function by Blahut–Arimoto with an outer search on the cost
//! multiplier.

use std::f64::consts::LN_2;

use serde::Serialize;

use super::{DiscreteChannel, DiscreteDistribution};
use crate::error::{Error, Result};
use crate::numkit::Tolerance;

const COST_SLACK: f64 = 1e-12;

/// Output of [`blahut_arimoto`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CapacityResult {
    /// bits per channel use
    pub capacity: f64,
    pub input: DiscreteDistribution,
    pub expected_cost: f64,
    /// Multiplier on the cost term at the returned point (0 when the budget is slack).
    pub multiplier: f64,
}

struct Inner {
    p: Vec<f64>,
    info_nats: f64,
    expected_cost: f64,
}

/// Alternating maximization of `I(U;V) - s E[c(U)]` over inputs restricted to
/// `support`, warm-started from `p`.
fn ba_fixed_multiplier(
    ch: &DiscreteChannel,
    s: f64,
    support: &[bool],
    mut p: Vec<f64>,
    tol: &Tolerance,
) -> Result<Inner> {
    let (nu, nv) = (ch.inputs(), ch.outputs());
    let gap_tol = tol.abs_tol * LN_2;
    let mut q = vec![0.0; nv];
    let mut d = vec![0.0; nu];
    for _ in 0..tol.max_iter {
        q.iter_mut().for_each(|x| *x = 0.0);
        for u in 0..nu {
            if p[u] > 0.0 {
                for (v, qv) in q.iter_mut().enumerate() {
                    *qv += p[u] * ch.prob(u, v);
                }
            }
        }
        for u in 0..nu {
            d[u] = (0..nv)
                .filter(|&v| ch.prob(u, v) > 0.0)
                .map(|v| ch.prob(u, v) * (ch.prob(u, v) / q[v]).ln())
                .sum();
        }
        let lower: f64 = (0..nu).map(|u| p[u] * (d[u] - s * ch.cost()[u])).sum();
        let upper = (0..nu)
            .filter(|&u| support[u])
            .map(|u| d[u] - s * ch.cost()[u])
            .fold(f64::NEG_INFINITY, f64::max);
        if upper - lower <= gap_tol {
            let info_nats = (0..nu).map(|u| p[u] * d[u]).sum::<f64>().max(0.0);
            let expected_cost = (0..nu).map(|u| p[u] * ch.cost()[u]).sum();
            return Ok(Inner { p, info_nats, expected_cost });
        }
        let shift = upper;
        let mut z = 0.0;
        for u in 0..nu {
            p[u] = if support[u] { p[u] * (d[u] - s * ch.cost()[u] - shift).exp() } else { 0.0 };
            z += p[u];
        }
        p.iter_mut().for_each(|x| *x /= z);
    }
    Err(Error::MaxIter { method: "blahut_arimoto", iterations: tol.max_iter })
}

fn uniform_on(support: &[bool]) -> Vec<f64> {
    let k = support.iter().filter(|&&b| b).count() as f64;
    support.iter().map(|&b| if b { 1.0 / k } else { 0.0 }).collect()
}

/// Capacity of `ch` under `E[c(U)] <= gamma` (no constraint when `gamma` is
/// `None`).
///
/// `tol.abs_tol` is the target duality gap in bits and `tol.max_iter` caps the
/// alternating-maximization sweeps for each multiplier.
pub fn blahut_arimoto(ch: &DiscreteChannel, gamma: Option<f64>, tol: &Tolerance) -> Result<CapacityResult> {
    tol.validate()?;
    let nu = ch.inputs();
    let min_cost = ch.cost().iter().copied().fold(f64::INFINITY, f64::min);
    let finish = |inner: Inner, s: f64| -> Result<CapacityResult> {
        Ok(CapacityResult {
            capacity: inner.info_nats / LN_2,
            input: DiscreteDistribution::new(ch.input_alphabet().to_vec(), inner.p)?,
            expected_cost: inner.expected_cost,
            multiplier: s,
        })
    };

    let full = vec![true; nu];
    let Some(gamma) = gamma else {
        let inner = ba_fixed_multiplier(ch, 0.0, &full, uniform_on(&full), tol)?;
        return finish(inner, 0.0);
    };
    if !gamma.is_finite() || gamma < min_cost - COST_SLACK {
        return Err(Error::InfeasibleCost { gamma, min_cost });
    }
    if gamma <= min_cost + COST_SLACK {
        let cheapest: Vec<bool> = ch.cost().iter().map(|&c| c <= min_cost + COST_SLACK).collect();
        let inner = ba_fixed_multiplier(ch, 0.0, &cheapest, uniform_on(&cheapest), tol)?;
        return finish(inner, 0.0);
    }

    let free = ba_fixed_multiplier(ch, 0.0, &full, uniform_on(&full), tol)?;
    if free.expected_cost <= gamma + COST_SLACK {
        return finish(free, 0.0);
    }

    // E[c] under the s-optimal input decreases in s; bracket then bisect.
    let mut s_lo = 0.0;
    let mut s_hi = 1.0;
    let mut hi = ba_fixed_multiplier(ch, s_hi, &full, free.p.clone(), tol)?;
    let mut grow = 0;
    while hi.expected_cost > gamma {
        s_lo = s_hi;
        s_hi *= 2.0;
        hi = ba_fixed_multiplier(ch, s_hi, &full, hi.p, tol)?;
        grow += 1;
        if grow > 200 {
            return Err(Error::MaxIter { method: "blahut_arimoto multiplier bracket", iterations: grow });
        }
    }
    for _ in 0..200 {
        // dual gap of the feasible endpoint: s (gamma - E[c])
        if s_hi * (gamma - hi.expected_cost) <= tol.abs_tol * LN_2 || s_hi - s_lo <= tol.rel_tol * s_hi {
            break;
        }
        let mid = 0.5 * (s_lo + s_hi);
        let m = ba_fixed_multiplier(ch, mid, &full, hi.p.clone(), tol)?;
        if m.expected_cost > gamma {
            s_lo = mid;
        } else {
            s_hi = mid;
            hi = m;
        }
    }
    finish(hi, s_hi)
}
