//! Optimal transport under a mutual-information budget, via a sweep of
//! log-domain entropic transport problems.

use super::{entropy, mutual_information, ot_min_cost, DiscreteDistribution, Matrix, RDPoint};
use crate::error::{Error, Result};
use crate::numkit::{find_root, Bracket, Tolerance};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinkhornOptions {
    pub max_iter: usize,
    /// L1 violation of the row marginal at which scaling stops.
    pub marginal_tol: f64,
}

impl Default for SinkhornOptions {
    fn default() -> Self {
        Self { max_iter: 100_000, marginal_tol: 1e-9 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateLimitedOptions {
    /// Points in the log-spaced multiplier sweep.
    pub grid: usize,
    /// Sweep range as multiples of the cost spread `max c - min c`.
    pub lambda_max: f64,
    pub lambda_min: f64,
    pub sinkhorn: SinkhornOptions,
}

impl Default for RateLimitedOptions {
    fn default() -> Self {
        Self { grid: 64, lambda_max: 1e3, lambda_min: 1e-3, sinkhorn: SinkhornOptions::default() }
    }
}

/// Solution of `min <cost, pi> + lambda KL(pi || row x col)` over couplings.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropicPlan {
    pub lambda: f64,
    pub plan: Matrix,
    /// `I` of the plan, bits
    pub rate: f64,
    pub distortion: f64,
    pub iterations: usize,
    f: Vec<f64>,
    g: Vec<f64>,
}

fn log_sum_exp(it: impl Iterator<Item = f64> + Clone) -> f64 {
    let m = it.clone().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + it.map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Log-domain Sinkhorn scaling. `warm` supplies starting dual potentials.
pub fn entropic_plan(
    row: &DiscreteDistribution,
    col: &DiscreteDistribution,
    cost: &Matrix,
    lambda: f64,
    opts: &SinkhornOptions,
) -> Result<EntropicPlan> {
    entropic_plan_warm(row, col, cost, lambda, opts, None)
}

fn entropic_plan_warm(
    row: &DiscreteDistribution,
    col: &DiscreteDistribution,
    cost: &Matrix,
    lambda: f64,
    opts: &SinkhornOptions,
    warm: Option<&EntropicPlan>,
) -> Result<EntropicPlan> {
    let (m, n) = (row.len(), col.len());
    if cost.shape() != (m, n) {
        return Err(Error::Dimension(format!("cost matrix {:?} does not match marginals ({m}, {n})", cost.shape())));
    }
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::Domain(format!("multiplier must be positive and finite, got {lambda}")));
    }
    let r = row.probs();
    let c = col.probs();
    let log_r: Vec<f64> = r.iter().map(|x| x.ln()).collect();
    let log_c: Vec<f64> = c.iter().map(|x| x.ln()).collect();
    let (mut f, mut g) = match warm {
        Some(w) if w.f.len() == m && w.g.len() == n => (w.f.clone(), w.g.clone()),
        _ => (vec![0.0; m], vec![0.0; n]),
    };
    // log pi_ij = log r_i + log c_j + (f_i + g_j - C_ij) / lambda
    let log_pi = |f: &[f64], g: &[f64], i: usize, j: usize| log_r[i] + log_c[j] + (f[i] + g[j] - cost.get(i, j)) / lambda;

    let mut violation = f64::INFINITY;
    for it in 1..=opts.max_iter {
        for i in 0..m {
            if r[i] > 0.0 {
                let lse = log_sum_exp((0..n).filter(|&j| c[j] > 0.0).map(|j| log_c[j] + (g[j] - cost.get(i, j)) / lambda));
                f[i] = -lambda * lse;
            }
        }
        for j in 0..n {
            if c[j] > 0.0 {
                let lse = log_sum_exp((0..m).filter(|&i| r[i] > 0.0).map(|i| log_r[i] + (f[i] - cost.get(i, j)) / lambda));
                g[j] = -lambda * lse;
            }
        }
        // columns are exact after the g update; measure the rows
        violation = (0..m)
            .filter(|&i| r[i] > 0.0)
            .map(|i| {
                let s: f64 = (0..n).filter(|&j| c[j] > 0.0).map(|j| log_pi(&f, &g, i, j).exp()).sum();
                (s - r[i]).abs()
            })
            .sum();
        if violation < opts.marginal_tol {
            let plan = Matrix::from_fn(m, n, |i, j| if r[i] > 0.0 && c[j] > 0.0 { log_pi(&f, &g, i, j).exp() } else { 0.0 });
            let rate = mutual_information(&plan);
            let distortion = plan.dot(cost);
            return Ok(EntropicPlan { lambda, plan, rate, distortion, iterations: it, f, g });
        }
        if !violation.is_finite() {
            break;
        }
    }
    Err(Error::SinkhornDivergence { lambda, iterations: opts.max_iter, violation })
}

/// [`rate_limited_ot_with`] with default sweep options.
pub fn rate_limited_ot(
    row: &DiscreteDistribution,
    col: &DiscreteDistribution,
    cost: &Matrix,
    rate: f64,
    tol: &Tolerance,
) -> Result<RDPoint> {
    rate_limited_ot_with(row, col, cost, rate, tol, &RateLimitedOptions::default())
}

/// Least expected cost over couplings of `row` and `col` with `I <= rate`.
///
/// The multiplier is swept from large to small on a log grid until the
/// entropic plan's information reaches `rate`; the crossing is then refined
/// by root finding in `log lambda` (to `tol`). Below the smallest multiplier the
/// curve is completed by the chord to the unconstrained optimum.
pub fn rate_limited_ot_with(
    row: &DiscreteDistribution,
    col: &DiscreteDistribution,
    cost: &Matrix,
    rate: f64,
    tol: &Tolerance,
    opts: &RateLimitedOptions,
) -> Result<RDPoint> {
    let (m, n) = (row.len(), col.len());
    if cost.shape() != (m, n) {
        return Err(Error::Dimension(format!("cost matrix {:?} does not match marginals ({m}, {n})", cost.shape())));
    }
    if !(rate >= 0.0) || !rate.is_finite() {
        return Err(Error::Domain(format!("rate must be finite and nonnegative, got {rate}")));
    }
    if opts.grid < 2 || !(opts.lambda_min > 0.0) || !(opts.lambda_max > opts.lambda_min) {
        return Err(Error::Invalid(format!("bad sweep options {opts:?}")));
    }
    tol.validate()?;

    let independent = {
        let prod = Matrix::from_fn(m, n, |i, j| row.probs()[i] * col.probs()[j]);
        prod.dot(cost)
    };
    if rate == 0.0 {
        return Ok(RDPoint { rate, distortion: independent, multiplier: f64::INFINITY });
    }
    if rate >= entropy(row).min(entropy(col)) {
        let (d, _) = ot_min_cost(row, col, cost)?;
        return Ok(RDPoint { rate, distortion: d, multiplier: 0.0 });
    }
    let (cmin, cmax) = cost
        .data()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    let spread = cmax - cmin;
    if spread == 0.0 {
        return Ok(RDPoint { rate, distortion: independent, multiplier: f64::INFINITY });
    }

    let lambdas: Vec<f64> = (0..opts.grid)
        .map(|k| {
            let t = k as f64 / (opts.grid - 1) as f64;
            spread * (opts.lambda_max.ln() + t * (opts.lambda_min.ln() - opts.lambda_max.ln())).exp()
        })
        .collect();

    let mut prev: Option<EntropicPlan> = None;
    for &lambda in &lambdas {
        let cur = entropic_plan_warm(row, col, cost, lambda, &opts.sinkhorn, prev.as_ref())?;
        if cur.rate >= rate {
            let Some(above) = prev else {
                // even the largest multiplier spends more than `rate`; the
                // curve is convex, so the chord to R = 0 is within a hair
                let w = rate / cur.rate;
                return Ok(RDPoint {
                    rate,
                    distortion: (1.0 - w) * independent + w * cur.distortion,
                    multiplier: cur.lambda,
                });
            };
            return refine(row, col, cost, rate, tol, opts, above, cur);
        }
        prev = Some(cur);
    }

    let last = prev.expect("grid has at least two points");
    let (d_star, plan) = ot_min_cost(row, col, cost)?;
    let i_star = plan.mutual_information();
    if rate >= i_star || i_star <= last.rate {
        return Ok(RDPoint { rate, distortion: d_star, multiplier: 0.0 });
    }
    let w = (rate - last.rate) / (i_star - last.rate);
    Ok(RDPoint { rate, distortion: (1.0 - w) * last.distortion + w * d_star, multiplier: last.lambda })
}

/// Root of `I(lambda) = rate` between two swept multipliers, in `log lambda`.
#[allow(clippy::too_many_arguments)]
fn refine(
    row: &DiscreteDistribution,
    col: &DiscreteDistribution,
    cost: &Matrix,
    rate: f64,
    tol: &Tolerance,
    opts: &RateLimitedOptions,
    above: EntropicPlan,
    below: EntropicPlan,
) -> Result<RDPoint> {
    if below.rate - rate <= tol.abs_tol {
        return Ok(RDPoint { rate, distortion: below.distortion, multiplier: below.lambda });
    }
    let mut warm = below.clone();
    let mut failure = None;
    let bracket = Bracket::new(below.lambda.ln(), above.lambda.ln())?;
    let root_tol = Tolerance { abs_tol: tol.abs_tol, rel_tol: tol.rel_tol, max_iter: tol.max_iter.max(200) };
    let t = find_root(
        |t| match entropic_plan_warm(row, col, cost, t.exp(), &opts.sinkhorn, Some(&warm)) {
            Ok(p) => {
                let v = p.rate - rate;
                warm = p;
                v
            }
            Err(e) => {
                failure = Some(e);
                f64::NAN
            }
        },
        bracket,
        &root_tol,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let t = t?;
    let p = if warm.lambda == t.exp() {
        warm
    } else {
        entropic_plan_warm(row, col, cost, t.exp(), &opts.sinkhorn, Some(&warm))?
    };
    Ok(RDPoint { rate, distortion: p.distortion, multiplier: p.lambda })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::binary_entropy;

    fn bern(p: f64) -> DiscreteDistribution {
        DiscreteDistribution::bernoulli(p).unwrap()
    }

    /// Independent solve of the binary equal-marginal curve: on the symmetric
    /// coupling with off-diagonal mass D/2 each, find D with I = R by
    /// bisection.
    fn binary_oracle(rho: f64, r: f64) -> f64 {
        let info = |d: f64| {
            let cells = [1.0 - rho - d / 2.0, d / 2.0, d / 2.0, rho - d / 2.0];
            let marg = [1.0 - rho, rho];
            let mut acc = 0.0;
            for (k, &p) in cells.iter().enumerate() {
                if p > 0.0 {
                    acc += p * (p / (marg[k / 2] * marg[k % 2])).log2();
                }
            }
            acc
        };
        let (mut lo, mut hi) = (0.0, 2.0 * rho * (1.0 - rho));
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if info(mid) > r {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn binary_quarter_at_point_three() {
        let p = bern(0.25);
        let pt = rate_limited_ot(&p, &p, &Matrix::hamming(2), 0.3, &Tolerance::default()).unwrap();
        assert!((pt.distortion - binary_oracle(0.25, 0.3)).abs() < 1e-6);
    }

    #[test]
    fn trivial_ends() {
        let p = bern(0.25);
        let h = Matrix::hamming(2);
        let tol = Tolerance::default();
        let zero = rate_limited_ot(&p, &p, &h, 0.0, &tol).unwrap();
        assert!((zero.distortion - 2.0 * 0.25 * 0.75).abs() < 1e-15);
        let full = rate_limited_ot(&p, &p, &h, binary_entropy(0.25).unwrap(), &tol).unwrap();
        assert!(full.distortion.abs() < 1e-15);
        assert!(rate_limited_ot(&p, &p, &h, -0.1, &tol).is_err());
    }

    #[test]
    fn sinkhorn_marginals() {
        let row = DiscreteDistribution::from_probs(vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let col = DiscreteDistribution::from_probs(vec![0.5, 0.25, 0.25]).unwrap();
        let cost = Matrix::from_fn(4, 3, |i, j| ((i as f64) - 1.5 * j as f64).powi(2));
        for &lambda in &[100.0, 3.0, 0.5, 0.05, 0.01] {
            let p = entropic_plan(&row, &col, &cost, lambda, &SinkhornOptions::default()).unwrap();
            for (a, b) in p.plan.row_sums().iter().zip(row.probs()) {
                assert!((a - b).abs() < 1e-8);
            }
            for (a, b) in p.plan.col_sums().iter().zip(col.probs()) {
                assert!((a - b).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn sinkhorn_reports_divergence() {
        let row = bern(0.5);
        let col = bern(0.25);
        let opts = SinkhornOptions { max_iter: 3, marginal_tol: 1e-15 };
        let e = entropic_plan(&row, &col, &Matrix::hamming(2), 1e-3, &opts).unwrap_err();
        assert!(matches!(e, Error::SinkhornDivergence { .. }));
    }

    #[test]
    fn monotone_convex_and_sandwiched() {
        let row = DiscreteDistribution::from_probs(vec![0.5, 0.3, 0.2]).unwrap();
        let col = DiscreteDistribution::from_probs(vec![0.2, 0.2, 0.6]).unwrap();
        let cost = Matrix::from_fn(3, 3, |i, j| (i as f64 - j as f64).abs());
        let tol = Tolerance::default();
        let (d_star, _) = ot_min_cost(&row, &col, &cost).unwrap();
        let indep = Matrix::from_fn(3, 3, |i, j| row.probs()[i] * col.probs()[j]).dot(&cost);
        let rates: Vec<f64> = (0..25).map(|k| 0.05 * k as f64).collect();
        let ds: Vec<f64> = rates
            .iter()
            .map(|&r| rate_limited_ot(&row, &col, &cost, r, &tol).unwrap().distortion)
            .collect();
        for w in ds.windows(2) {
            assert!(w[1] <= w[0] + 1e-9);
        }
        for w in ds.windows(3) {
            assert!(w[0] + w[2] - 2.0 * w[1] >= -1e-7);
        }
        for &d in &ds {
            assert!(d >= d_star - 1e-9 && d <= indep + 1e-9);
        }
    }
}
