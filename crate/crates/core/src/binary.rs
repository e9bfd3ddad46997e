//! Closed-form curves for `p_X = p_Y = B(rho)`, a `BSC(theta)` channel and
//! Hamming distortion: the common-randomness limit, separation, uncoded and
//! hybrid schemes, and detection of the hybrid scheme's operating modes.

use rayon::prelude::*;
use serde::Serialize;

use crate::curves::CurveTable;
use crate::error::{Error, Result};
use crate::hybrid::{make_uncoded, HybridSpec, Table3};
use crate::infokit::{DiscreteChannel, DiscreteDistribution, Matrix};
use crate::numkit::{
    bconv_unchecked as conv, binary_entropy, binary_entropy_inv, find_root, minimize_1d, Bracket, Tolerance,
    DEFAULT_GRID,
};

/// Minimum grid size accepted by [`thresholds`].
pub const MIN_THRESHOLD_GRID: usize = 256;
const SEP_TOL: f64 = 1e-6;
const UNCODED_TOL: f64 = 1e-6;
const SIMPLE_TOL: f64 = 1e-5;
const SWITCH_RESOLUTION: f64 = 1e-4;

pub const CURVE_COLUMNS: [&str; 8] =
    ["theta", "d_lower", "d_sep", "d_uncoded", "d_hybrid", "d_hybrid_simple", "delta1_opt", "delta1_prime"];

fn hb(p: f64) -> f64 {
    binary_entropy(p).expect("argument validated by caller")
}

fn hb_inv(h: f64) -> f64 {
    binary_entropy_inv(h.clamp(0.0, 1.0)).expect("argument clamped to [0, 1]")
}

fn check_rho(rho: f64) -> Result<()> {
    if rho > 0.0 && rho < 0.5 {
        Ok(())
    } else {
        Err(Error::Domain(format!("rho must lie in (0, 1/2), got {rho}")))
    }
}

/// Like [`check_rho`] but admitting the uniform source.
fn check_rho_closed(rho: f64) -> Result<()> {
    if rho > 0.0 && rho <= 0.5 {
        Ok(())
    } else {
        Err(Error::Domain(format!("rho must lie in (0, 1/2], got {rho}")))
    }
}

fn check_theta(theta: f64) -> Result<()> {
    if (0.0..=0.5).contains(&theta) {
        Ok(())
    } else {
        Err(Error::Domain(format!("theta must lie in [0, 1/2], got {theta}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BinaryConfig {
    rho: f64,
    theta_grid: Vec<f64>,
}

impl BinaryConfig {
    pub fn new(rho: f64, theta_grid: Vec<f64>) -> Result<Self> {
        check_rho(rho)?;
        for &t in &theta_grid {
            check_theta(t)?;
        }
        if theta_grid.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Invalid("theta grid must be sorted".into()));
        }
        Ok(Self { rho, theta_grid })
    }

    /// `points` equally spaced values from `lo` to `hi`.
    pub fn uniform(rho: f64, lo: f64, hi: f64, points: usize) -> Result<Self> {
        if points < 2 || !(lo < hi) {
            return Err(Error::Invalid(format!("need points >= 2 and lo < hi, got {points} on [{lo}, {hi}]")));
        }
        let grid = (0..points)
            .map(|k| if k == points - 1 { hi } else { lo + (hi - lo) * k as f64 / (points - 1) as f64 })
            .collect();
        Self::new(rho, grid)
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn theta_grid(&self) -> &[f64] {
        &self.theta_grid
    }
}

/// Distortion of the best coupling of two `B(rho)` variables with
/// `I <= rate` bits: the root of the symmetric-coupling information equation,
/// or 0 once `rate >= H_b(rho)`.
pub fn d_hat(rho: f64, rate: f64) -> Result<f64> {
    check_rho_closed(rho)?;
    if !(rate >= 0.0) {
        return Err(Error::Domain(format!("rate must be nonnegative, got {rate}")));
    }
    let dmax = 2.0 * (1.0 - rho) * rho;
    let h = hb(rho);
    if rate >= h {
        return Ok(0.0);
    }
    if rate == 0.0 {
        return Ok(dmax);
    }
    let info = |d: f64| {
        let a = (2.0 - 2.0 * rho - d) / 2.0;
        let c = (2.0 * rho - d) / 2.0;
        let xl = |p: f64| if p > 0.0 { p * p.log2() } else { 0.0 };
        2.0 * h + xl(a) + if d > 0.0 { d * (d / 2.0).log2() } else { 0.0 } + xl(c)
    };
    find_root(|d| info(d) - rate, Bracket::new(0.0, dmax)?, &Tolerance::tight())
}

/// Least distortion with unlimited common randomness.
pub fn d_lower(rho: f64, theta: f64) -> Result<f64> {
    check_rho_closed(rho)?;
    check_theta(theta)?;
    d_hat(rho, 1.0 - hb(theta))
}

/// Separation: lossy source code at capacity followed by a channel code.
pub fn d_sep(rho: f64, theta: f64) -> Result<f64> {
    check_rho_closed(rho)?;
    check_theta(theta)?;
    let delta = separation_delta(rho, theta);
    Ok(2.0 * (1.0 - delta) * delta)
}

fn separation_delta(rho: f64, theta: f64) -> f64 {
    hb_inv((hb(rho) - (1.0 - hb(theta))).max(0.0))
}

/// Uncoded transmission with the distribution-restoring decoder
/// `a = p(1|0)`, `b = p(0|1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UncodedDecoder {
    pub a: f64,
    pub b: f64,
}

pub fn d_uncoded(rho: f64, theta: f64) -> Result<(f64, UncodedDecoder)> {
    check_rho_closed(rho)?;
    check_theta(theta)?;
    if theta == 0.0 {
        return Ok((0.0, UncodedDecoder { a: 0.0, b: 0.0 }));
    }
    let c = conv(rho, theta);
    Ok((2.0 * (1.0 - rho) * rho * theta / c, UncodedDecoder { a: 0.0, b: (1.0 - 2.0 * rho) * theta / c }))
}

/// Parameters of the hybrid construction fixed by the choice of `delta1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HybridParams {
    pub delta1: f64,
    pub delta2: f64,
    pub tau: f64,
    pub alpha: f64,
    pub beta: f64,
}

pub fn hybrid_params(rho: f64, theta: f64, delta1: f64) -> Result<HybridParams> {
    check_rho(rho)?;
    check_theta(theta)?;
    if !(0.0..=rho).contains(&delta1) {
        return Err(Error::Domain(format!("delta1 must lie in [0, rho], got {delta1}")));
    }
    if theta == 0.0 {
        return Err(Error::Domain("hybrid parameters need theta > 0".into()));
    }
    Ok(params_unchecked(rho, theta, delta1))
}

fn params_unchecked(rho: f64, theta: f64, delta1: f64) -> HybridParams {
    let d1t = conv(delta1, theta);
    let delta2 = if hb(rho) - hb(delta1) > 1.0 - hb(d1t) {
        ((hb_inv(hb(rho) + hb(d1t) - 1.0) - delta1) / (1.0 - 2.0 * delta1)).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let e = conv(delta1, delta2);
    HybridParams {
        delta1,
        delta2,
        tau: ((rho - e) / (1.0 - 2.0 * e)).clamp(0.0, 1.0),
        alpha: 0.0,
        beta: (e / d1t).clamp(0.0, 1.0),
    }
}

fn hybrid_objective(rho: f64, theta: f64, delta1: f64) -> f64 {
    let HybridParams { delta2, .. } = params_unchecked(rho, theta, delta1);
    let e = conv(delta1, delta2);
    2.0 * e * ((1.0 - delta1 - delta2) * theta + delta1 * delta2) / conv(delta1, theta)
}

/// Hybrid distortion at a fixed `delta1`.
pub fn d_hybrid_at(rho: f64, theta: f64, delta1: f64) -> Result<f64> {
    hybrid_params(rho, theta, delta1)?;
    Ok(hybrid_objective(rho, theta, delta1))
}

/// Optimized hybrid distortion and its minimizing `delta1` (smallest on ties).
pub fn d_hybrid(rho: f64, theta: f64) -> Result<(f64, f64)> {
    check_rho(rho)?;
    check_theta(theta)?;
    if theta == 0.0 {
        return Ok((0.0, 0.0));
    }
    let f = |d: f64| hybrid_objective(rho, theta, d);
    let (mut x, mut fx) = minimize_1d(f, 0.0, rho, DEFAULT_GRID, &Tolerance::default())?;
    // the objective has a kink at delta1'; score it exactly
    let dp = delta1_prime(rho, theta)?;
    let fp = f(dp);
    let slack = 16.0 * f64::EPSILON * fx.abs();
    if fp < fx - slack || (fp <= fx + slack && dp < x) {
        x = dp;
        fx = fp;
    }
    Ok((fx, x))
}

/// Root of `H_b(delta * theta) - H_b(delta) = 1 - H_b(rho)` in `(0, rho)`,
/// or 0 when `H_b(rho) <= 1 - H_b(theta)`.
pub fn delta1_prime(rho: f64, theta: f64) -> Result<f64> {
    check_rho(rho)?;
    check_theta(theta)?;
    let target = 1.0 - hb(rho);
    if hb(rho) <= 1.0 - hb(theta) {
        return Ok(0.0);
    }
    let g = |d: f64| hb(conv(d, theta)) - hb(d) - target;
    if g(rho) >= 0.0 {
        return Ok(rho);
    }
    find_root(g, Bracket::new(0.0, rho)?, &Tolerance::tight())
}

/// `phi(delta1')` with `phi(delta) = 2 (1 - delta) delta theta / (delta * theta)`.
pub fn d_hybrid_simple(rho: f64, theta: f64) -> Result<f64> {
    let d = delta1_prime(rho, theta)?;
    if d == 0.0 {
        return Ok(0.0);
    }
    Ok(2.0 * (1.0 - d) * d * theta / conv(d, theta))
}

/// Operating mode of the optimized hybrid scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Mode {
    Sep,
    Simple,
    Uncoded,
    Other,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Sep => "SEP",
            Mode::Simple => "SIMPLE",
            Mode::Uncoded => "UNCODED",
            Mode::Other => "OTHER",
        })
    }
}

pub fn classify(rho: f64, theta: f64) -> Result<Mode> {
    let (_, d1) = d_hybrid(rho, theta)?;
    let dp = delta1_prime(rho, theta)?;
    Ok(if d1 < SEP_TOL {
        Mode::Sep
    } else if (d1 - dp).abs() < SIMPLE_TOL {
        Mode::Simple
    } else if (d1 - rho).abs() < UNCODED_TOL {
        Mode::Uncoded
    } else {
        Mode::Other
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeSwitch {
    pub theta: f64,
    pub from: Mode,
    pub to: Mode,
}

/// Mode switches along the configured grid, each located by bisection to
/// `1e-4` in `theta`.
pub fn thresholds(config: &BinaryConfig) -> Result<Vec<ModeSwitch>> {
    let grid = config.theta_grid();
    if grid.len() < MIN_THRESHOLD_GRID {
        return Err(Error::GridTooCoarse { points: grid.len(), required: MIN_THRESHOLD_GRID });
    }
    let rho = config.rho();
    // at theta = 1/2 the objective is constant in delta1; no mode is defined
    let grid: Vec<f64> = grid.iter().copied().filter(|&t| t < 0.5).collect();
    let modes = grid.par_iter().map(|&t| classify(rho, t)).collect::<Result<Vec<_>>>()?;
    let mut out = Vec::new();
    for k in 1..grid.len() {
        let (from, to) = (modes[k - 1], modes[k]);
        if from == to {
            continue;
        }
        let (mut lo, mut hi) = (grid[k - 1], grid[k]);
        while hi - lo > SWITCH_RESOLUTION {
            let mid = 0.5 * (lo + hi);
            if classify(rho, mid)? == from {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        out.push(ModeSwitch { theta: 0.5 * (lo + hi), from, to });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BinaryCurveRow {
    pub theta: f64,
    pub d_lower: f64,
    pub d_sep: f64,
    pub d_uncoded: f64,
    pub d_hybrid: f64,
    pub d_hybrid_simple: f64,
    pub delta1_opt: f64,
    pub delta1_prime: f64,
}

impl BinaryCurveRow {
    pub fn compute(rho: f64, theta: f64) -> Result<Self> {
        let (d_hybrid, delta1_opt) = d_hybrid(rho, theta)?;
        Ok(Self {
            theta,
            d_lower: d_lower(rho, theta)?,
            d_sep: d_sep(rho, theta)?,
            d_uncoded: d_uncoded(rho, theta)?.0,
            d_hybrid,
            d_hybrid_simple: d_hybrid_simple(rho, theta)?,
            delta1_opt,
            delta1_prime: delta1_prime(rho, theta)?,
        })
    }

    fn values(&self) -> Vec<f64> {
        vec![
            self.theta,
            self.d_lower,
            self.d_sep,
            self.d_uncoded,
            self.d_hybrid,
            self.d_hybrid_simple,
            self.delta1_opt,
            self.delta1_prime,
        ]
    }
}

pub fn binary_rows(config: &BinaryConfig) -> Result<Vec<BinaryCurveRow>> {
    config.theta_grid().par_iter().map(|&t| BinaryCurveRow::compute(config.rho(), t)).collect()
}

pub fn binary_curves(config: &BinaryConfig) -> Result<CurveTable> {
    let mut table = CurveTable::new(CURVE_COLUMNS);
    for row in binary_rows(config)? {
        table.push(row.values())?;
    }
    Ok(table)
}

fn bern(p: f64) -> Result<DiscreteDistribution> {
    DiscreteDistribution::bernoulli(p)
}

fn pb(p: f64, bit: usize) -> f64 {
    if bit == 1 {
        p
    } else {
        1.0 - p
    }
}

/// Separation scheme as a hybrid candidate: `Z = (W, U)` with `U` uniform and
/// independent of the source.
pub fn separation_spec(rho: f64, theta: f64) -> Result<HybridSpec> {
    check_rho(rho)?;
    check_theta(theta)?;
    let delta = separation_delta(rho, theta);
    let w = ((rho - delta) / (1.0 - 2.0 * delta)).clamp(0.0, 1.0);
    // z = 2 w + u
    let enc = Table3::from_fn([2, 4, 2], |x, z, u| {
        let (wb, ub) = (z / 2, z % 2);
        if ub != u {
            return 0.0;
        }
        pb(w, wb) * pb(delta, x ^ wb) * 0.5 / pb(rho, x)
    });
    let dec = Table3::from_fn([4, 2, 2], |z, _, y| pb(delta, y ^ (z / 2)));
    HybridSpec::new(bern(rho)?, bern(rho)?, enc, DiscreteChannel::bsc(theta)?, dec, Matrix::hamming(2), 0.0)
}

/// Uncoded scheme with the optimal distribution-restoring decoder.
pub fn uncoded_spec(rho: f64, theta: f64) -> Result<HybridSpec> {
    let (_, UncodedDecoder { a, b }) = d_uncoded(rho, theta)?;
    let dec = Matrix::from_rows(vec![vec![1.0 - a, a], vec![b, 1.0 - b]])?;
    make_uncoded(&bern(rho)?, &bern(rho)?, &DiscreteChannel::bsc(theta)?, &dec, &Matrix::hamming(2), 0.0)
}

/// Hybrid scheme at a given `delta1`: `Z = (W, U_d)`, `U = E_1 xor U_d`,
/// `X = W xor E_1 xor E_2`, `Y = W xor E~` with `E~` depending on `U_d xor V`.
pub fn hybrid_spec(rho: f64, theta: f64, delta1: f64) -> Result<HybridSpec> {
    let p = if theta == 0.0 {
        check_rho(rho)?;
        HybridParams { delta1: 0.0, delta2: 0.0, tau: rho, alpha: 0.0, beta: 0.0 }
    } else {
        hybrid_params(rho, theta, delta1)?
    };
    // z = 2 w + u_d
    let enc = Table3::from_fn([2, 4, 2], |x, z, u| {
        let (w, ud) = (z / 2, z % 2);
        let e1 = u ^ ud;
        let e2 = x ^ w ^ e1;
        pb(p.tau, w) * 0.5 * pb(p.delta1, e1) * pb(p.delta2, e2) / pb(rho, x)
    });
    let dec = Table3::from_fn([4, 2, 2], |z, v, y| {
        let (w, ud) = (z / 2, z % 2);
        let flip = if ud ^ v == 0 { p.alpha } else { p.beta };
        pb(flip, y ^ w)
    });
    HybridSpec::new(bern(rho)?, bern(rho)?, enc, DiscreteChannel::bsc(theta)?, dec, Matrix::hamming(2), 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hybrid::evaluate;
    use crate::infokit::{rate_limited_ot, Matrix};

    const RHOS: [f64; 4] = [0.1, 0.25, 0.35, 0.45];

    fn thetas(n: usize) -> impl Iterator<Item = f64> {
        (0..=n).map(move |k| 0.5 * k as f64 / n as f64)
    }

    #[test]
    fn d_hat_examples() {
        let rho = 0.25;
        assert_eq!(d_hat(rho, 0.0).unwrap(), 0.375);
        assert_eq!(d_hat(rho, hb(rho)).unwrap(), 0.0);
        let p = DiscreteDistribution::bernoulli(rho).unwrap();
        let ot = rate_limited_ot(&p, &p, &Matrix::hamming(2), 0.3, &Tolerance::default()).unwrap();
        assert!((d_hat(rho, 0.3).unwrap() - ot.distortion).abs() < 1e-4);
        assert!(d_hat(0.6, 0.1).is_err());
        assert!(d_hat(rho, -0.1).is_err());
    }

    #[test]
    fn d_hat_strictly_decreasing_with_small_residual() {
        for &rho in &RHOS {
            let h = hb(rho);
            let mut last = f64::INFINITY;
            for k in 0..200 {
                let r = h * k as f64 / 200.0;
                let d = d_hat(rho, r).unwrap();
                assert!(d < last, "rho {rho} rate {r}");
                last = d;
                // residual of the defining equation
                let cells = [1.0 - rho - d / 2.0, d / 2.0, d / 2.0, rho - d / 2.0];
                let s: f64 = cells.iter().map(|&p| if p > 0.0 { p * p.log2() } else { 0.0 }).sum();
                assert!((2.0 * h + s - r).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn d_lower_examples() {
        assert_eq!(d_lower(0.25, 0.0).unwrap(), 0.0);
        assert!((d_lower(0.25, 0.5).unwrap() - 0.375).abs() < 1e-15);
        for &t in &[0.05, 0.11, 0.3, 0.45] {
            assert!((d_lower(0.5, t).unwrap() - t).abs() < 1e-10);
        }
        // zero below the threshold H_b^{-1}(1 - H_b(rho))
        let t0 = hb_inv(1.0 - hb(0.25));
        assert_eq!(d_lower(0.25, 0.99 * t0).unwrap(), 0.0);
        assert!(d_lower(0.25, 1.01 * t0).unwrap() > 0.0);
    }

    #[test]
    fn d_sep_examples() {
        let t0 = hb_inv(1.0 - hb(0.25));
        assert_eq!(d_sep(0.25, 0.9 * t0).unwrap(), 0.0);
        assert!((d_sep(0.25, 0.5).unwrap() - 0.375).abs() < 1e-12);
        for &t in &[0.05, 0.2, 0.4] {
            assert!((d_sep(0.5, t).unwrap() - 2.0 * (1.0 - t) * t).abs() < 1e-10);
        }
    }

    #[test]
    fn d_uncoded_examples() {
        assert_eq!(d_uncoded(0.25, 0.0).unwrap().0, 0.0);
        assert!((d_uncoded(0.25, 0.5).unwrap().0 - 0.375).abs() < 1e-15);
        let (d, dec) = d_uncoded(0.25, 0.25).unwrap();
        assert!((d - 0.25).abs() < 1e-15);
        assert_eq!(dec.a, 0.0);
        assert!((dec.b - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn hybrid_params_examples() {
        // second branch: delta2 = 0
        let p = hybrid_params(0.25, 0.3, 0.25).unwrap();
        assert_eq!(p.delta2, 0.0);
        // delta1 = 0 reduces to separation
        for &t in &[0.1, 0.2, 0.4] {
            let p = hybrid_params(0.25, t, 0.0).unwrap();
            assert!((p.delta2 - separation_delta(0.25, t)).abs() < 1e-12);
        }
        // first branch: residual of the defining equation
        let (rho, theta, d1) = (0.25, 0.3, 0.1);
        let p = hybrid_params(rho, theta, d1).unwrap();
        assert!(p.delta2 > 0.0 && p.delta2 <= theta);
        let lhs = hb(rho) - hb(conv(d1, p.delta2));
        let rhs = 1.0 - hb(conv(d1, theta));
        assert!((lhs - rhs).abs() <= 1e-9);
        assert!(hybrid_params(0.25, 0.3, 0.3).is_err());
        assert!(hybrid_params(0.25, 0.0, 0.1).is_err());
    }

    #[test]
    fn params_stay_in_range() {
        for &rho in &RHOS {
            for t in thetas(40).skip(1) {
                for k in 0..=40 {
                    let p = hybrid_params(rho, t, rho * k as f64 / 40.0).unwrap();
                    for v in [p.delta2, p.tau, p.beta] {
                        assert!((0.0..=1.0).contains(&v));
                    }
                    assert!(p.delta2 <= t + 1e-12);
                }
            }
        }
    }

    #[test]
    fn endpoint_reductions() {
        for &rho in &RHOS {
            for t in thetas(50).skip(1) {
                assert!((d_hybrid_at(rho, t, 0.0).unwrap() - d_sep(rho, t).unwrap()).abs() <= 1e-9);
                assert!((d_hybrid_at(rho, t, rho).unwrap() - d_uncoded(rho, t).unwrap().0).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn ordering_of_curves() {
        for &rho in &RHOS {
            let top = 2.0 * (1.0 - rho) * rho;
            for t in thetas(100) {
                let r = BinaryCurveRow::compute(rho, t).unwrap();
                let best_simple = r.d_sep.min(r.d_uncoded).min(r.d_hybrid_simple);
                assert!(r.d_lower <= r.d_hybrid + 1e-9, "rho {rho} theta {t}");
                assert!(r.d_hybrid <= best_simple + 1e-9, "rho {rho} theta {t}");
                assert!(r.d_sep.min(r.d_uncoded) <= top + 1e-9);
                for v in [r.d_lower, r.d_sep, r.d_uncoded, r.d_hybrid, r.d_hybrid_simple] {
                    assert!((0.0..=top + 1e-9).contains(&v));
                }
            }
        }
    }

    #[test]
    fn hybrid_regimes_quarter() {
        let (d, d1) = d_hybrid(0.25, 0.1).unwrap();
        assert!((d - d_sep(0.25, 0.1).unwrap()).abs() < 1e-12);
        assert_eq!(d1, 0.0);
        let (d, _) = d_hybrid(0.25, 0.4).unwrap();
        assert!((d - d_hybrid_simple(0.25, 0.4).unwrap()).abs() < 1e-8);
        assert_eq!(d_hybrid(0.25, 0.0).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn delta1_prime_examples() {
        // H_b(rho) <= 1 - H_b(theta)
        assert_eq!(delta1_prime(0.25, 0.01).unwrap(), 0.0);
        assert_eq!(delta1_prime(0.25, 0.5).unwrap(), 0.25);
        for &rho in &RHOS {
            for t in thetas(60) {
                let d = delta1_prime(rho, t).unwrap();
                if d > 0.0 && d < rho {
                    let res = hb(conv(d, t)) - hb(d) - (1.0 - hb(rho));
                    assert!(res.abs() <= 1e-9);
                }
            }
        }
    }

    #[test]
    fn simple_beats_uncoded_on_upper_range() {
        for &rho in &RHOS {
            // phi is increasing on (0, rho) once (2 rho^2 - 2 rho + 1) theta >= rho^2
            let start = rho * rho / (2.0 * rho * rho - 2.0 * rho + 1.0);
            for k in 0..50 {
                let t = start + (0.5 - start) * k as f64 / 50.0;
                let simple = d_hybrid_simple(rho, t).unwrap();
                let unc = d_uncoded(rho, t).unwrap().0;
                assert!(simple < unc, "rho {rho} theta {t}: {simple} vs {unc}");
            }
        }
        assert!((d_hybrid_simple(0.25, 0.5).unwrap() - d_uncoded(0.25, 0.5).unwrap().0).abs() < 1e-12);
    }

    /// The looser start `rho^2 / (2 rho^2 - rho + 1)` is not sufficient.
    #[test]
    fn looser_start_has_counterexample() {
        let rho: f64 = 0.35;
        let t = rho * rho / (2.0 * rho * rho - rho + 1.0);
        assert!(d_hybrid_simple(rho, t).unwrap() > d_uncoded(rho, t).unwrap().0);
    }

    #[test]
    fn thresholds_quarter() {
        let cfg = BinaryConfig::uniform(0.25, 0.0, 0.5, 256).unwrap();
        let sw = thresholds(&cfg).unwrap();
        assert_eq!(sw.len(), 1, "{sw:?}");
        assert_eq!((sw[0].from, sw[0].to), (Mode::Sep, Mode::Simple));
        assert!((sw[0].theta - 0.148).abs() <= 0.005);
    }

    #[test]
    fn thresholds_seven_twentieths() {
        let cfg = BinaryConfig::uniform(0.35, 0.0, 0.5, 256).unwrap();
        let sw = thresholds(&cfg).unwrap();
        let seq: Vec<Mode> = std::iter::once(sw[0].from).chain(sw.iter().map(|s| s.to)).collect();
        assert_eq!(seq, vec![Mode::Sep, Mode::Uncoded, Mode::Simple], "{sw:?}");
        assert!((sw[0].theta - 0.037).abs() <= 0.005);
        assert!((sw[1].theta - 0.197).abs() <= 0.005);
    }

    #[test]
    fn thresholds_needs_dense_grid() {
        let cfg = BinaryConfig::uniform(0.25, 0.0, 0.5, 100).unwrap();
        assert!(matches!(thresholds(&cfg), Err(Error::GridTooCoarse { .. })));
    }

    #[test]
    fn config_validation() {
        let e = BinaryConfig::uniform(0.6, 0.0, 0.5, 10).unwrap_err();
        assert!(e.to_string().contains("rho must lie in (0, 1/2)"));
        assert!(BinaryConfig::new(0.25, vec![0.1, 0.6]).is_err());
        assert!(BinaryConfig::new(0.25, vec![0.3, 0.1]).is_err());
    }

    #[test]
    fn curve_endpoints() {
        let cfg = BinaryConfig::uniform(0.25, 0.0, 0.5, 11).unwrap();
        let t = binary_curves(&cfg).unwrap();
        assert_eq!(t.columns(), CURVE_COLUMNS);
        let first = &t.rows()[0];
        assert!(first[1..6].iter().all(|&v| v == 0.0));
        let last = &t.rows()[10];
        for k in [2, 3, 4] {
            assert!((last[k] - 0.375).abs() < 1e-9);
        }
    }

    #[test]
    fn constructions_are_feasible_and_match() {
        for &rho in &[0.25, 0.35] {
            for t in thetas(20) {
                let spec = separation_spec(rho, t).unwrap_or_else(|e| panic!("rho {rho} theta {t}: {e}"));
                let r = evaluate(&spec).unwrap();
                assert!(r.feasible, "sep rho {rho} theta {t}: {r:?}");
                assert!((r.e_dist - d_sep(rho, t).unwrap()).abs() < 1e-8);
                let cap = 1.0 - hb(t);
                assert!((r.i_xz - hb(rho).min(cap)).abs() < 1e-8);
                assert!((r.i_zv - cap).abs() < 1e-8);

                let r = evaluate(&uncoded_spec(rho, t).unwrap()).unwrap();
                assert!(r.feasible);
                assert!((r.e_dist - d_uncoded(rho, t).unwrap().0).abs() < 1e-8);

                let (d, d1) = d_hybrid(rho, t).unwrap();
                let r = evaluate(&hybrid_spec(rho, t, d1).unwrap_or_else(|e| panic!("rho {rho} theta {t}: {e}"))).unwrap();
                assert!(r.feasible, "hybrid rho {rho} theta {t}: {r:?}");
                assert!((r.e_dist - d).abs() < 1e-8);
            }
        }
    }
}
