//! Closed-form curves for a zero-mean Gaussian vector source with covariance
//! `diag(lambda_1 >= ... >= lambda_L)`, squared-error distortion and an
//! `AWGN(1)` channel with power budget `gamma`.
//!
//! Rates are in bits. A budget `gamma` supports `R = log2(gamma + 1) / 2`.

use std::f64::consts::LN_2;

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::Serialize;

use crate::curves::CurveTable;
use crate::error::{Error, Result};
use crate::numkit::{find_root, minimize_1d, Bracket, Tolerance, DEFAULT_GRID};

pub const CURVE_COLUMNS: [&str; 6] = ["gamma", "d_lower", "d_sep", "d_uncoded", "d_hybrid", "alpha_opt"];

/// Symmetry tolerance for [`diagonalize`].
pub const SYMMETRY_TOL: f64 = 1e-9;

const KAPPA_TOL: Tolerance = Tolerance { abs_tol: 1e-14, rel_tol: 1e-15, max_iter: 400 };
const BRACKET_DOUBLINGS: usize = 2000;

fn check_spectrum(lambdas: &[f64], min_len: usize) -> Result<()> {
    if lambdas.len() < min_len {
        return Err(Error::Domain(format!("need at least {min_len} eigenvalues, got {}", lambdas.len())));
    }
    if lambdas.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
        return Err(Error::Domain("eigenvalues must be positive and finite".into()));
    }
    if lambdas.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::Domain("eigenvalues must be sorted in descending order".into()));
    }
    Ok(())
}

fn check_lambdas(lambdas: &[f64]) -> Result<()> {
    check_spectrum(lambdas, 2)
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma >= 0.0 && gamma.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("power budget must be finite and >= 0, got {gamma}")))
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if (0.0..=1.0).contains(&alpha) {
        Ok(())
    } else {
        Err(Error::Domain(format!("alpha must lie in [0, 1], got {alpha}")))
    }
}

/// Channel capacity of `AWGN(1)` at budget `gamma`, in bits.
pub fn awgn_capacity(gamma: f64) -> f64 {
    0.5 * gamma.ln_1p() / LN_2
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GaussianConfig {
    lambdas: Vec<f64>,
    gamma_grid: Vec<f64>,
}

impl GaussianConfig {
    pub fn new(lambdas: Vec<f64>, gamma_grid: Vec<f64>) -> Result<Self> {
        check_lambdas(&lambdas)?;
        for &g in &gamma_grid {
            check_gamma(g)?;
        }
        if gamma_grid.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Domain("gamma grid must be sorted ascending".into()));
        }
        Ok(Self { lambdas, gamma_grid })
    }

    /// `points` budgets evenly spaced on `[lo, hi]`.
    pub fn uniform(lambdas: Vec<f64>, lo: f64, hi: f64, points: usize) -> Result<Self> {
        Self::new(lambdas, grid(lo, hi, points, false)?)
    }

    /// `points` budgets evenly spaced in `log(gamma)` on `[lo, hi]`, `lo > 0`.
    pub fn log_grid(lambdas: Vec<f64>, lo: f64, hi: f64, points: usize) -> Result<Self> {
        Self::new(lambdas, grid(lo, hi, points, true)?)
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn gamma_grid(&self) -> &[f64] {
        &self.gamma_grid
    }
}

fn grid(lo: f64, hi: f64, points: usize, log: bool) -> Result<Vec<f64>> {
    if points < 2 || !(lo < hi) || !hi.is_finite() || lo < 0.0 || (log && lo <= 0.0) {
        return Err(Error::Domain(format!("invalid grid [{lo}, {hi}] with {points} points")));
    }
    let (a, b) = if log { (lo.ln(), hi.ln()) } else { (lo, hi) };
    let step = (b - a) / (points - 1) as f64;
    Ok((0..points)
        .map(|i| match i {
            0 => lo,
            _ if i == points - 1 => hi,
            _ if log => (a + step * i as f64).exp(),
            _ => a + step * i as f64,
        })
        .collect())
}

/// `gamma_l(kappa)` in the cancellation-free form `2 kappa l^2 / (1 + sqrt(1 + 4 kappa^2 l^2))`.
fn kappa_gamma(kappa: f64, lambda: f64) -> f64 {
    let s = (2.0 * kappa * lambda).hypot(1.0);
    2.0 * kappa * lambda * lambda / (1.0 + s)
}

/// `log2(l^2 / (l^2 - gamma_l^2)) / 2` for `gamma_l = kappa_gamma(kappa, l)`.
fn kappa_component_rate(kappa: f64, lambda: f64) -> f64 {
    let k = 2.0 * kappa * lambda;
    let s = k.hypot(1.0);
    let t = k / (1.0 + s);
    // 1 - t = (1 + 1/(s + k)) / (1 + s)
    let one_minus = (1.0 + 1.0 / (s + k)) / (1.0 + s);
    -0.5 * (one_minus * (1.0 + t)).ln() / LN_2
}

fn kappa_rate(kappa: f64, lambdas: &[f64]) -> f64 {
    lambdas.iter().map(|&l| kappa_component_rate(kappa, l)).sum()
}

/// Solves `sum_l log2(l^2 / (l^2 - gamma_l^2)) / 2 = rate` for `kappa > 0` and
/// returns `(kappa, gammas)`; `rate = 0` gives `kappa = 0` and zero gammas.
pub fn kappa_gammas(lambdas: &[f64], rate: f64) -> Result<(f64, Vec<f64>)> {
    check_spectrum(lambdas, 1)?;
    if !(rate >= 0.0) {
        return Err(Error::Domain(format!("rate must be >= 0, got {rate}")));
    }
    if rate == 0.0 {
        return Ok((0.0, vec![0.0; lambdas.len()]));
    }
    let f = |x: f64| kappa_rate(x.exp(), lambdas) - rate;
    let mut lo = -lambdas[0].ln();
    let mut hi = lo;
    let mut n = 0;
    while f(lo) > 0.0 {
        lo -= LN_2;
        n += 1;
        if n > BRACKET_DOUBLINGS {
            return Err(Error::Bracket { lo: lo.exp(), hi: hi.exp(), f_lo: f(lo), f_hi: f(hi) });
        }
    }
    while f(hi) < 0.0 {
        hi += LN_2;
        n += 1;
        if n > BRACKET_DOUBLINGS || !hi.exp().is_finite() {
            return Err(Error::Bracket { lo: lo.exp(), hi: hi.exp(), f_lo: f(lo), f_hi: f(hi) });
        }
    }
    let x = if lo == hi { lo } else { find_root(f, Bracket::new(lo, hi)?, &KAPPA_TOL)? };
    let kappa = x.exp();
    Ok((kappa, lambdas.iter().map(|&l| kappa_gamma(kappa, l)).collect()))
}

/// Common-randomness lower bound `2 sum_l (lambda_l - gamma_l)` at the channel capacity.
pub fn d_lower(lambdas: &[f64], gamma: f64) -> Result<f64> {
    check_lambdas(lambdas)?;
    check_gamma(gamma)?;
    lower_unchecked(lambdas, gamma)
}

fn lower_unchecked(lambdas: &[f64], gamma: f64) -> Result<f64> {
    let (_, gammas) = kappa_gammas(lambdas, awgn_capacity(gamma))?;
    Ok(2.0 * lambdas.iter().zip(&gammas).map(|(l, g)| l - g).sum::<f64>())
}

/// Water level `omega` with `sum_l log2(l / min(omega, l)) = bits`, computed
/// from the active-set closed form on sorted eigenvalues.
fn water_level(lambdas: &[f64], bits: f64) -> f64 {
    if bits <= 0.0 {
        return lambdas[0];
    }
    let mut log_sum = 0.0;
    for k in 1..=lambdas.len() {
        log_sum += lambdas[k - 1].ln();
        let log_omega = (log_sum - bits * LN_2) / k as f64;
        let next = lambdas.get(k).copied().unwrap_or(0.0);
        if k == lambdas.len() || log_omega >= next.ln() {
            return log_omega.exp();
        }
    }
    unreachable!("loop returns at k = L")
}

/// Reverse waterfilling at `rate` bits: returns `omega` and `delta_l = min(omega, lambda_l)`.
pub fn waterfill_sep(lambdas: &[f64], rate: f64) -> Result<(f64, Vec<f64>)> {
    check_spectrum(lambdas, 1)?;
    if !(rate >= 0.0) || !rate.is_finite() {
        return Err(Error::Domain(format!("rate must be finite and >= 0, got {rate}")));
    }
    let omega = water_level(lambdas, 2.0 * rate);
    Ok((omega, lambdas.iter().map(|&l| omega.min(l)).collect()))
}

/// Separation scheme: `2 sum_l delta_l` from reverse waterfilling at capacity.
pub fn d_sep(lambdas: &[f64], gamma: f64) -> Result<f64> {
    check_lambdas(lambdas)?;
    check_gamma(gamma)?;
    let (_, deltas) = waterfill_sep(lambdas, awgn_capacity(gamma))?;
    Ok(2.0 * deltas.iter().sum::<f64>())
}

fn uncoded_unchecked(lambdas: &[f64], gamma: f64) -> f64 {
    2.0 * lambdas.iter().sum::<f64>() - 2.0 * (gamma / (gamma + 1.0)).sqrt() * lambdas[0]
}

/// Uncoded scheme on the strongest component, the rest regenerated independently.
pub fn d_uncoded(lambdas: &[f64], gamma: f64) -> Result<f64> {
    check_lambdas(lambdas)?;
    check_gamma(gamma)?;
    Ok(uncoded_unchecked(lambdas, gamma))
}

/// `log2((gamma + 1) / ((1 - alpha) gamma + 1))`: twice the digital rate.
fn digital_bits(gamma: f64, alpha: f64) -> f64 {
    (gamma.ln_1p() - ((1.0 - alpha) * gamma).ln_1p()) / LN_2
}

/// Water level of the digital layer over components `2..L` and the resulting
/// `delta_l`, `l >= 2`.
pub fn omega_hybrid(lambdas: &[f64], gamma: f64, alpha: f64) -> Result<(f64, Vec<f64>)> {
    check_lambdas(lambdas)?;
    check_gamma(gamma)?;
    check_alpha(alpha)?;
    let tail = &lambdas[1..];
    let omega = water_level(tail, digital_bits(gamma, alpha));
    Ok((omega, tail.iter().map(|&l| omega.min(l)).collect()))
}

fn hybrid_objective(lambdas: &[f64], gamma: f64, alpha: f64) -> f64 {
    let tail = &lambdas[1..];
    let omega = water_level(tail, digital_bits(gamma, alpha));
    let saved: f64 = tail.iter().map(|&l| l - omega.min(l)).sum();
    uncoded_unchecked(lambdas, (1.0 - alpha) * gamma) - 2.0 * saved
}

/// Hybrid distortion with digital power fraction `alpha`.
pub fn d_hybrid_at(lambdas: &[f64], gamma: f64, alpha: f64) -> Result<f64> {
    check_lambdas(lambdas)?;
    check_gamma(gamma)?;
    check_alpha(alpha)?;
    Ok(hybrid_objective(lambdas, gamma, alpha))
}

/// Optimized hybrid distortion and the minimizing `alpha` (smallest on ties).
pub fn d_hybrid(lambdas: &[f64], gamma: f64) -> Result<(f64, f64)> {
    check_lambdas(lambdas)?;
    check_gamma(gamma)?;
    if gamma == 0.0 {
        return Ok((2.0 * lambdas.iter().sum::<f64>(), 0.0));
    }
    let f = |a: f64| hybrid_objective(lambdas, gamma, a);
    let (mut x, mut fx) = minimize_1d(f, 0.0, 1.0, DEFAULT_GRID, &Tolerance::default())?;
    let am = rate_matched_unchecked(lambdas, gamma);
    let fm = f(am);
    let slack = 16.0 * f64::EPSILON * fx.abs();
    if fm < fx - slack || (fm <= fx + slack && am < x) {
        x = am;
        fx = fm;
    }
    Ok((fx, x))
}

fn rate_matched_unchecked(lambdas: &[f64], gamma: f64) -> f64 {
    let omega = water_level(lambdas, 2.0 * awgn_capacity(gamma));
    let ratio = lambdas[0] / omega.min(lambdas[0]);
    (1.0 - (ratio - 1.0) / gamma).clamp(0.0, 1.0)
}

/// The `alpha` whose digital rate equals the rate separation spends on
/// components `2..L`, i.e. `(1 - alpha) gamma + 1 = lambda_1 / delta_1`.
pub fn alpha_rate_matched(lambdas: &[f64], gamma: f64) -> Result<f64> {
    check_lambdas(lambdas)?;
    check_gamma(gamma)?;
    if gamma == 0.0 {
        return Err(Error::Domain("rate matching needs gamma > 0".into()));
    }
    Ok(rate_matched_unchecked(lambdas, gamma))
}

/// Derivative of the hybrid distortion in `alpha` at `alpha = 0`.
pub fn hybrid_slope_at_zero(lambdas: &[f64], gamma: f64) -> Result<f64> {
    check_lambdas(lambdas)?;
    check_gamma(gamma)?;
    let (l1, l2) = (lambdas[0], lambdas[1]);
    Ok(gamma.sqrt() * l1 / (gamma + 1.0).powf(1.5) - 2.0 * gamma * l2 / (gamma + 1.0))
}

/// Budget below which the optimized hybrid scheme is purely analog.
pub fn gamma_star(lambdas: &[f64]) -> Result<f64> {
    check_lambdas(lambdas)?;
    let (l1, l2) = (lambdas[0], lambdas[1]);
    let g = (l1.hypot(l2) - l2) / (2.0 * l2);
    let residual = hybrid_slope_at_zero(lambdas, g)?;
    if residual.abs() > 1e-9 * l1.max(1.0) {
        return Err(Error::Domain(format!("stationarity residual {residual:e} at gamma* = {g}")));
    }
    Ok(g)
}

/// Lower bound on the distortion of any linear scheme sending `g^T X` over the
/// channel: the uncoded distortion at budget `sum_l g_l^2 lambda_l`.
pub fn linear_bound(lambdas: &[f64], g: &[f64]) -> Result<f64> {
    check_lambdas(lambdas)?;
    if g.len() != lambdas.len() {
        return Err(Error::Dimension(format!("gain vector has {} entries for {} components", g.len(), lambdas.len())));
    }
    if g.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("gains must be finite".into()));
    }
    let power: f64 = g.iter().zip(lambdas).map(|(g, l)| g * g * l).sum();
    Ok(uncoded_unchecked(lambdas, power))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussianCurveRow {
    pub gamma: f64,
    pub d_lower: f64,
    pub d_sep: f64,
    pub d_uncoded: f64,
    pub d_hybrid: f64,
    pub alpha_opt: f64,
}

impl GaussianCurveRow {
    pub fn compute(lambdas: &[f64], gamma: f64) -> Result<Self> {
        let (d_hybrid, alpha_opt) = d_hybrid(lambdas, gamma)?;
        Ok(Self {
            gamma,
            d_lower: d_lower(lambdas, gamma)?,
            d_sep: d_sep(lambdas, gamma)?,
            d_uncoded: d_uncoded(lambdas, gamma)?,
            d_hybrid,
            alpha_opt,
        })
    }

    fn values(&self) -> Vec<f64> {
        vec![self.gamma, self.d_lower, self.d_sep, self.d_uncoded, self.d_hybrid, self.alpha_opt]
    }
}

pub fn gaussian_rows(config: &GaussianConfig) -> Result<Vec<GaussianCurveRow>> {
    config.gamma_grid().par_iter().map(|&g| GaussianCurveRow::compute(config.lambdas(), g)).collect()
}

pub fn gaussian_curves(config: &GaussianConfig) -> Result<CurveTable> {
    let mut table = CurveTable::new(CURVE_COLUMNS);
    for row in gaussian_rows(config)? {
        table.push(row.values())?;
    }
    Ok(table)
}

/// Eigen-decomposition of a full covariance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagonalized {
    /// Eigenvalues, descending.
    pub lambdas: Vec<f64>,
    /// Orthonormal eigenvectors; `basis[k]` belongs to `lambdas[k]`.
    pub basis: Vec<Vec<f64>>,
}

/// Diagonalizes a symmetric positive-definite covariance. Callers should
/// subtract the mean first; distortions are invariant under the rotation.
pub fn diagonalize(cov: &[Vec<f64>]) -> Result<Diagonalized> {
    let n = cov.len();
    if n == 0 || cov.iter().any(|r| r.len() != n) {
        return Err(Error::Dimension("covariance must be a non-empty square matrix".into()));
    }
    let m = DMatrix::from_fn(n, n, |i, j| cov[i][j]);
    let asym = (&m - m.transpose()).abs().max();
    if !(asym <= SYMMETRY_TOL) {
        return Err(Error::Domain(format!("covariance is not symmetric (max |S - S^T| = {asym:e})")));
    }
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let lambdas: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    if lambdas[n - 1] <= 0.0 {
        return Err(Error::Domain("covariance must be positive definite".into()));
    }
    let basis = order.iter().map(|&k| eig.eigenvectors.column(k).iter().copied().collect()).collect();
    Ok(Diagonalized { lambdas, basis })
}

/// Scalar Gaussian `N(mean, std^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalarGaussian {
    pub mean: f64,
    pub std: f64,
}

impl ScalarGaussian {
    pub fn new(mean: f64, std: f64) -> Result<Self> {
        if !mean.is_finite() || !(std > 0.0 && std.is_finite()) {
            return Err(Error::Domain(format!("need finite mean and std > 0, got N({mean}, {std}^2)")));
        }
        Ok(Self { mean, std })
    }
}

fn toy(x: ScalarGaussian, y: ScalarGaussian, corr: f64) -> f64 {
    let dm = x.mean - y.mean;
    dm * dm + x.std * x.std + y.std * y.std - 2.0 * corr * x.std * y.std
}

/// Scalar source and target with common randomness: `sqrt(gamma / (gamma + 1))` correlation.
pub fn toy_gaussian_lower(x: ScalarGaussian, y: ScalarGaussian, gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    Ok(toy(x, y, (gamma / (gamma + 1.0)).sqrt()))
}

/// Scalar separation without common randomness: `gamma / (gamma + 1)` correlation.
pub fn toy_gaussian_sep(x: ScalarGaussian, y: ScalarGaussian, gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    Ok(toy(x, y, gamma / (gamma + 1.0)))
}

/// Scalar joint coding without common randomness; attained by the uncoded
/// scheme, so it equals [`toy_gaussian_lower`].
pub fn toy_gaussian_joint(x: ScalarGaussian, y: ScalarGaussian, gamma: f64) -> Result<f64> {
    toy_gaussian_lower(x, y, gamma)
}
