//! Scalar special functions, bracketed root finding and 1-D minimization.
//!
//! Everything here is a pure function. Logarithms are base 2 throughout the
//! crate.

use crate::error::{Error, Result};

/// Inputs this close to a domain boundary are snapped onto it.
const BOUNDARY_SNAP: f64 = 1e-15;

/// Default number of scan points for [`minimize_1d`].
pub const DEFAULT_GRID: usize = 512;

/// Stopping rule shared by the iterative routines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_iter: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { abs_tol: 1e-12, rel_tol: 1e-10, max_iter: 200 }
    }
}

impl Tolerance {
    pub fn new(abs_tol: f64, rel_tol: f64, max_iter: usize) -> Result<Self> {
        let tol = Self { abs_tol, rel_tol, max_iter };
        tol.validate()?;
        Ok(tol)
    }

    /// Tolerance used for the defining-equation solves of closed-form curves.
    pub fn tight() -> Self {
        Self { abs_tol: 1e-15, rel_tol: 1e-14, max_iter: 400 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) || !(self.rel_tol > 0.0) || self.max_iter == 0 {
            return Err(Error::Invalid(format!(
                "tolerance needs abs_tol > 0, rel_tol > 0, max_iter >= 1 (got {:?})",
                self
            )));
        }
        Ok(())
    }
}

/// A closed interval `[lo, hi]` with `lo < hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    lo: f64,
    hi: f64,
}

impl Bracket {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::Domain(format!("bracket needs finite lo < hi, got [{lo}, {hi}]")));
        }
        Ok(Self { lo, hi })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }
}

fn snap_unit(x: f64, what: &str) -> Result<f64> {
    if !(-BOUNDARY_SNAP..=1.0 + BOUNDARY_SNAP).contains(&x) {
        return Err(Error::Domain(format!("{what} must lie in [0, 1], got {x}")));
    }
    Ok(if x < BOUNDARY_SNAP {
        0.0
    } else if x > 1.0 - BOUNDARY_SNAP {
        1.0
    } else {
        x
    })
}

/// `x log2 x` with the convention `0 log 0 = 0`.
#[inline]
pub fn xlog2x(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.log2()
    }
}

/// Binary entropy `H_b(p)` in bits.
pub fn binary_entropy(p: f64) -> Result<f64> {
    let p = snap_unit(p, "probability")?;
    Ok(-xlog2x(p) - xlog2x(1.0 - p))
}

/// Inverse of the binary entropy restricted to `[0, 1/2]`.
pub fn binary_entropy_inv(h: f64) -> Result<f64> {
    let h = snap_unit(h, "entropy")?;
    if h == 0.0 {
        return Ok(0.0);
    }
    if h == 1.0 {
        return Ok(0.5);
    }
    let bracket = Bracket::new(0.0, 0.5)?;
    find_root(|p| binary_entropy(p).map(|v| v - h).unwrap_or(f64::NAN), bracket, &Tolerance::tight())
}

/// Binary convolution `a * b = (1-a) b + a (1-b)`.
pub fn bconv(a: f64, b: f64) -> Result<f64> {
    let a = snap_unit(a, "a")?;
    let b = snap_unit(b, "b")?;
    Ok(bconv_unchecked(a, b))
}

/// [`bconv`] without domain checks, for inner loops on already validated values.
#[inline]
pub(crate) fn bconv_unchecked(a: f64, b: f64) -> f64 {
    (1.0 - a) * b + a * (1.0 - b)
}

/// Brent-style bracketed root finder: bisection safeguarding secant and
/// inverse-quadratic steps.
///
/// Stops when `|f(x)| <= abs_tol` or the bracket has shrunk below
/// `rel_tol * |x| + abs_tol`.
pub fn find_root<F>(mut f: F, bracket: Bracket, tol: &Tolerance) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    tol.validate()?;
    let (mut a, mut b) = (bracket.lo, bracket.hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa.is_nan() || fb.is_nan() || fa * fb > 0.0 {
        return Err(Error::Bracket { lo: a, hi: b, f_lo: fa, f_hi: fb });
    }
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..tol.max_iter {
        if (fb > 0.0) == (fc > 0.0) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * (tol.rel_tol * b.abs() + tol.abs_tol);
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb.abs() <= tol.abs_tol {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * xm * q - (tol1 * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b);
        if fb.is_nan() {
            return Err(Error::Domain(format!("objective is NaN at x = {b}")));
        }
    }
    Err(Error::MaxIter { method: "find_root", iterations: tol.max_iter })
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section search on `[a, b]`; returns the best evaluated point.
fn golden_section<F>(f: &mut F, mut a: f64, mut b: f64, tol: &Tolerance) -> (f64, f64)
where
    F: FnMut(f64) -> f64,
{
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..tol.max_iter {
        let mid = 0.5 * (a + b);
        if b - a <= tol.rel_tol * mid.abs() + tol.abs_tol {
            break;
        }
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Global 1-D minimization by a uniform scan followed by golden-section
/// refinement around the best scan point and inside both boundary cells.
///
/// Ties (values within a few ulps of the minimum) go to the smallest argument,
/// which makes plateau argmins reproducible.
pub fn minimize_1d<F>(mut f: F, lo: f64, hi: f64, grid: usize, tol: &Tolerance) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> f64,
{
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::Domain(format!("minimize_1d needs finite lo < hi, got [{lo}, {hi}]")));
    }
    if grid < 16 {
        return Err(Error::Domain(format!("minimize_1d needs a grid of at least 16 points, got {grid}")));
    }
    tol.validate()?;

    let step = (hi - lo) / (grid - 1) as f64;
    let xs: Vec<f64> = (0..grid)
        .map(|i| if i == grid - 1 { hi } else { lo + step * i as f64 })
        .collect();
    let mut candidates: Vec<(f64, f64)> = xs.iter().map(|&x| (x, f(x))).collect();

    let best = candidates
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.1.is_nan())
        .fold(None::<(usize, f64)>, |acc, (i, c)| match acc {
            Some((_, fb)) if fb <= c.1 => acc,
            _ => Some((i, c.1)),
        })
        .map(|(i, _)| i)
        .ok_or_else(|| Error::Domain("objective is NaN on the whole grid".into()))?;

    let mut cells = vec![
        (xs[best.saturating_sub(1)], xs[(best + 1).min(grid - 1)]),
        (xs[0], xs[1]),
        (xs[grid - 2], xs[grid - 1]),
    ];
    cells.dedup();
    for (a, b) in cells {
        let c = golden_section(&mut f, a, b, tol);
        candidates.push(c);
    }

    let fmin = candidates
        .iter()
        .map(|c| c.1)
        .filter(|v| !v.is_nan())
        .fold(f64::INFINITY, f64::min);
    let slack = 16.0 * f64::EPSILON * fmin.abs();
    let (x, _) = candidates
        .iter()
        .filter(|c| c.1 <= fmin + slack)
        .fold((f64::INFINITY, f64::INFINITY), |acc, c| if c.0 < acc.0 { *c } else { acc });
    // report the objective at the chosen argument, not the tie-band minimum
    let fx = candidates
        .iter()
        .filter(|c| c.0 == x)
        .map(|c| c.1)
        .fold(f64::INFINITY, f64::min);
    Ok((x, fx))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    /// Series evaluation of H_b independent of `log2`: -p ln p via ln from
    /// the atanh series.
    fn ln_series(x: f64) -> f64 {
        // ln x = 2 atanh((x-1)/(x+1))
        let y = (x - 1.0) / (x + 1.0);
        let y2 = y * y;
        let mut term = y;
        let mut sum = 0.0;
        let mut k = 1.0;
        while term.abs() > 1e-20 {
            sum += term / k;
            term *= y2;
            k += 2.0;
        }
        2.0 * sum
    }

    #[test]
    fn binary_entropy_values() {
        assert_eq!(binary_entropy(0.5).unwrap(), 1.0);
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        let p: f64 = 0.11;
        let oracle = -(p * ln_series(p) + (1.0 - p) * ln_series(1.0 - p)) / ln_series(2.0);
        assert!(close(binary_entropy(p).unwrap(), oracle, 1e-13));
        assert!(close(oracle, 0.49992, 1e-4));
    }

    #[test]
    fn binary_entropy_domain() {
        assert!(binary_entropy(-0.1).is_err());
        assert!(binary_entropy(1.2).is_err());
        assert!(binary_entropy(f64::NAN).is_err());
        // boundary snapping
        assert_eq!(binary_entropy(-1e-16).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0 + 1e-16).unwrap(), 0.0);
    }

    #[test]
    fn binary_entropy_inverse() {
        assert_eq!(binary_entropy_inv(1.0).unwrap(), 0.5);
        assert_eq!(binary_entropy_inv(0.0).unwrap(), 0.0);
        let h = binary_entropy(0.11).unwrap();
        assert!(close(binary_entropy_inv(h).unwrap(), 0.11, 1e-10));
        let p = binary_entropy_inv(0.49993).unwrap();
        assert!(close(p, 0.11, 1e-4));
        assert!(binary_entropy_inv(1.5).is_err());
    }

    #[test]
    fn binary_entropy_round_trip_dense() {
        for i in 0..=2000 {
            let h = i as f64 / 2000.0;
            let p = binary_entropy_inv(h).unwrap();
            assert!((0.0..=0.5).contains(&p));
            assert!((binary_entropy(p).unwrap() - h).abs() <= 1e-9, "h = {h}");
        }
        for k in 1..60 {
            let h = 2f64.powi(-k);
            let p = binary_entropy_inv(h).unwrap();
            assert!((binary_entropy(p).unwrap() - h).abs() <= 1e-9, "h = {h}");
        }
    }

    #[test]
    fn bconv_values() {
        assert_eq!(bconv(0.0, 0.3).unwrap(), 0.3);
        assert_eq!(bconv(0.5, 0.3).unwrap(), 0.5);
        assert_eq!(bconv(0.25, 0.25).unwrap(), 0.375);
        assert!(bconv(1.1, 0.2).is_err());
    }

    #[test]
    fn root_examples() {
        let tol = Tolerance::default();
        let r = find_root(|x| x - 1.0, Bracket::new(0.0, 2.0).unwrap(), &tol).unwrap();
        assert!(close(r, 1.0, 1e-12));
        let r = find_root(
            |x| binary_entropy(x).unwrap() - 0.5,
            Bracket::new(0.0, 0.5).unwrap(),
            &tol,
        )
        .unwrap();
        assert!(close(r, 0.1100, 1e-4));
        let r = find_root(|x| x * x - 2.0, Bracket::new(0.0, 2.0).unwrap(), &tol).unwrap();
        assert!(close(r, std::f64::consts::SQRT_2, 1e-10));
    }

    #[test]
    fn root_errors() {
        let tol = Tolerance::default();
        let e = find_root(|x| x * x + 1.0, Bracket::new(-1.0, 1.0).unwrap(), &tol).unwrap_err();
        assert!(matches!(e, Error::Bracket { .. }));
        let tiny = Tolerance { abs_tol: 1e-300, rel_tol: 1e-300, max_iter: 2 };
        let e = find_root(|x| x.powi(3) - 0.3, Bracket::new(0.0, 1.0).unwrap(), &tiny).unwrap_err();
        assert!(matches!(e, Error::MaxIter { .. }));
        assert!(Bracket::new(1.0, 1.0).is_err());
    }

    #[test]
    fn minimize_examples() {
        let tol = Tolerance::default();
        let (x, v) = minimize_1d(|x| (x - 0.3).powi(2), 0.0, 1.0, DEFAULT_GRID, &tol).unwrap();
        assert!(close(x, 0.3, 1e-6));
        assert!(v < 1e-12);
        let (x, v) = minimize_1d(|_| 2.0, -1.0, 1.0, 64, &tol).unwrap();
        assert_eq!(x, -1.0);
        assert_eq!(v, 2.0);
        assert!(minimize_1d(|x| x, 1.0, 0.0, 64, &tol).is_err());
        assert!(minimize_1d(|x| x, 0.0, 1.0, 8, &tol).is_err());
    }

    #[test]
    fn minimize_prefers_boundary_on_monotone() {
        let tol = Tolerance::default();
        let (x, _) = minimize_1d(|x| 1.0 + 0.01 * x, 0.0, 1.0, DEFAULT_GRID, &tol).unwrap();
        assert_eq!(x, 0.0);
        let (x, _) = minimize_1d(|x| -x, 0.0, 1.0, DEFAULT_GRID, &tol).unwrap();
        assert_eq!(x, 1.0);
    }

    /// phi(delta) = 2 (1 - delta) delta theta / (delta * theta) from the
    /// simplified hybrid family, against a 10^6-point dense grid.
    #[test]
    fn minimize_matches_dense_grid() {
        let theta = 0.3;
        let phi = |d: f64| {
            let c = bconv_unchecked(d, theta);
            // add a shifted well so the argmin is interior
            2.0 * (1.0 - d) * d * theta / c + 4.0 * (d - 0.17).powi(2)
        };
        let tol = Tolerance::default();
        let (x, v) = minimize_1d(phi, 0.0, 0.25, DEFAULT_GRID, &tol).unwrap();
        let n = 1_000_000;
        let (mut bx, mut bv) = (0.0, f64::INFINITY);
        for i in 0..=n {
            let d = 0.25 * i as f64 / n as f64;
            let val = phi(d);
            if val < bv {
                bv = val;
                bx = d;
            }
        }
        assert!(close(x, bx, 1e-6), "{x} vs {bx}");
        assert!(v <= bv + 1e-12);
    }

    #[test]
    fn minimize_below_every_grid_point() {
        let tol = Tolerance::default();
        let f = |x: f64| (3.0 * x).sin() + 0.5 * (11.0 * x).cos();
        let (_, v) = minimize_1d(f, 0.0, 4.0, 64, &tol).unwrap();
        for i in 0..64 {
            let x = 4.0 * i as f64 / 63.0;
            assert!(v <= f(x));
        }
    }
}
