//! Bracketed scalar root finding.

use alloc::vec::Vec;

use crate::math::abs;

/// Failure of a bracketed search.
#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum RootError {
    /// `f(lo)` and `f(hi)` have the same sign.
    #[error("no sign change in [{lo}, {hi}] (f = {flo}, {fhi})")]
    NoSignChange {
        /// Left end.
        lo: f64,
        /// Right end.
        hi: f64,
        /// `f(lo)`
        flo: f64,
        /// `f(hi)`
        fhi: f64,
    },
    /// `f` returned NaN.
    #[error("function is not finite at {0}")]
    NotFinite(f64),
}

/// Root of `f` in `[lo, hi]` by secant steps safeguarded with bisection.
///
/// Stops once the bracket is narrower than `xtol` or `f` hits zero, and
/// returns whichever end has the smaller `|f|`.
pub fn bisect_secant<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, xtol: f64) -> Result<f64, RootError> {
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa.is_nan() {
        return Err(RootError::NotFinite(a));
    }
    if fb.is_nan() {
        return Err(RootError::NotFinite(b));
    }
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if (fa > 0.0) == (fb > 0.0) {
        return Err(RootError::NoSignChange { lo, hi, flo: fa, fhi: fb });
    }
    // Secant steps; whenever one fails to halve the bracket a bisection follows.
    for _ in 0..400 {
        let width = b - a;
        if width <= xtol {
            break;
        }
        let secant = b - fb * width / (fb - fa);
        let use_secant = secant > a && secant < b;
        let x = if use_secant { secant } else { 0.5 * (a + b) };
        let fx = f(x);
        if fx.is_nan() {
            return Err(RootError::NotFinite(x));
        }
        if fx == 0.0 {
            return Ok(x);
        }
        if (fx > 0.0) == (fa > 0.0) {
            (a, fa) = (x, fx);
        } else {
            (b, fb) = (x, fx);
        }
        if use_secant && b - a > 0.5 * width {
            let m = 0.5 * (a + b);
            let fm = f(m);
            if fm.is_nan() {
                return Err(RootError::NotFinite(m));
            }
            if fm == 0.0 {
                return Ok(m);
            }
            if (fm > 0.0) == (fa > 0.0) {
                (a, fa) = (m, fm);
            } else {
                (b, fb) = (m, fm);
            }
        }
    }
    Ok(if abs(fa) <= abs(fb) { a } else { b })
}

/// Subintervals of an `n`-point uniform scan of `[lo, hi]` where `f` changes sign.
pub fn sign_changes<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let step = (hi - lo) / (n - 1) as f64;
    let mut prev = (lo, f(lo));
    for k in 1..n {
        let x = if k == n - 1 { hi } else { lo + step * k as f64 };
        let fx = f(x);
        if prev.1 == 0.0 || (prev.1 > 0.0) != (fx > 0.0) && fx != 0.0 {
            out.push((prev.0, x));
        }
        prev = (x, fx);
    }
    out
}
