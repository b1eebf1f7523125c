// Thin wrappers so the same code builds with and without std.

#[inline]
pub(crate) fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

#[inline]
pub(crate) fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub(crate) fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub(crate) fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

/// `|a - b| <= tol * max(|a|, |b|)`.
#[inline]
pub(crate) fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    abs(a - b) <= tol * abs(a).max(abs(b))
}

/// Sum with pairwise reduction; deterministic for a given slice order.
pub(crate) fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// `f(0..n)` in index order, on the rayon pool when enabled.
#[cfg(feature = "parallel")]
pub(crate) fn map_indexed<T: Send, F: Fn(usize) -> T + Sync + Send>(n: usize, f: F) -> alloc::vec::Vec<T> {
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

/// `f(0..n)` in index order.
#[cfg(not(feature = "parallel"))]
pub(crate) fn map_indexed<T, F: Fn(usize) -> T>(n: usize, f: F) -> alloc::vec::Vec<T> {
    (0..n).map(f).collect()
}
