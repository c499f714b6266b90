//! Derivative-free scalar kernels: bisection and golden-section maximization.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RootError {
    #[error("no sign change on [{lo}, {hi}]: f(lo) = {f_lo}, f(hi) = {f_hi}")]
    NotBracketed { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },
    #[error("non-finite function value at x = {0}")]
    NonFinite(f64),
}

/// Bisection on `[lo, hi]` until the bracket is narrower than `xtol`.
///
/// Returns the endpoint immediately if the function vanishes there. The
/// bracket must carry a strict sign change otherwise.
pub fn bisect<F>(mut f: F, mut lo: f64, mut hi: f64, xtol: f64) -> Result<f64, RootError>
where
    F: FnMut(f64) -> f64,
{
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if !f_lo.is_finite() {
        return Err(RootError::NonFinite(lo));
    }
    if !f_hi.is_finite() {
        return Err(RootError::NonFinite(hi));
    }
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(RootError::NotBracketed { lo, hi, f_lo, f_hi });
    }
    // 200 halvings exhaust any double-precision bracket.
    for _ in 0..200 {
        if (hi - lo).abs() <= xtol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo.min(hi) || mid >= lo.max(hi) {
            break;
        }
        let f_mid = f(mid);
        if !f_mid.is_finite() {
            return Err(RootError::NonFinite(mid));
        }
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Golden-section search for the maximum of a unimodal `f` on `[a, b]`.
///
/// Returns `(x_max, f_max)`. Iterates until the bracket is narrower than
/// `rtol * max(|a|, |b|)` or stops shrinking.
pub fn golden_max<F>(f: F, mut a: f64, mut b: f64, rtol: f64) -> (f64, f64)
where
    F: Fn(f64) -> f64,
{
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let scale = a.abs().max(b.abs()).max(f64::MIN_POSITIVE);

    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);

    for _ in 0..500 {
        if (b - a) <= rtol * scale {
            break;
        }
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        }
        if !(x1 < x2) {
            break;
        }
    }

    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// `n` points on `[a, b]` clustered towards both ends (Chebyshev–Lobatto).
///
/// The first and last points are exactly `a` and `b`.
pub fn cosine_spaced(a: f64, b: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2, "cosine spacing needs at least two points");
    let last = n - 1;
    (0..n)
        .map(|i| {
            if i == 0 {
                a
            } else if i == last {
                b
            } else {
                let t = 0.5 * (1.0 - (std::f64::consts::PI * i as f64 / last as f64).cos());
                a + (b - a) * t
            }
        })
        .collect()
}
