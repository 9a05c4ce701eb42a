//! Adaptive Simpson quadrature and bracketed bisection.

use crate::error::{Error, Result};

const MAX_DEPTH: u32 = 48;

/// Widest panel handed to the adaptive step; a single coarse panel can
/// sample a periodic integrand only at its zeros and stop early.
const MAX_PANEL: f64 = 0.5;

/// Integral of `f` over `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let panels = ((b - a).abs() / MAX_PANEL).ceil().max(1.0);
    if !panels.is_finite() {
        return Err(Error::QuadratureFailed { a, b });
    }
    let n = panels as usize;
    let h = (b - a) / n as f64;
    let mut total = 0.0;
    let mut x0 = a;
    let mut f0 = f(a);
    for i in 1..=n {
        let x1 = if i == n { b } else { a + i as f64 * h };
        let f1 = f(x1);
        let m = 0.5 * (x0 + x1);
        let fm = f(m);
        let whole = (x1 - x0) / 6.0 * (f0 + 4.0 * fm + f1);
        total += simpson_step(&mut f, x0, x1, f0, fm, f1, whole, tol / n as f64, MAX_DEPTH)?;
        x0 = x1;
        f0 = f1;
    }
    Ok(total)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: FnMut(f64) -> f64>(
    f: &mut F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if !delta.is_finite() {
        return Err(Error::QuadratureFailed { a, b });
    }
    if delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(Error::QuadratureFailed { a, b });
    }
    let l = simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?;
    let r = simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?;
    Ok(l + r)
}

/// Root of a nondecreasing `g` on `[lo, hi]` (with `g(lo) <= 0 <= g(hi)`),
/// to width `xtol`.
pub fn bisect_increasing<G: FnMut(f64) -> f64>(mut g: G, mut lo: f64, mut hi: f64, xtol: f64) -> f64 {
    while hi - lo > xtol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
