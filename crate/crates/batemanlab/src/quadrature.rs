//! Adaptive Simpson quadrature.
//!
//! Small and predictable: recursive interval halving with the standard
//! Richardson error estimate `|S_fine - S_coarse| <= 15 tol`. Used for the
//! angle integrals of the canonical chart, whose integrands are smooth after
//! the turning-point substitution, so convergence is fast.

use crate::{Error, Result};

const MAX_DEPTH: u32 = 48;

/// Integrate `f` over `[a, b]` to absolute tolerance `tol`.
///
/// Returns [`Error::Quadrature`] if any subinterval still fails its local
/// error bound after 48 halvings. `a > b` integrates with the usual sign
/// flip; `a == b` returns zero.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Quadrature(format!(
            "nonfinite integration bounds [{a}, {b}]"
        )));
    }
    if a == b {
        return Ok(0.0);
    }
    if b < a {
        return adaptive_simpson(f, b, a, tol).map(|v| -v);
    }
    let fa = f(a);
    let fb = f(b);
    let mid = 0.5 * (a + b);
    let fm = f(mid);
    let whole = simpson(a, b, fa, fm, fb);
    simpson_rec(f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH)
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64> {
    let mid = 0.5 * (a + b);
    let lm = 0.5 * (a + mid);
    let rm = 0.5 * (mid + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, mid, fa, flm, fm);
    let right = simpson(mid, b, fm, frm, fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(Error::Quadrature(format!(
            "interval [{a}, {b}] still above tolerance {tol:e} at maximum depth"
        )));
    }
    let half_tol = 0.5 * tol;
    Ok(
        simpson_rec(f, a, mid, fa, flm, fm, left, half_tol, depth - 1)?
            + simpson_rec(f, mid, b, fm, frm, fb, right, half_tol, depth - 1)?,
    )
}
