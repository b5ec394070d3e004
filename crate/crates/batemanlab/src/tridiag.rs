//! Eigenvalues of symmetric tridiagonal matrices by Sturm-sequence bisection.
//!
//! The Sturm count of `T - lambda I` (number of negative pivots in the
//! `LDL^T` factorization) equals the number of eigenvalues below `lambda`.
//! Bisecting on that count gives each eigenvalue individually, with no
//! dependence on the others, which makes the routine a good independent
//! oracle: it shares no machinery with the closed-form spectra it checks.

/// Number of eigenvalues of the tridiagonal matrix strictly below `lambda`.
///
/// `diag` holds the diagonal, `off` the subdiagonal (`off.len() + 1 ==
/// diag.len()`). Pivots that underflow are clamped to a tiny negative value,
/// the standard guard that keeps the count correct in IEEE arithmetic.
pub fn sturm_count(diag: &[f64], off: &[f64], lambda: f64) -> usize {
    assert_eq!(
        off.len() + 1,
        diag.len(),
        "subdiagonal must be one shorter than the diagonal"
    );
    let guard = 1e-300;
    let mut count = 0;
    let mut q = diag[0] - lambda;
    if q < 0.0 {
        count += 1;
    }
    for i in 1..diag.len() {
        if q.abs() < guard {
            q = -guard;
        }
        q = diag[i] - lambda - off[i - 1] * off[i - 1] / q;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// The `k` smallest eigenvalues, ascending, each found by bisection on the
/// Sturm count inside the Gershgorin interval.
pub fn lowest_eigenvalues(diag: &[f64], off: &[f64], k: usize) -> Vec<f64> {
    assert!(k >= 1 && k <= diag.len(), "need 1 <= k <= n, got k = {k}");
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..diag.len() {
        let mut radius = 0.0;
        if i > 0 {
            radius += off[i - 1].abs();
        }
        if i + 1 < diag.len() {
            radius += off[i].abs();
        }
        lo = lo.min(diag[i] - radius);
        hi = hi.max(diag[i] + radius);
    }
    // Open the interval slightly so strict counts bracket the extremes too.
    let pad = 1e-10 * (1.0 + lo.abs().max(hi.abs()));
    lo -= pad;
    hi += pad;

    (0..k)
        .map(|idx| {
            let mut a = lo;
            let mut b = hi;
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                if sturm_count(diag, off, mid) <= idx {
                    a = mid;
                } else {
                    b = mid;
                }
                if (b - a) < 2.0 * f64::EPSILON * mid.abs().max(1.0) {
                    break;
                }
            }
            0.5 * (a + b)
        })
        .collect()
}
