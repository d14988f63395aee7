//! One-dimensional search utilities: coarse scans, golden-section refinement,
//! and monotone inversion by bisection.

/// Golden-section minimization of `f` on [a, b] to relative interval width
/// `rel_tol`. Returns (argmin, min). Assumes `f` is unimodal on the bracket;
/// on a monotone stretch it converges to the appropriate endpoint. Near a
/// smooth minimum the argmin is resolvable only to ~sqrt(eps) in relative
/// terms (value comparisons saturate at one ulp); the minimum value itself
/// is accurate to machine precision.
pub fn golden_min<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut lo, mut hi) = (a, b);
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..200 {
        if hi - lo <= rel_tol * (lo.abs() + hi.abs()).max(1e-12) {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    let xm = 0.5 * (lo + hi);
    let fm = f(xm);
    // Return the best of the bracketing evaluations.
    let mut best = (xm, fm);
    if f1 < best.1 {
        best = (x1, f1);
    }
    if f2 < best.1 {
        best = (x2, f2);
    }
    best
}

/// Golden-section maximization; thin wrapper over `golden_min` on -f.
pub fn golden_max<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> (f64, f64) {
    let (x, v) = golden_min(|t| -f(t), a, b, rel_tol);
    (x, -v)
}

/// `n` log-spaced points on [a, b] (both positive), endpoints included.
pub fn log_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    assert!(a > 0.0 && b > a && n >= 2);
    let (la, lb) = (a.ln(), b.ln());
    (0..n)
        .map(|i| (la + (lb - la) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// `n` evenly spaced points on [a, b], endpoints included.
pub fn linear_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2);
    (0..n)
        .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
        .collect()
}

/// Invert an increasing function: find x in [1, hi_cap] with f(x) = target.
///
/// The bracket is grown by doubling from 1 (capped at `hi_cap`), then split by
/// `iters` bisection steps. Returns `None` when `target < f(1)`.
pub fn invert_increasing<F: Fn(f64) -> f64>(
    f: F,
    target: f64,
    hi_cap: f64,
    iters: usize,
) -> Option<f64> {
    let f1 = f(1.0);
    if target < f1 {
        return None;
    }
    if target == f1 {
        return Some(1.0);
    }
    let mut lo = 1.0_f64;
    let mut hi = 2.0_f64;
    while f(hi) < target {
        lo = hi;
        hi *= 2.0;
        if hi >= hi_cap {
            hi = hi_cap;
            break;
        }
    }
    for _ in 0..iters {
        let mid = 0.5 * (lo + hi);
        if f(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_quadratic() {
        let (x, v) = golden_min(|t| (t - 2.5) * (t - 2.5) + 1.0, 0.0, 10.0, 1e-12);
        // Comparison-based search resolves the argmin only to ~sqrt(eps);
        // the minimum value itself is exact to machine precision.
        assert!((x - 2.5).abs() < 1e-7);
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn golden_monotone_hits_endpoint() {
        let (x, _) = golden_min(|t| t, 1.0, 4.0, 1e-12);
        assert!((x - 1.0).abs() < 1e-6);
    }

    #[test]
    fn invert_square() {
        let x = invert_increasing(|t| t * t, 49.0, 1e12, 80).unwrap();
        assert!((x - 7.0).abs() < 1e-9);
    }

    #[test]
    fn invert_below_floor() {
        assert!(invert_increasing(|t| t * t, 0.5, 1e12, 50).is_none());
    }

    #[test]
    fn grids_cover_endpoints() {
        let g = log_grid(1.0, 100.0, 5);
        assert!((g[0] - 1.0).abs() < 1e-12 && (g[4] - 100.0).abs() < 1e-10);
        let l = linear_grid(0.0, 1.0, 3);
        assert_eq!(l, vec![0.0, 0.5, 1.0]);
    }
}
