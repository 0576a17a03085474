//! Scalar root finding and quadrature helpers shared across the crate.

/// Bisect `f` on a bracket `[lo, hi]` with `f(lo)` and `f(hi)` of opposite
/// sign (either may be zero). Shrinks the bracket until its width falls
/// below `tol`, then returns the midpoint.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let mut f_lo = f(lo);
    if f_lo == 0.0 {
        return lo;
    }
    let f_hi = f(hi);
    if f_hi == 0.0 {
        return hi;
    }
    debug_assert!(
        f_lo.is_nan() || f_hi.is_nan() || (f_lo < 0.0) != (f_hi < 0.0),
        "bisect requires a sign change on [{lo}, {hi}]"
    );
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break; // interval no longer representable
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if (f_mid < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Locate sign changes of `f` over an `n_steps`-point uniform grid on the
/// open interval `(a, b)` and refine each bracket by bisection to `tol`.
/// Roots closer together than the grid spacing may be missed in pairs.
pub fn grid_roots<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n_steps: usize, tol: f64) -> Vec<f64> {
    let mut roots = Vec::new();
    let step = (b - a) / (n_steps as f64 + 1.0);
    let mut t_prev = a + step;
    let mut f_prev = f(t_prev);
    for k in 2..=n_steps {
        let t = a + step * k as f64;
        let f_t = f(t);
        if f_prev == 0.0 {
            roots.push(t_prev);
        } else if f_t != 0.0 && (f_t < 0.0) != (f_prev < 0.0) {
            roots.push(bisect(&f, t_prev, t, tol));
        }
        t_prev = t;
        f_prev = f_t;
    }
    roots
}

/// Simpson's rule on `[a, b]` from pre-computed endpoint and midpoint values.
fn simpson(a: f64, fa: f64, b: f64, fb: f64, fm: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

fn adaptive_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    fa: f64,
    b: f64,
    fb: f64,
    fm: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, fa, m, fm, flm);
    let right = simpson(m, fm, b, fb, frm);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    adaptive_step(f, a, fa, m, fm, flm, left, 0.5 * tol, depth - 1)
        + adaptive_step(f, m, fm, b, fb, frm, right, 0.5 * tol, depth - 1)
}

/// Adaptive Simpson quadrature of `f` over `[a, b]` with absolute error
/// target `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson(a, fa, b, fb, fm);
    adaptive_step(&f, a, fa, b, fb, fm, whole, tol, 24)
}
