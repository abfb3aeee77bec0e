//! Small numerical kernels shared by the other modules: adaptive Simpson
//! quadrature, the composite trapezoid rule, grids and a safeguarded
//! Newton solver for monotone equations.

/// Absolute tolerance used by the bound functions' quadrature path.
pub const SIMPSON_TOL: f64 = 1e-12;

const SIMPSON_MAX_DEPTH: u32 = 48;

/// Adaptive Simpson quadrature of `f` over `[a, b]` with absolute
/// tolerance `tol`. Reversed limits give the negated integral.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    if a > b {
        return -adaptive_simpson(f, b, a, tol);
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(&f, a, b, fa, fm, fb, whole, tol, SIMPSON_MAX_DEPTH)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    // m == a or m == b: the interval can no longer be split in f64.
    if depth == 0 || delta.abs() <= 15.0 * tol || m <= a || m >= b {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Composite trapezoid rule with `n` nodes (`n ≥ 2`).
pub fn trapezoid<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    assert!(n >= 2, "trapezoid rule needs at least two nodes");
    let h = (b - a) / (n - 1) as f64;
    let interior: f64 = (1..n - 1).map(|i| f(a + i as f64 * h)).sum();
    h * (0.5 * (f(a) + f(b)) + interior)
}

/// `n` evenly spaced points from `lo` to `hi` inclusive. The endpoints are
/// reproduced exactly.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let step = (hi - lo) / (n - 1) as f64;
            (0..n)
                .map(|i| if i == n - 1 { hi } else { lo + i as f64 * step })
                .collect()
        }
    }
}

/// `n` logarithmically spaced points from `lo` to `hi` inclusive
/// (`0 < lo < hi`).
pub fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo, "logspace needs 0 < lo < hi");
    let (llo, lhi) = (lo.ln(), hi.ln());
    linspace(llo, lhi, n)
        .into_iter()
        .enumerate()
        .map(|(i, v)| {
            if i == 0 {
                lo
            } else if i == n - 1 {
                hi
            } else {
                v.exp()
            }
        })
        .collect()
}

/// Solves `g(t) = target` for a continuous, strictly increasing `g` with
/// derivative `dg > 0`, starting from `guess`. Newton steps are kept inside
/// a bracket that is grown geometrically until it straddles the root.
pub fn solve_increasing<G, D>(g: G, dg: D, target: f64, guess: f64) -> f64
where
    G: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let mut lo = guess;
    let mut hi = guess;
    let mut width = 1.0_f64.max(guess.abs() * 1e-3);
    while g(lo) > target {
        lo -= width;
        width *= 2.0;
    }
    width = 1.0_f64.max(guess.abs() * 1e-3);
    while g(hi) < target {
        hi += width;
        width *= 2.0;
    }
    let mut t = guess.clamp(lo, hi);
    for _ in 0..100 {
        let r = g(t) - target;
        if r == 0.0 {
            return t;
        }
        if r > 0.0 {
            hi = t;
        } else {
            lo = t;
        }
        let slope = dg(t);
        let newton = t - r / slope;
        let next = if slope > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - t).abs() <= 4.0 * f64::EPSILON * t.abs().max(1.0) {
            return next;
        }
        t = next;
    }
    t
}
