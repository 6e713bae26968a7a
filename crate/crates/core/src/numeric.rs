//! Scalar numerical routines shared by the kernel, spectral and diagnostic
//! layers: monotone inversion by bisection, golden-section search, adaptive
//! Simpson quadrature and Gauss–Legendre rules.

use crate::error::{Error, Result};

/// Absolute tolerance used for every monotone inversion.
pub const BISECTION_TOL: f64 = 1e-12;
/// Hard cap on bisection iterations.
pub const BISECTION_MAX_ITER: usize = 200;

/// Finds `x` in `[lo, hi]` with `f(x) = target` for a nondecreasing `f`.
///
/// `hi` is doubled (at most 200 times) until `f(hi) >= target`. Stops when
/// the bracket is narrower than [`BISECTION_TOL`] or stops shrinking in
/// floating point.
pub fn invert_increasing<F>(f: F, target: f64, lo: f64, hi: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if !target.is_finite() {
        return Err(Error::domain(format!("cannot invert at non-finite value {target}")));
    }
    let mut lo = lo;
    let mut hi = hi;
    if f(lo) > target {
        return Err(Error::domain(format!(
            "target {target} lies below the function value at the lower bracket {lo}"
        )));
    }
    let mut grow = 0;
    while f(hi) < target {
        lo = hi;
        hi *= 2.0;
        grow += 1;
        if grow > BISECTION_MAX_ITER || !hi.is_finite() {
            return Err(Error::domain(format!("could not bracket target {target}")));
        }
    }
    bisect(|x| f(x) - target, lo, hi)
}

/// Inverts an increasing `f: (0, ∞) → (0, ∞)` at `target > 0` by bisection
/// on `ln x`, so the result carries full relative precision even when it is
/// far below [`BISECTION_TOL`]. `guess` seeds the bracket.
pub fn invert_increasing_positive<F>(f: F, target: f64, guess: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if !(target > 0.0) || !target.is_finite() {
        return Err(Error::domain(format!(
            "positive inversion needs target > 0, got {target}"
        )));
    }
    let mut lo = guess.max(f64::MIN_POSITIVE).ln();
    let mut hi = lo;
    let mut tries = 0;
    while f(lo.exp()) > target {
        lo -= 2.0;
        tries += 1;
        if tries > BISECTION_MAX_ITER || lo.exp() == 0.0 {
            return Err(Error::domain(format!("could not bracket {target} from below")));
        }
    }
    while f(hi.exp()) < target {
        hi += 2.0;
        tries += 1;
        if tries > BISECTION_MAX_ITER || !hi.exp().is_finite() {
            return Err(Error::domain(format!("could not bracket {target} from above")));
        }
    }
    for _ in 0..BISECTION_MAX_ITER {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || lo.exp() == hi.exp() {
            break;
        }
        if f(mid.exp()) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((0.5 * (lo + hi)).exp())
}

/// Bisection for a sign change of `g` on `[lo, hi]` (`g(lo) <= 0 <= g(hi)`
/// or the reverse).
pub fn bisect<G>(g: G, mut lo: f64, mut hi: f64) -> Result<f64>
where
    G: Fn(f64) -> f64,
{
    let glo = g(lo);
    let ghi = g(hi);
    if glo == 0.0 {
        return Ok(lo);
    }
    if ghi == 0.0 {
        return Ok(hi);
    }
    if glo.signum() == ghi.signum() {
        return Err(Error::domain(format!(
            "no sign change on [{lo}, {hi}] ({glo:e}, {ghi:e})"
        )));
    }
    let lo_negative = glo < 0.0;
    for _ in 0..BISECTION_MAX_ITER {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= BISECTION_TOL || mid <= lo || mid >= hi {
            return Ok(mid);
        }
        let gm = g(mid);
        if gm == 0.0 {
            return Ok(mid);
        }
        if (gm < 0.0) == lo_negative {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Golden-section search for the maximum of a unimodal `f` on `[a, b]`.
/// Returns `(argmax, max)`.
pub fn golden_max<F>(f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64)
where
    F: Fn(f64) -> f64,
{
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..500 {
        if (b - a).abs() <= tol {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    if fc > fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Adaptive Simpson quadrature of `f` on `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson<F>(f: &F, a: f64, b: f64, tol: f64) -> f64
where
    F: Fn(f64) -> f64,
{
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, 48)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64
where
    F: Fn(f64) -> f64,
{
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Gauss–Legendre rule with `n` points on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let half = n.div_ceil(2);
    for i in 0..half {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss–Legendre rule mapped to `[a, b]`.
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    (
        x.iter().map(|xi| mid + half * xi).collect(),
        w.iter().map(|wi| half * wi).collect(),
    )
}

/// Composite trapezoid weights on a uniform grid with `len` points.
pub fn trapezoid_weight(i: usize, len: usize) -> f64 {
    if len < 2 {
        0.0
    } else if i == 0 || i == len - 1 {
        0.5
    } else {
        1.0
    }
}

/// Least-squares slope of `y` against `x`.
pub fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}
