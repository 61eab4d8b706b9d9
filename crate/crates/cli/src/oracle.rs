//! Direct `O(N^2)` sums for one-dimensional seminorm modulars.
//!
//! These loop over ordered pairs of lattice points and share no code with
//! the library, so they can serve as an independent reference.

use orlicz_core::{Boundary, Grid, Young};

/// `u` at lattice index `i`, where index 0 is the first cell of the box.
fn value(u: &Grid, i: i64, boundary: Boundary) -> Option<f64> {
    let n = u.points() as i64;
    if (0..n).contains(&i) {
        Some(u.values()[i as usize])
    } else {
        match boundary {
            Boundary::Zero => Some(0.0),
            Boundary::Interior => None,
        }
    }
}

/// Adaptive Simpson rule on `[a, b]`; each accepted panel is within `tol`.
fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn step(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            return left + right + (left + right - whole) / 15.0;
        }
        step(f, a, m, fa, flm, fm, left, tol, depth - 1) + step(f, m, b, fm, frm, fb, right, tol, depth - 1)
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(f, a, b, fa, fm, fb, whole, tol, 30)
}

/// `int_R^inf A(c r^{-s}) dr / r`, integrated in `t = s ln(r / R)` out to
/// where `c r^{-s}` has dropped by `e^{-40}`.
fn radial_tail(young: &Young, s: f64, c: f64, radius: f64) -> f64 {
    let x = c * radius.powf(-s);
    let peak = young.eval(x);
    if peak == 0.0 || peak.is_infinite() {
        return peak;
    }
    let f = |t: f64| young.eval(x * (-t).exp());
    simpson(&f, 0.0, 40.0, 1e-16 * peak) / s
}

/// Gagliardo modular
/// `sum_{x != y} A(|u(x) - u(y)| / (lambda |x - y|^s)) mu^2 / |x - y|`
/// over ordered pairs with `|x - y|` shorter than the box. With a zero
/// extension the longer pairs are added as the integral
/// `mu^{-1} int_{|z| > R} dz` over offsets `z`, `R` half a cell short of the
/// box width, where each pair sees one cell of the box.
pub fn gagliardo_modular(young: &Young, s: f64, u: &Grid, boundary: Boundary, lambda: f64) -> f64 {
    assert_eq!(u.n(), 1, "the oracle is one-dimensional");
    let n = u.points() as i64;
    let h = u.cell_width();
    let mu = u.cell_measure();
    let mut total = 0.0;
    for i in -(n - 1)..(2 * n - 1) {
        for j in -(n - 1)..(2 * n - 1) {
            let k = (i - j).abs();
            if k == 0 || k >= n {
                continue;
            }
            let (Some(a), Some(b)) = (value(u, i, boundary), value(u, j, boundary)) else {
                continue;
            };
            let dist = k as f64 * h;
            total += young.eval((a - b).abs() / (lambda * dist.powf(s))) * mu * mu / dist;
        }
    }
    if boundary == Boundary::Zero {
        let radius = (n as f64 - 0.5) * h;
        for &v in u.values() {
            // Both signs of z, and y as either end of the pair.
            total += 4.0 * mu * radial_tail(young, s, v.abs() / lambda, radius);
        }
    }
    total
}

/// Besov modular
/// `sum_{rho = 2^k h} ln 2 sum_x A(|u(x + rho) - u(x)| / (lambda rho^s)) mu`,
/// up to the box width, or with a zero extension until the shells stop
/// adding anything.
pub fn besov_modular(young: &Young, s: f64, u: &Grid, boundary: Boundary, lambda: f64) -> f64 {
    assert_eq!(u.n(), 1, "the oracle is one-dimensional");
    let n = u.points() as i64;
    let h = u.cell_width();
    let mu = u.cell_measure();
    let mut total = 0.0;
    let mut shift = 1;
    while shift <= n {
        let rho = shift as f64 * h;
        for i in -shift..n {
            let (Some(a), Some(b)) = (value(u, i, boundary), value(u, i + shift, boundary)) else {
                continue;
            };
            total += std::f64::consts::LN_2 * mu * young.eval((b - a).abs() / (lambda * rho.powf(s)));
        }
        shift *= 2;
    }
    if boundary == Boundary::Zero {
        // Past the box each pair has one end outside it: x in the box with
        // x + rho outside, or x outside with x + rho in the box.
        let mut rho = shift as f64 * h;
        while rho.is_finite() {
            let mut term = 0.0;
            for &v in u.values() {
                let a = young.eval(v.abs() / (lambda * rho.powf(s)));
                term += 2.0 * std::f64::consts::LN_2 * mu * a;
            }
            total += term;
            if term <= 1e-18 * total {
                break;
            }
            rho *= 2.0;
        }
    }
    total
}

/// `inf {lambda : modular(lambda) <= 1}` by plain bisection in `ln lambda`.
pub fn norm_by_bisection(mut modular: impl FnMut(f64) -> f64) -> f64 {
    let (mut lo, mut hi) = (1e-300f64, 1.0f64);
    if modular(lo) <= 1.0 {
        return 0.0;
    }
    while modular(hi) > 1.0 {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = (lo.ln() * 0.5 + hi.ln() * 0.5).exp();
        if mid <= lo || mid >= hi {
            break;
        }
        if modular(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}
