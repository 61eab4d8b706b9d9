//! Quadrature, dyadic panel series with divergence detection, and monotone
//! bracketing used throughout the crate.

use std::sync::OnceLock;

use crate::scalar::Real;

const GL_POINTS: usize = 16;

/// 16-point Gauss–Legendre nodes and weights on [-1, 1], computed once by
/// Newton iteration on the Legendre polynomial.
fn gauss_legendre_16() -> &'static [(f64, f64); GL_POINTS] {
    static TABLE: OnceLock<[(f64, f64); GL_POINTS]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let n = GL_POINTS;
        let mut table = [(0.0, 0.0); GL_POINTS];
        for i in 0..n {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-17 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            table[i] = (x, 2.0 / ((1.0 - x * x) * dp * dp));
        }
        table
    })
}

/// Value and derivative of the Legendre polynomial of degree `n` at `x`.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Fixed 16-point Gauss–Legendre rule on `[a, b]`.
pub fn gauss_legendre<T: Real, F: FnMut(T) -> T>(mut f: F, a: T, b: T) -> T {
    let half = (b - a) / T::lit(2.0);
    let mid = (a + b) / T::lit(2.0);
    let mut acc = T::zero();
    for &(x, w) in gauss_legendre_16() {
        acc = acc + T::lit(w) * f(mid + half * T::lit(x));
    }
    acc * half
}

/// Nodes and weights of the 16-point rule on `[a, b]`.
pub fn gauss_legendre_nodes<T: Real>(a: T, b: T) -> impl Iterator<Item = (T, T)> {
    let half = (b - a) / T::lit(2.0);
    let mid = (a + b) / T::lit(2.0);
    gauss_legendre_16().iter().map(move |&(x, w)| (mid + half * T::lit(x), half * T::lit(w)))
}

/// Adaptive bisection on top of the 16-point rule: a panel is accepted when
/// the rule on the panel agrees with the sum over its halves.
pub fn adaptive<T: Real, F: FnMut(T) -> T>(mut f: F, a: T, b: T, rel_tol: f64) -> T {
    fn recurse<T: Real, F: FnMut(T) -> T>(f: &mut F, a: T, b: T, whole: T, rel: T, depth: usize) -> T {
        let m = (a + b) / T::lit(2.0);
        let left = gauss_legendre(&mut *f, a, m);
        let right = gauss_legendre(&mut *f, m, b);
        let halves = left + right;
        if !halves.is_finite() {
            return halves;
        }
        let err = (halves - whole).abs();
        if depth == 0 || err <= rel * halves.abs() || err <= T::min_positive_value() {
            return halves;
        }
        recurse(f, a, m, left, rel, depth - 1) + recurse(f, m, b, right, rel, depth - 1)
    }
    if a == b {
        return T::zero();
    }
    let rel = T::tolerance(rel_tol);
    let whole = gauss_legendre(&mut f, a, b);
    recurse(&mut f, a, b, whole, rel, 30)
}

/// Outcome of summing a series of dyadic panel integrals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PanelSeries<T> {
    /// The series converges; `sum` includes the extrapolated remainder.
    Converges { sum: T, panels: usize },
    /// Panel sums stop shrinking.
    Diverges,
    /// Panel sums shrink too slowly to decide.
    Inconclusive,
}

/// Consecutive panels that must fail to shrink before a verdict.
pub const STALL_PANELS: usize = 8;
/// A panel "shrinks" when its sum is below this fraction of the previous one.
pub const SHRINK_FACTOR: f64 = 0.99;

/// Sums panel integrals `S_0, S_1, ...` produced by `panel`, deciding
/// convergence from the decay of successive sums.
///
/// `panel(k)` returns `None` once the panel leaves the representable range.
/// Geometric decay (ratio below [`SHRINK_FACTOR`]) is summed with a geometric
/// remainder. Non-shrinking sums over [`STALL_PANELS`] consecutive panels are
/// divergent. Sums that shrink, but slower than geometrically, are tested for
/// power-law decay in the panel index: an exponent clearly above one
/// converges, clearly below one diverges, anything else is inconclusive.
pub fn sum_panels<T: Real, F: FnMut(usize) -> Option<T>>(mut panel: F, max_panels: usize) -> PanelSeries<T> {
    let shrink = T::lit(SHRINK_FACTOR);
    let stall_limit = T::one() - T::tolerance(1e-9);
    let negligible = T::epsilon() * T::lit(1e-2);
    let mut sums: Vec<T> = Vec::new();
    let mut total = T::zero();
    let mut slow_run = 0usize;
    let mut flat_run = 0usize;
    let mut fast_run = 0usize;
    for k in 0..max_panels {
        let Some(s) = panel(k) else { break };
        if !s.is_finite() {
            return PanelSeries::Diverges;
        }
        sums.push(s);
        total = total + s;
        if k == 0 {
            continue;
        }
        let prev = sums[k - 1];
        if s == T::zero() {
            if prev == T::zero() {
                return PanelSeries::Converges { sum: total, panels: k + 1 };
            }
            fast_run += 1;
            slow_run = 0;
            flat_run = 0;
            continue;
        }
        let ratio = if prev == T::zero() { T::infinity() } else { s / prev };
        if ratio < shrink {
            fast_run += 1;
            slow_run = 0;
            flat_run = 0;
        } else {
            fast_run = 0;
            slow_run += 1;
            if ratio >= stall_limit {
                flat_run += 1;
            } else {
                flat_run = 0;
            }
        }
        if flat_run >= STALL_PANELS {
            return PanelSeries::Diverges;
        }
        if fast_run >= STALL_PANELS && s <= negligible * total {
            let r = max_recent_ratio(&sums, STALL_PANELS);
            let rest = s * r / (T::one() - r);
            return PanelSeries::Converges { sum: total + rest, panels: k + 1 };
        }
    }
    let k = sums.len();
    if k < 2 * STALL_PANELS {
        return PanelSeries::Inconclusive;
    }
    if fast_run >= STALL_PANELS {
        let r = max_recent_ratio(&sums, STALL_PANELS);
        let rest = sums[k - 1] * r / (T::one() - r);
        return PanelSeries::Converges { sum: total + rest, panels: k };
    }
    if slow_run == 0 {
        return PanelSeries::Inconclusive;
    }
    // Power-law test S_k ~ C k^{-beta}, measured over two doublings of k.
    let idx = |j: usize| T::from_usize_lossy(j + 1);
    let exponent = |lo: usize, hi: usize| -> T { (sums[lo] / sums[hi]).ln() / (idx(hi) / idx(lo)).ln() };
    let last = k - 1;
    let b_far = exponent(last / 2, last);
    let b_near = exponent(last / 4, last / 2);
    if !(b_far.is_finite() && b_near.is_finite()) {
        return PanelSeries::Inconclusive;
    }
    let consistent = (b_far - b_near).abs() <= T::lit(0.1) * b_far.abs().max(T::one());
    if !consistent {
        return PanelSeries::Inconclusive;
    }
    if b_far > T::lit(1.1) {
        let rest = sums[last] * idx(last) / (b_far - T::one());
        PanelSeries::Converges { sum: total + rest, panels: k }
    } else if b_far < T::lit(0.9) {
        PanelSeries::Diverges
    } else {
        PanelSeries::Inconclusive
    }
}

fn max_recent_ratio<T: Real>(sums: &[T], count: usize) -> T {
    let k = sums.len();
    let mut r = T::zero();
    for j in k.saturating_sub(count).max(1)..k {
        if sums[j - 1] > T::zero() {
            r = r.max(sums[j] / sums[j - 1]);
        }
    }
    r.min(T::lit(SHRINK_FACTOR))
}

/// Largest `t` in `[lo, hi]` with `pred(t)` true, for a predicate that is true
/// on an initial segment. Requires `pred(lo)` and `!pred(hi)`; stops when the
/// bracket is relatively narrower than `rel_tol`. Returns the certified end.
pub fn bisect_last_true<T: Real, P: FnMut(T) -> bool>(mut pred: P, mut lo: T, mut hi: T, rel_tol: f64) -> T {
    let tol = T::tolerance(rel_tol);
    for _ in 0..400 {
        if hi - lo <= tol * hi.abs() {
            break;
        }
        let mid = if lo > T::zero() && hi / lo > T::lit(4.0) { (lo * hi).sqrt() } else { lo + (hi - lo) / T::lit(2.0) };
        if mid <= lo || mid >= hi {
            break;
        }
        if pred(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_weights_sum_to_two() {
        let s: f64 = gauss_legendre_16().iter().map(|&(_, w)| w).sum();
        assert!((s - 2.0).abs() < 1e-14);
    }

    #[test]
    fn gauss_legendre_is_exact_for_degree_31() {
        let v = gauss_legendre(|x: f64| x.powi(30) + x.powi(31), 0.0, 1.0);
        assert!((v - (1.0 / 31.0 + 1.0 / 32.0)).abs() < 1e-14);
    }

    #[test]
    fn adaptive_handles_kinks() {
        let v = adaptive(|x: f64| (x - 0.3).abs(), 0.0, 1.0, 1e-12);
        assert!((v - (0.045 + 0.245)).abs() < 1e-12);
    }

    #[test]
    fn geometric_series_converges_with_remainder() {
        match sum_panels(|k| Some(0.5f64.powi(k as i32)), 20) {
            PanelSeries::Converges { sum, .. } => assert!((sum - 2.0).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn constant_panels_diverge() {
        assert_eq!(sum_panels(|_| Some(std::f64::consts::LN_2), 1000), PanelSeries::Diverges);
    }

    #[test]
    fn growing_panels_diverge() {
        assert_eq!(sum_panels(|k| Some(1.07f64.powi(k as i32)), 1000), PanelSeries::Diverges);
    }

    #[test]
    fn power_law_decay_in_index_converges() {
        let s = |k: usize| ((k + 1) as f64).powf(-2.0);
        match sum_panels(|k| Some(s(k)), 1000) {
            PanelSeries::Converges { sum, .. } => {
                let exact = std::f64::consts::PI.powi(2) / 6.0;
                assert!((sum - exact).abs() / exact < 1e-3, "{sum}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn slow_geometric_decay_is_inconclusive() {
        assert_eq!(sum_panels(|k| Some(0.995f64.powi(k as i32)), 1000), PanelSeries::Inconclusive);
    }

    #[test]
    fn harmonic_like_decay_is_divergent_or_inconclusive() {
        let v = sum_panels(|k| Some(((k + 1) as f64).powf(-0.5)), 1000);
        assert_eq!(v, PanelSeries::Diverges);
    }

    #[test]
    fn bisection_finds_threshold() {
        let t = bisect_last_true(|x: f64| x * x <= 2.0, 0.0, 2.0, 1e-14);
        assert!((t - 2f64.sqrt()).abs() < 1e-13);
    }
}
