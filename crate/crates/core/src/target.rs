//! The Sobolev-conjugate transform `A -> A_{n/sigma} = A o H^{-1}`, with
//! `H(t) = (int_0^t (tau / A(tau))^{sigma/(n-sigma)} dtau)^{(n-sigma)/n}`.
//!
//! The integral is accumulated on the lattice `t = 2^{j/64}` with an adaptive
//! Gauss–Legendre rule per lattice cell. Octave sums feed the convergence
//! classifier of [`crate::numeric::sum_panels`] both towards zero (the
//! admissibility condition) and towards infinity (finiteness of `t_inf`).

use thiserror::Error;

use crate::numeric::{adaptive, bisect_last_true, sum_panels, PanelSeries};
use crate::scalar::{pow, Real};
use crate::young::{Tabulated, YoungError, YoungFunction};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TargetError {
    #[error("invalid smoothness parameters n = {n}, sigma = {sigma}")]
    InvalidParams { n: usize, sigma: f64 },
    #[error("Young function violates the integrability condition at zero")]
    NotAdmissible,
    #[error("convergence of the {0} integral could not be decided")]
    Inconclusive(&'static str),
    #[error(transparent)]
    Young(#[from] YoungError),
}

/// Dimension `n` and smoothness gap `sigma` in `(0, n)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothnessParams<T> {
    n: usize,
    sigma: T,
}

impl<T: Real> SmoothnessParams<T> {
    pub fn new(n: usize, sigma: T) -> Result<Self, TargetError> {
        let ok = (n == 1 || n == 2) && sigma > T::zero() && sigma < T::from_usize_lossy(n) && sigma.is_finite();
        if ok {
            Ok(Self { n, sigma })
        } else {
            Err(TargetError::InvalidParams { n, sigma: sigma.to_f64_lossy() })
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn sigma(&self) -> T {
        self.sigma
    }

    fn n_real(&self) -> T {
        T::from_usize_lossy(self.n)
    }

    /// `sigma / (n - sigma)`.
    pub fn exponent(&self) -> T {
        self.sigma / (self.n_real() - self.sigma)
    }

    /// `(n - sigma) / n`.
    pub fn outer(&self) -> T {
        (self.n_real() - self.sigma) / self.n_real()
    }

    /// `n / sigma`, the critical power.
    pub fn critical_power(&self) -> T {
        self.n_real() / self.sigma
    }
}

/// Verdict on the integrability condition at zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Admissibility {
    Admissible,
    Divergent,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Tail<T> {
    Finite(T),
    Infinite,
    Inconclusive,
}

/// Lattice cells per octave.
pub const CELLS_PER_OCTAVE: usize = 64;
/// Octaves explored on either side of `t = 1`.
const MAX_OCTAVES: usize = 1100;
/// Per-cell relative quadrature tolerance.
const CELL_TOL: f64 = 1e-12;

/// Cached primitive `I(t) = int_0^t (tau/A)^q` for one `(A, n, sigma)`.
#[derive(Debug, Clone)]
pub struct HProfile<T> {
    young: YoungFunction<T>,
    params: SmoothnessParams<T>,
    ts: Vec<T>,
    cum: Vec<T>,
    tail: Tail<T>,
}

fn tiny<T: Real>() -> T {
    T::min_positive_value() * T::lit(1e8)
}

fn huge<T: Real>() -> T {
    T::max_value() / T::lit(1e8)
}

impl<T: Real> HProfile<T> {
    /// Runs the admissibility pass and accumulates the lattice.
    pub fn new(young: &YoungFunction<T>, params: SmoothnessParams<T>) -> Result<Self, TargetError> {
        let mut profile = Self { young: young.clone(), params, ts: Vec::new(), cum: Vec::new(), tail: Tail::Infinite };
        let steps: Vec<T> = (0..=CELLS_PER_OCTAVE).map(|m| T::lit(2f64.powf(m as f64 / CELLS_PER_OCTAVE as f64))).collect();
        let domain_end = young.domain_end();

        // Head: octave k covers [2^{-k-1}, 2^{-k}].
        let mut head: Vec<Vec<T>> = Vec::new();
        let verdict = sum_panels(
            |k| {
                let lo = T::lit(0.5).powi(k as i32 + 1);
                let value = young.eval(lo);
                if value == T::zero() {
                    return Some(T::infinity());
                }
                if lo < tiny() || value < tiny() {
                    return None;
                }
                let cells = profile.octave(lo, &steps, domain_end);
                let s = cells.iter().map(|c| c.1).sum::<T>();
                head.push(cells.iter().map(|c| c.1).collect());
                Some(s)
            },
            MAX_OCTAVES,
        );
        let head_total = match verdict {
            PanelSeries::Converges { sum, .. } => sum,
            PanelSeries::Diverges => return Err(TargetError::NotAdmissible),
            PanelSeries::Inconclusive => return Err(TargetError::Inconclusive("near-zero")),
        };
        // Keep extending the lattice for tabulation down to underflow.
        for k in head.len()..MAX_OCTAVES {
            let lo = T::lit(0.5).powi(k as i32 + 1);
            let value = young.eval(lo);
            if lo < tiny() || !(value >= tiny()) {
                break;
            }
            head.push(profile.octave(lo, &steps, domain_end).iter().map(|c| c.1).collect());
        }
        // Integral below the lowest octave: geometric in the octave sums,
        // which avoids cancelling `head_total` against the recorded cells.
        let octave_sums: Vec<T> = head.iter().map(|c| c.iter().copied().sum()).collect();
        let mut acc = match octave_sums.as_slice() {
            [.., prev, last] if *last < *prev => *last * (*last / *prev) / (T::one() - *last / *prev),
            _ => (head_total - octave_sums.iter().copied().sum::<T>()).max(T::zero()),
        };
        let lowest = T::lit(0.5).powi(head.len() as i32);
        profile.ts.push(lowest);
        profile.cum.push(acc);
        for (k, cells) in head.iter().enumerate().rev() {
            let lo = T::lit(0.5).powi(k as i32 + 1);
            for (m, c) in cells.iter().enumerate() {
                acc = acc + *c;
                profile.ts.push(lo * steps[m + 1]);
                profile.cum.push(acc);
            }
        }

        // Tail: octave k covers [2^k, 2^{k+1}], clipped to the finite domain.
        let mut tail_cells: Vec<(T, T)> = Vec::new();
        let mut octaves_done = 0usize;
        let tail_verdict = sum_panels(
            |k| {
                octaves_done = k + 1;
                let lo = T::lit(2.0).powi(k as i32);
                profile.tail_octave(lo, &steps, domain_end, &mut tail_cells)
            },
            MAX_OCTAVES,
        );
        let head_at_one = acc;
        profile.tail = match tail_verdict {
            PanelSeries::Converges { sum, .. } => Tail::Finite(head_at_one + sum),
            PanelSeries::Diverges => {
                // Keep extending the lattice for tabulation.
                for k in octaves_done..MAX_OCTAVES {
                    let lo = T::lit(2.0).powi(k as i32);
                    if profile.tail_octave(lo, &steps, domain_end, &mut tail_cells).is_none() {
                        break;
                    }
                }
                Tail::Infinite
            }
            PanelSeries::Inconclusive => Tail::Inconclusive,
        };
        for (t, c) in tail_cells {
            acc = acc + c;
            profile.ts.push(t);
            profile.cum.push(acc);
        }
        if let Tail::Finite(total) = profile.tail {
            // The lattice sum never exceeds the extrapolated total.
            let total = total.max(acc);
            profile.tail = Tail::Finite(total);
        }
        Ok(profile)
    }

    fn tail_octave(&self, lo: T, steps: &[T], domain_end: Option<T>, out: &mut Vec<(T, T)>) -> Option<T> {
        if lo > huge() || self.young.eval(lo) > huge() {
            return None;
        }
        if let Some(d) = domain_end {
            if lo >= d {
                return Some(T::zero());
            }
        }
        let cells = self.octave(lo, steps, domain_end);
        let s = cells.iter().map(|c| c.1).sum::<T>();
        out.extend(cells);
        Some(s)
    }

    /// Cell integrals over `[lo, 2 lo]` as `(right end, integral)`, dropping
    /// cells beyond a finite domain end.
    fn octave(&self, lo: T, steps: &[T], domain_end: Option<T>) -> Vec<(T, T)> {
        let mut out = Vec::with_capacity(CELLS_PER_OCTAVE);
        for m in 0..CELLS_PER_OCTAVE {
            let a = lo * steps[m];
            let mut b = lo * steps[m + 1];
            if let Some(d) = domain_end {
                if a >= d {
                    break;
                }
                b = b.min(d);
            }
            out.push((b, adaptive(|t| self.integrand(t), a, b, CELL_TOL)));
        }
        out
    }

    /// `(t / A(t))^{sigma/(n - sigma)}` with `0` where `A = inf` and `inf`
    /// where `A = 0`.
    pub fn integrand(&self, t: T) -> T {
        let a = self.young.eval(t);
        if a.is_infinite() {
            T::zero()
        } else if a == T::zero() {
            T::infinity()
        } else {
            pow(t / a, self.params.exponent())
        }
    }

    pub fn params(&self) -> SmoothnessParams<T> {
        self.params
    }

    pub fn young(&self) -> &YoungFunction<T> {
        &self.young
    }

    /// `int_0^t (tau/A(tau))^q dtau`.
    pub fn primitive(&self, t: T) -> T {
        if t <= T::zero() {
            return T::zero();
        }
        let first = self.ts[0];
        let last = *self.ts.last().unwrap();
        if t < first {
            // Local power law through the two lowest lattice points.
            let e = (self.cum[1] / self.cum[0]).ln() / (self.ts[1] / self.ts[0]).ln();
            return self.cum[0] * (t / first).powf(e);
        }
        if t >= last {
            let base = *self.cum.last().unwrap();
            return match self.tail {
                Tail::Finite(total) => total,
                _ => base + self.log_integral(last, t),
            };
        }
        let j = self.ts.partition_point(|&x| x <= t) - 1;
        self.cum[j] + adaptive(|x| self.integrand(x), self.ts[j], t, CELL_TOL)
    }

    fn log_integral(&self, a: T, b: T) -> T {
        let mut acc = T::zero();
        let mut lo = a;
        while lo < b {
            let hi = (lo * T::lit(2.0)).min(b);
            acc = acc + adaptive(|x| self.integrand(x), lo, hi, CELL_TOL);
            lo = hi;
        }
        acc
    }

    /// `H(t)`.
    pub fn h_value(&self, t: T) -> T {
        pow(self.primitive(t), self.params.outer())
    }

    /// `H(inf)` when finite.
    pub fn t_infinity(&self) -> Result<T, TargetError> {
        match self.tail {
            Tail::Finite(total) => Ok(pow(total, self.params.outer())),
            Tail::Infinite => Ok(T::infinity()),
            Tail::Inconclusive => Err(TargetError::Inconclusive("near-infinity")),
        }
    }

    /// Left-continuous inverse `inf { t : H(t) >= s }`, by bisection on
    /// [`HProfile::h_value`] to `1e-10` relative.
    pub fn h_inverse(&self, s: T) -> T {
        if s <= T::zero() {
            return T::zero();
        }
        let level = pow(s, T::one() / self.params.outer());
        if let Tail::Finite(total) = self.tail {
            if level > total {
                return T::infinity();
            }
        }
        let j = self.cum.partition_point(|&c| c < level);
        let (lo, hi) = if j == 0 {
            let mut lo = self.ts[0];
            while lo > T::zero() && self.primitive(lo) >= level {
                lo = lo / T::lit(2.0);
            }
            (lo, self.ts[0])
        } else if j < self.ts.len() {
            (self.ts[j - 1], self.ts[j])
        } else {
            let lo = *self.ts.last().unwrap();
            let mut hi = lo * T::lit(2.0);
            while hi.is_finite() && self.primitive(hi) < level {
                hi = hi * T::lit(2.0);
            }
            if !hi.is_finite() {
                return T::infinity();
            }
            (lo, hi)
        };
        let below = bisect_last_true(|t| self.primitive(t) < level, lo, hi, 1e-12);
        // The bisection bracket is [below, next]; report its upper end.
        let width = T::tolerance(1e-12) * below.abs().max(T::min_positive_value());
        if self.primitive(below) >= level {
            below
        } else {
            (below + width).min(hi)
        }
    }

    /// Tabulated `A_{n/sigma}`: exact values at the images `H(t_j)` of the
    /// lattice, quadratic in between with the exact right derivative at each
    /// knot, and `+inf` beyond `t_inf` when that is finite.
    pub fn target(&self) -> Result<YoungFunction<T>, TargetError> {
        let t_inf = self.t_infinity()?;
        let outer = self.params.outer();
        let q = self.params.exponent();
        let a = &self.young;
        // (s_j, A(t_j), right derivative of the target at s_j)
        let mut points: Vec<(T, T, T)> = Vec::with_capacity(self.ts.len());
        for (t, c) in self.ts.iter().zip(self.cum.iter()) {
            let (t, c) = (*t, *c);
            let s = pow(c, outer);
            let v = a.eval(t);
            if !(s > T::zero()) || !v.is_finite() || v > huge() || !(s < t_inf) {
                if points.is_empty() {
                    continue;
                }
                break;
            }
            let d = a.density_right(t) * pow(c, T::one() - outer) * pow(v / t, q) / outer;
            if !d.is_finite() {
                break;
            }
            if let Some(&(ps, pv, _)) = points.last() {
                if !(s > ps) || !(v > pv) {
                    continue;
                }
            }
            points.push((s, v, d));
        }
        if points.len() < 2 {
            return Err(TargetError::Young(YoungError::Trivial));
        }
        let mut knots = vec![T::zero()];
        let first_secant = points[0].1 / points[0].0;
        let mut lo = vec![first_secant];
        let mut hi = vec![first_secant];
        for w in points.windows(2) {
            let ((s0, v0, d0), (s1, v1, _)) = (w[0], w[1]);
            let ds = s1 - s0;
            let secant = (v1 - v0) / ds;
            if !secant.is_finite() {
                break;
            }
            let start = d0.max(*hi.last().unwrap());
            let end = (T::lit(2.0) * secant - start).max(start);
            knots.push(s0);
            lo.push(start);
            hi.push(end);
        }
        let k = knots.len();
        let (s_last, _, d_last) = points[k - 1];
        let start = d_last.max(*hi.last().unwrap());
        knots.push(s_last);
        lo.push(start);
        let table = if t_inf.is_finite() {
            hi.push(start);
            Tabulated::new(knots, lo, hi, T::zero(), Some(t_inf))?
        } else {
            let n = hi.len();
            let slope = if n >= 2 {
                let width = knots[n - 1 + 1] - knots[n - 1];
                ((hi[n - 1] - lo[n - 1]) / width).max(T::zero())
            } else {
                T::zero()
            };
            Tabulated::new(knots, lo, hi, slope, None)?
        };
        Ok(YoungFunction::tabulated(table))
    }
}

/// Integrability of `(t/A(t))^{sigma/(n-sigma)}` near zero.
pub fn admissibility<T: Real>(young: &YoungFunction<T>, params: SmoothnessParams<T>) -> Admissibility {
    match HProfile::new(young, params) {
        Ok(_) => Admissibility::Admissible,
        Err(TargetError::Inconclusive(_)) => Admissibility::Inconclusive,
        Err(_) => Admissibility::Divergent,
    }
}

pub fn admissible<T: Real>(young: &YoungFunction<T>, params: SmoothnessParams<T>) -> bool {
    admissibility(young, params) == Admissibility::Admissible
}

pub fn h_value<T: Real>(young: &YoungFunction<T>, params: SmoothnessParams<T>, t: T) -> Result<T, TargetError> {
    Ok(HProfile::new(young, params)?.h_value(t))
}

pub fn t_infinity<T: Real>(young: &YoungFunction<T>, params: SmoothnessParams<T>) -> Result<T, TargetError> {
    HProfile::new(young, params)?.t_infinity()
}

/// `A_{n/sigma}` as a tabulated Young function.
pub fn target<T: Real>(young: &YoungFunction<T>, params: SmoothnessParams<T>) -> Result<YoungFunction<T>, TargetError> {
    HProfile::new(young, params)?.target()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::young::Branch;

    fn params(n: usize, sigma: f64) -> SmoothnessParams<f64> {
        SmoothnessParams::new(n, sigma).unwrap()
    }

    #[test]
    fn rejects_bad_params() {
        assert!(SmoothnessParams::new(2, 2.0).is_err());
        assert!(SmoothnessParams::new(1, 0.0).is_err());
        assert!(SmoothnessParams::new(3, 0.5).is_err());
    }

    #[test]
    fn power_admissibility_matches_exponent_rule() {
        let p = params(2, 0.5);
        assert!(admissible(&YoungFunction::power(1.0).unwrap(), p));
        assert!(admissible(&YoungFunction::power(3.5).unwrap(), p));
        assert_eq!(admissibility(&YoungFunction::power(4.0).unwrap(), p), Admissibility::Divergent);
        assert_eq!(admissibility(&YoungFunction::power(5.0).unwrap(), p), Admissibility::Divergent);
        assert_eq!(admissibility(&YoungFunction::linf_gauge(1.0).unwrap(), p), Admissibility::Divergent);
    }

    #[test]
    fn h_of_identity_at_one() {
        let prof = HProfile::new(&YoungFunction::power(1.0).unwrap(), params(2, 0.5)).unwrap();
        assert_eq!(prof.h_value(0.0), 0.0);
        assert!((prof.h_value(1.0) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn h_matches_power_closed_form() {
        let (n, sigma, p) = (2.0, 0.5, 2.5);
        let prof = HProfile::new(&YoungFunction::power(p).unwrap(), params(2, sigma)).unwrap();
        for t in [1e-4f64, 0.3, 1.0, 7.0, 1e5] {
            let exact = ((n - sigma) / (n - sigma * p)).powf((n - sigma) / n) * t.powf((n - sigma * p) / n);
            assert!((prof.h_value(t) / exact - 1.0).abs() < 1e-9, "t = {t}");
        }
    }

    #[test]
    fn power_below_critical_has_infinite_t_inf() {
        let v = t_infinity(&YoungFunction::power(2.0).unwrap(), params(1, 0.4)).unwrap();
        assert!(v.is_infinite());
    }

    #[test]
    fn supercritical_splice_has_finite_t_inf() {
        let a = YoungFunction::spliced(Branch::Power(1.5), Branch::Power(3.0), 1.0).unwrap();
        let prof = HProfile::new(&a, params(1, 0.4)).unwrap();
        let ti = prof.t_infinity().unwrap();
        // q = 2/3: int_0^1 t^{-1/3} + int_1^inf t^{-4/3} = 1.5 + 3.
        let exact = 4.5f64.powf(0.6);
        assert!((ti / exact - 1.0).abs() < 1e-8, "{ti} vs {exact}");
        let tgt = prof.target().unwrap();
        assert_eq!(tgt.eval(ti * 1.0001), f64::INFINITY);
        assert!(tgt.eval(ti * 0.9).is_finite());
    }

    #[test]
    fn target_slope_for_identity() {
        let tgt = target(&YoungFunction::power(1.0).unwrap(), params(2, 0.5)).unwrap();
        let (a, b) = (1e-3, 1e3);
        let slope = (tgt.eval(b) / tgt.eval(a)).ln() / (b / a).ln();
        assert!((slope - 4.0 / 3.0).abs() < 1e-3, "{slope}");
    }

    #[test]
    fn composition_identity_off_lattice() {
        let a = YoungFunction::power(2.0).unwrap();
        let prof = HProfile::new(&a, params(2, 0.4)).unwrap();
        let tgt = prof.target().unwrap();
        for j in -30..=30 {
            let t = 10f64.powf(j as f64 / 7.0);
            let lhs = tgt.eval(prof.h_value(t));
            assert!((lhs / a.eval(t) - 1.0).abs() < 1e-7, "t = {t}: {lhs} vs {}", a.eval(t));
        }
    }

    #[test]
    fn h_inverse_round_trip() {
        let a = YoungFunction::<f64>::exp();
        let prof = HProfile::new(&a, params(1, 0.4)).unwrap();
        for t in [1e-3, 0.5, 2.0, 9.0] {
            let s = prof.h_value(t);
            assert!((prof.h_inverse(s) / t - 1.0).abs() < 1e-9);
        }
        let ti = prof.t_infinity().unwrap();
        assert!(ti.is_finite());
        assert_eq!(prof.h_inverse(ti * 1.01), f64::INFINITY);
    }
}
