//! Sampled functions on boxes, sequences, rearrangements, modulars and
//! Luxemburg norms.

use thiserror::Error;

use crate::scalar::Real;
use crate::young::YoungFunction;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("dimension must be 1 or 2, got {0}")]
    Dimension(usize),
    #[error("points per axis must be a power of two >= 8, got {0}")]
    Points(usize),
    #[error("half-width must be positive and finite, got {0}")]
    HalfWidth(f64),
    #[error("expected {expected} values, got {got}")]
    Length { expected: usize, got: usize },
    #[error("non-finite value at index {0}")]
    NonFinite(usize),
    #[error("translation moves nonzero values out of the box")]
    LeavesBox,
    #[error("grids are incompatible")]
    Mismatch,
    #[error("argument must be positive, got {0}")]
    NonPositive(f64),
}

/// Real function sampled at `x = -L + i h`, `h = 2L/N`, on `[-L, L)^n`.
///
/// Values are stored with axis 0 fastest: index `i1 * N + i0` for `n = 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction<T> {
    n: usize,
    points: usize,
    half_width: T,
    values: Vec<T>,
}

impl<T: Real> GridFunction<T> {
    pub fn new(n: usize, points: usize, half_width: T, values: Vec<T>) -> Result<Self, GridError> {
        if n != 1 && n != 2 {
            return Err(GridError::Dimension(n));
        }
        if points < 8 || !points.is_power_of_two() {
            return Err(GridError::Points(points));
        }
        if !(half_width > T::zero() && half_width.is_finite()) {
            return Err(GridError::HalfWidth(half_width.to_f64_lossy()));
        }
        let expected = points.pow(n as u32);
        if values.len() != expected {
            return Err(GridError::Length { expected, got: values.len() });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(GridError::NonFinite(i));
        }
        Ok(Self { n, points, half_width, values })
    }

    /// Samples `f` at the grid nodes; `f` receives the point coordinates.
    pub fn from_fn<F: FnMut(&[T]) -> T>(n: usize, points: usize, half_width: T, mut f: F) -> Result<Self, GridError> {
        let h = T::lit(2.0) * half_width / T::from_usize_lossy(points);
        let total = if n == 1 || n == 2 { points.pow(n as u32) } else { 0 };
        let mut values = Vec::with_capacity(total);
        let coord = |i: usize| -half_width + T::from_usize_lossy(i) * h;
        for idx in 0..total {
            let x = [coord(idx % points), coord(idx / points)];
            values.push(f(&x[..n]));
        }
        Self::new(n, points, half_width, values)
    }

    pub fn zeros_like(&self) -> Self {
        Self { values: vec![T::zero(); self.values.len()], ..self.clone() }
    }

    pub fn with_values(&self, values: Vec<T>) -> Result<Self, GridError> {
        Self::new(self.n, self.points, self.half_width, values)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn half_width(&self) -> T {
        self.half_width
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Cell width `h = 2L/N`.
    pub fn cell_width(&self) -> T {
        T::lit(2.0) * self.half_width / T::from_usize_lossy(self.points)
    }

    /// Cell measure `h^n`.
    pub fn cell_measure(&self) -> T {
        self.cell_width().powi(self.n as i32)
    }

    /// Coordinate of node `i` along any axis.
    pub fn coord(&self, i: usize) -> T {
        -self.half_width + T::from_usize_lossy(i) * self.cell_width()
    }

    /// Multi-index of a flat index.
    pub fn index(&self, flat: usize) -> [usize; 2] {
        [flat % self.points, flat / self.points]
    }

    pub fn same_grid(&self, other: &Self) -> bool {
        self.n == other.n && self.points == other.points && self.half_width == other.half_width
    }

    pub fn scaled(&self, c: T) -> Self {
        Self { values: self.values.iter().map(|&v| v * c).collect(), ..self.clone() }
    }

    pub fn map<F: FnMut(T) -> T>(&self, f: F) -> Result<Self, GridError> {
        self.with_values(self.values.iter().copied().map(f).collect())
    }

    pub fn sup_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    /// `mu * sum |u|`.
    pub fn l1_norm(&self) -> T {
        crate::scalar::compensated_sum(self.values.iter().map(|v| v.abs())) * self.cell_measure()
    }

    /// Whole-cell translation `u(x - shift h)`; errors when a nonzero value
    /// would leave the box.
    pub fn translated(&self, shift: &[i64]) -> Result<Self, GridError> {
        let n = self.n;
        let np = self.points as i64;
        let mut out = vec![T::zero(); self.values.len()];
        for (flat, &v) in self.values.iter().enumerate() {
            let idx = self.index(flat);
            let mut target = 0i64;
            let mut stride = 1i64;
            for axis in 0..n {
                let j = idx[axis] as i64 + shift.get(axis).copied().unwrap_or(0);
                if !(0..np).contains(&j) {
                    if v != T::zero() {
                        return Err(GridError::LeavesBox);
                    }
                    target = -1;
                    break;
                }
                target += j * stride;
                stride *= np;
            }
            if target >= 0 {
                out[target as usize] = v;
            }
        }
        self.with_values(out)
    }

    /// Absolute values with cell measure as weights.
    pub fn samples(&self) -> WeightedSamples<T> {
        let mu = self.cell_measure();
        WeightedSamples::new(self.values.iter().map(|&v| (v, mu)))
    }
}

/// Non-negative values with positive weights, kept in a canonical order
/// (value descending, then weight descending) so that modular sums depend
/// only on the multiset of samples.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSamples<T> {
    values: Vec<T>,
    weights: Vec<T>,
}

impl<T: Real> WeightedSamples<T> {
    /// Drops zero values and zero weights and takes absolute values.
    pub fn new<I: IntoIterator<Item = (T, T)>>(pairs: I) -> Self {
        let mut items: Vec<(T, T)> =
            pairs.into_iter().map(|(v, w)| (v.abs(), w)).filter(|&(v, w)| v != T::zero() && w > T::zero()).collect();
        items.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(b.1.partial_cmp(&a.1).unwrap()));
        let (values, weights) = items.into_iter().unzip();
        Self { values, weights }
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sup(&self) -> T {
        self.values.first().copied().unwrap_or(T::zero())
    }

    pub fn measure(&self) -> T {
        crate::scalar::compensated_sum(self.weights.iter().copied())
    }

    /// `sum w A(v / lambda)`, `+inf` as soon as one term is infinite.
    pub fn modular(&self, young: &YoungFunction<T>, lambda: T) -> T {
        modular_terms(young, self.values.iter().zip(self.weights.iter()).map(|(&v, &w)| (v / lambda, w)))
    }

    pub fn luxemburg(&self, young: &YoungFunction<T>) -> T {
        if self.is_empty() {
            return T::zero();
        }
        // Power modulars are homogeneous: M(lambda) = M(1) lambda^{-p}.
        if let crate::young::Shape::Power { p } = young.shape() {
            let m = self.modular(young, T::one());
            if m > T::zero() && m.is_finite() {
                return m.powf(T::one() / *p);
            }
        }
        let guess = initial_scale(young, self.sup(), self.measure());
        luxemburg_solve(|lambda| self.modular(young, lambda), guess)
    }
}

/// `sum w A(x)` over `(x, w)` pairs with compensated accumulation.
pub fn modular_terms<T: Real, I: Iterator<Item = (T, T)>>(young: &YoungFunction<T>, terms: I) -> T {
    let mut sum = T::zero();
    let mut carry = T::zero();
    for (x, w) in terms {
        let a = young.eval(x);
        if a == T::zero() {
            continue;
        }
        if a.is_infinite() {
            return T::infinity();
        }
        let term = w * a;
        let t = sum + term;
        if sum.abs() >= term.abs() {
            carry = carry + ((sum - t) + term);
        } else {
            carry = carry + ((term - t) + sum);
        }
        sum = t;
    }
    sum + carry
}

/// Bracket heuristic `sup / A^{-1}(1 / measure)`.
pub fn initial_scale<T: Real>(young: &YoungFunction<T>, sup: T, measure: T) -> T {
    if measure > T::zero() {
        let inv = young.inverse(T::one() / measure);
        if inv > T::zero() && inv.is_finite() {
            let g = sup / inv;
            if g > T::zero() && g.is_finite() {
                return g;
            }
        }
    }
    sup.max(T::min_positive_value())
}

/// Relative bracket width at which Luxemburg solves stop.
pub const LUXEMBURG_TOL: f64 = 1e-12;

/// Smallest `lambda` (to [`LUXEMBURG_TOL`]) with `modular(lambda) <= 1`, for a
/// non-increasing `modular`. Returns the certified upper end of the final
/// bracket; `guess <= 0` means the zero function and returns 0.
///
/// Uses an Illinois step on `ln modular` against `ln lambda` when both bracket
/// values are finite and positive, and a geometric bisection otherwise.
pub fn luxemburg_solve<T: Real, F: FnMut(T) -> T>(mut modular: F, guess: T) -> T {
    if !(guess > T::zero()) {
        return T::zero();
    }
    let tol = T::tolerance(LUXEMBURG_TOL);
    let one = T::one();
    let mut hi = guess;
    let mut m_hi = modular(hi);
    let mut guard = 0;
    while m_hi > one {
        hi = hi * T::lit(2.0);
        m_hi = modular(hi);
        guard += 1;
        if guard > 4000 || hi.is_infinite() {
            return T::infinity();
        }
    }
    let mut lo = hi / T::lit(2.0);
    let mut m_lo = modular(lo);
    guard = 0;
    while m_lo <= one {
        hi = lo;
        m_hi = m_lo;
        lo = lo / T::lit(2.0);
        m_lo = modular(lo);
        guard += 1;
        if guard > 4000 || lo == T::zero() {
            return hi;
        }
    }
    // Illinois on f(x) = ln modular(e^x), decreasing, root f = 0.
    let mut f_lo = m_lo.ln();
    let mut f_hi = m_hi.ln();
    let mut side = 0i8;
    for _ in 0..200 {
        if hi - lo <= tol * hi {
            break;
        }
        let (x_lo, x_hi) = (lo.ln(), hi.ln());
        let mut x = if f_lo.is_finite() && f_hi.is_finite() && f_lo > f_hi {
            x_lo + (x_hi - x_lo) * f_lo / (f_lo - f_hi)
        } else {
            (x_lo + x_hi) / T::lit(2.0)
        };
        // Keep the step strictly inside the bracket.
        let margin = (x_hi - x_lo) * T::lit(1e-3);
        x = x.max(x_lo + margin).min(x_hi - margin);
        let mid = x.exp();
        if !(mid > lo && mid < hi) {
            let mid = lo + (hi - lo) / T::lit(2.0);
            if !(mid > lo && mid < hi) {
                break;
            }
        }
        let m = modular(mid);
        if m > one {
            lo = mid;
            f_lo = m.ln();
            if side == -1 {
                f_hi = f_hi / T::lit(2.0);
            }
            side = -1;
        } else {
            hi = mid;
            f_hi = if m > T::zero() { m.ln() } else { T::neg_infinity() };
            if side == 1 {
                f_lo = f_lo / T::lit(2.0);
            }
            side = 1;
        }
    }
    hi
}

impl<T: Real> GridFunction<T> {
    /// `mu * sum A(|u|)`.
    pub fn modular(&self, young: &YoungFunction<T>) -> T {
        self.samples().modular(young, T::one())
    }

    pub fn luxemburg_norm(&self, young: &YoungFunction<T>) -> T {
        self.samples().luxemburg(young)
    }

    pub fn rearrangement(&self) -> StepRearrangement<T> {
        StepRearrangement::from_samples(self.samples())
    }

    /// `int_0^inf u*(t) t^{1/p - 1} dt`.
    pub fn lorentz_p1(&self, p: T) -> Result<T, GridError> {
        self.rearrangement().lorentz_p1(p)
    }
}

/// Finitely supported sequence `values[k]` at index `offset + k`.
#[derive(Debug, Clone, PartialEq)]
pub struct RealSequence<T> {
    offset: i64,
    values: Vec<T>,
}

impl<T: Real> RealSequence<T> {
    pub fn new(offset: i64, values: Vec<T>) -> Result<Self, GridError> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(GridError::NonFinite(i));
        }
        Ok(Self { offset, values })
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn get(&self, i: i64) -> T {
        let k = i - self.offset;
        if k < 0 || k as usize >= self.values.len() {
            T::zero()
        } else {
            self.values[k as usize]
        }
    }

    pub fn l1_norm(&self) -> T {
        crate::scalar::compensated_sum(self.values.iter().map(|v| v.abs()))
    }

    pub fn samples(&self) -> WeightedSamples<T> {
        WeightedSamples::new(self.values.iter().map(|&v| (v, T::one())))
    }

    /// `sum_i A(|a_i|)`.
    pub fn modular(&self, young: &YoungFunction<T>) -> T {
        self.samples().modular(young, T::one())
    }

    pub fn luxemburg_norm(&self, young: &YoungFunction<T>) -> T {
        self.samples().luxemburg(young)
    }

    pub fn scaled(&self, c: T) -> Self {
        Self { offset: self.offset, values: self.values.iter().map(|&v| v * c).collect() }
    }
}

/// Non-increasing right-continuous step profile: value `values[k]` on
/// `[m_k, m_{k+1})` with `m_{k+1} - m_k = measures[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRearrangement<T> {
    samples: WeightedSamples<T>,
}

impl<T: Real> StepRearrangement<T> {
    pub fn from_samples(samples: WeightedSamples<T>) -> Self {
        Self { samples }
    }

    /// Steps given as `(value, measure)`; values are sorted into
    /// non-increasing order.
    pub fn from_steps<I: IntoIterator<Item = (T, T)>>(steps: I) -> Self {
        Self { samples: WeightedSamples::new(steps) }
    }

    pub fn values(&self) -> &[T] {
        self.samples.values()
    }

    pub fn measures(&self) -> &[T] {
        self.samples.weights()
    }

    pub fn total_measure(&self) -> T {
        self.samples.measure()
    }

    /// `u*(t)`.
    pub fn value_at(&self, t: T) -> T {
        let mut acc = T::zero();
        for (&v, &m) in self.values().iter().zip(self.measures()) {
            acc = acc + m;
            if t < acc {
                return v;
            }
        }
        T::zero()
    }

    /// `int_0^inf u*(t) dt`.
    pub fn integral(&self) -> T {
        crate::scalar::compensated_sum(self.values().iter().zip(self.measures()).map(|(&v, &m)| v * m))
    }

    /// `u**(t) = (1/t) int_0^t u*`.
    pub fn double_star(&self, t: T) -> Result<T, GridError> {
        if !(t > T::zero()) {
            return Err(GridError::NonPositive(t.to_f64_lossy()));
        }
        let mut acc = T::zero();
        let mut start = T::zero();
        for (&v, &m) in self.values().iter().zip(self.measures()) {
            let end = start + m;
            if t <= end {
                acc = acc + v * (t - start);
                return Ok(acc / t);
            }
            acc = acc + v * m;
            start = end;
        }
        Ok(acc / t)
    }

    /// `int_0^inf u*(t) t^{1/p - 1} dt = p sum v_k (m_{k+1}^{1/p} - m_k^{1/p})`.
    pub fn lorentz_p1(&self, p: T) -> Result<T, GridError> {
        if !(p > T::one()) {
            return Err(GridError::NonPositive((p - T::one()).to_f64_lossy()));
        }
        let e = T::one() / p;
        let mut start = T::zero();
        let mut terms = Vec::with_capacity(self.values().len());
        let values = self.values();
        let measures = self.measures();
        let mut k = 0;
        while k < values.len() {
            // Merge runs of equal values to avoid differencing nearby powers.
            let v = values[k];
            let mut m = T::zero();
            while k < values.len() && values[k] == v {
                m = m + measures[k];
                k += 1;
            }
            let end = start + m;
            terms.push(v * (end.powf(e) - start.powf(e)));
            start = end;
        }
        Ok(p * crate::scalar::compensated_sum(terms))
    }

    pub fn luxemburg_norm(&self, young: &YoungFunction<T>) -> T {
        self.samples.luxemburg(young)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(values: Vec<f64>, half_width: f64) -> GridFunction<f64> {
        let n = values.len();
        GridFunction::new(1, n, half_width, values).unwrap()
    }

    #[test]
    fn rejects_invalid_grids() {
        assert!(matches!(GridFunction::new(1, 6, 1.0, vec![0.0; 6]), Err(GridError::Points(6))));
        assert!(matches!(GridFunction::new(3, 8, 1.0, vec![0.0; 512]), Err(GridError::Dimension(3))));
        assert!(matches!(GridFunction::new(1, 8, 1.0, vec![0.0; 7]), Err(GridError::Length { .. })));
        let mut v = vec![0.0; 8];
        v[3] = f64::NAN;
        assert!(matches!(GridFunction::new(1, 8, 1.0, v), Err(GridError::NonFinite(3))));
    }

    #[test]
    fn indicator_block_modular_is_value_at_one() {
        // N = 16 on [-8, 8): unit cells; one nonzero cell of measure 1.
        let mut v = vec![0.0; 16];
        v[5] = 1.0;
        let u = line(v, 8.0);
        let a = YoungFunction::<f64>::exp();
        assert_eq!(u.modular(&a), a.eval(1.0));
        assert_eq!(u.zeros_like().modular(&a), 0.0);
        assert_eq!(u.zeros_like().luxemburg_norm(&a), 0.0);
    }

    #[test]
    fn indicator_norm_is_reciprocal_inverse() {
        let mut v = vec![0.0; 16];
        v[5] = 1.0;
        let u = line(v, 8.0);
        for a in [YoungFunction::power(1.5).unwrap(), YoungFunction::exp(), YoungFunction::power_log(2.0, 1.0).unwrap()] {
            let expect = 1.0 / a.inverse(1.0);
            assert!((u.luxemburg_norm(&a) / expect - 1.0).abs() < 1e-11);
        }
        let g = YoungFunction::linf_gauge(2.0).unwrap();
        assert!((u.luxemburg_norm(&g) - 0.5).abs() < 1e-11);
    }

    #[test]
    fn gaussian_square_modular() {
        let u = GridFunction::from_fn(1, 4096, 8.0, |x: &[f64]| (-x[0] * x[0]).exp()).unwrap();
        let m = u.modular(&YoungFunction::power(2.0).unwrap());
        assert!((m - (std::f64::consts::PI / 2.0).sqrt()).abs() < 1e-6);
    }

    #[test]
    fn certified_bracket() {
        let u = GridFunction::from_fn(1, 64, 4.0, |x: &[f64]| (x[0]).sin() + 0.3).unwrap();
        let a = YoungFunction::power_log(2.0, 1.0).unwrap();
        let lam = u.luxemburg_norm(&a);
        let s = u.samples();
        assert!(s.modular(&a, lam) <= 1.0);
        assert!(s.modular(&a, lam * (1.0 - 1e-9)) > 1.0);
    }

    #[test]
    fn rearrangement_example() {
        let u = GridFunction::new(1, 8, 4.0, vec![3.0, 1.0, 2.0, 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        let r = u.rearrangement();
        assert_eq!(r.values(), &[3.0, 2.0, 1.0]);
        assert_eq!(r.measures(), &[1.0, 1.0, 1.0]);
        assert_eq!(r.double_star(2.0).unwrap(), 2.5);
        assert_eq!(r.double_star(3.0).unwrap(), 2.0);
        assert!(r.double_star(0.0).is_err());
        let a = YoungFunction::power_log(1.5, 0.5).unwrap();
        assert_eq!(r.luxemburg_norm(&a), u.luxemburg_norm(&a));
    }

    #[test]
    fn lorentz_examples() {
        let r = StepRearrangement::from_steps([(2.0, 1.0), (1.0, 1.0)]);
        let expect = 2.0 * 2.0 * 1.0 + 1.0 * 2.0 * (2f64.sqrt() - 1.0);
        assert!((r.lorentz_p1(2.0).unwrap() - expect).abs() < 1e-14);
        // Indicator of measure 3: p m^{1/p}.
        let r = StepRearrangement::from_steps([(1.0, 3.0)]);
        assert!((r.lorentz_p1(1.5).unwrap() - 1.5 * 3f64.powf(1.0 / 1.5)).abs() < 1e-14);
    }

    #[test]
    fn translation_is_exact_permutation() {
        let mut v = vec![0.0; 32];
        v[10] = 1.0;
        v[11] = -2.0;
        let u = line(v, 8.0);
        let t = u.translated(&[5]).unwrap();
        assert_eq!(t.values()[15], 1.0);
        assert_eq!(t.values()[16], -2.0);
        assert!(u.translated(&[25]).is_err());
        let a = YoungFunction::power(1.5).unwrap();
        assert_eq!(t.luxemburg_norm(&a), u.luxemburg_norm(&a));
    }

    #[test]
    fn sequence_basics() {
        let s = RealSequence::new(-2, vec![1.0, -3.0, 2.0]).unwrap();
        assert_eq!(s.get(-1), -3.0);
        assert_eq!(s.get(5), 0.0);
        assert_eq!(s.l1_norm(), 6.0);
        let a = YoungFunction::power(2.0).unwrap();
        assert_eq!(s.modular(&a), 14.0);
        assert!((s.luxemburg_norm(&a) / 14f64.sqrt() - 1.0).abs() < 2e-12);
    }

    #[test]
    fn two_dimensional_layout() {
        let u = GridFunction::from_fn(2, 8, 4.0, |x: &[f64]| x[0] + 10.0 * x[1]).unwrap();
        // Node (i0, i1) = (1, 2) has x = (-3, -2).
        assert_eq!(u.values()[2 * 8 + 1], -3.0 - 20.0);
        assert_eq!(u.cell_measure(), 1.0);
    }
}
