//! Young functions: evaluation, density, generalized inverse, conjugation,
//! domination and scaling.
//!
//! A Young function is stored as a [`Shape`] times a positive weight. Analytic
//! shapes are evaluated in closed form. Tabulated shapes carry a density that
//! is linear between knots (possibly with jumps at knots), so the function
//! itself is piecewise quadratic and its Young conjugate is again exactly
//! tabulated: the graph of the conjugate density is the graph of the density
//! with the axes swapped.

use thiserror::Error;

use crate::numeric::bisect_last_true;
use crate::scalar::{pow, Real};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum YoungError {
    #[error("invalid parameter {name} = {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("negative argument {0} passed to a Young function")]
    NegativeArgument(f64),
    #[error("function is not convex near t = {0}")]
    NotConvex(f64),
    #[error("density is not non-decreasing near t = {0}")]
    DensityNotMonotone(f64),
    #[error("function does not vanish at zero")]
    NonzeroAtOrigin,
    #[error("function is identically zero or identically infinite on (0, inf)")]
    Trivial,
    #[error("invalid table: {0}")]
    InvalidTable(String),
    #[error("splice at {0} is not admissible: {1}")]
    InvalidSplice(f64, &'static str),
}

/// Representation class of a Young function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Analytic,
    Tabulated,
    Spliced,
}

/// Regime over which a domination relation is required.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Global,
    NearInfinity,
    NearZero,
}

/// A domination certificate `B(t) <= A(c t)`; `threshold` is the sampled `t0`
/// delimiting the regime (absent for global domination).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domination<T> {
    pub c: T,
    pub threshold: Option<T>,
}

/// Unweighted profile of a Young function.
#[derive(Debug, Clone, PartialEq)]
pub enum Shape<T> {
    /// `t^p`.
    Power {
        p: T,
    },
    /// `t^p ln(e + t)^alpha`, behaving like `t^p (log t)^alpha` near infinity.
    PowerLog {
        p: T,
        alpha: T,
    },
    /// `t^p ln(e + 1/t)^alpha`, behaving like `t^p (log 1/t)^alpha` near zero.
    PowerLogZero {
        p: T,
        alpha: T,
    },
    /// `e^t - 1 - t`.
    Exp,
    /// `0` on `[0, b]`, `+inf` beyond.
    LinfGauge {
        b: T,
    },
    Tabulated(Tabulated<T>),
    Spliced(Box<Splice<T>>),
}

/// Near-zero and near-infinity branches joined at `at`. The near-infinity
/// branch is multiplied by `correction` so the two agree at the splice.
#[derive(Debug, Clone, PartialEq)]
pub struct Splice<T> {
    pub near_zero: YoungFunction<T>,
    pub near_infinity: YoungFunction<T>,
    pub at: T,
    pub correction: T,
}

/// Young function with a piecewise-linear, non-decreasing density.
///
/// Segment `k` covers `(knots[k], knots[k+1]]`, where the last segment ends at
/// `domain_end` (beyond which the function is `+inf`) or is unbounded. On a
/// bounded segment the density runs linearly from `lo[k]` to `hi[k]`; on an
/// unbounded last segment it starts at `lo[k]` with slope `tail_slope`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tabulated<T> {
    knots: Vec<T>,
    lo: Vec<T>,
    hi: Vec<T>,
    tail_slope: T,
    domain_end: Option<T>,
    values: Vec<T>,
}

/// Density graph vertex used while swapping axes.
#[derive(Debug, Clone, Copy)]
struct Vertex<T> {
    x: T,
    y: T,
}

/// How the density graph leaves its last vertex.
#[derive(Debug, Clone, Copy)]
enum Ray<T> {
    /// Vertical: the density becomes infinite (finite domain end).
    Vertical,
    /// Slope `dy/dx`, possibly zero.
    Sloped(T),
}

impl<T: Real> Tabulated<T> {
    /// Builds a table from bounded segments plus an optional unbounded tail.
    ///
    /// `knots[0]` must be zero and knots strictly increasing. With
    /// `domain_end = Some(d)` every segment is bounded (the last one by `d`)
    /// and `hi` has one entry per knot; otherwise the last segment is
    /// unbounded, `hi` has one entry fewer than `knots`, and `tail_slope`
    /// continues the density.
    pub fn new(knots: Vec<T>, lo: Vec<T>, mut hi: Vec<T>, tail_slope: T, domain_end: Option<T>) -> Result<Self, YoungError> {
        let k = knots.len();
        if k == 0 || lo.len() != k {
            return Err(YoungError::InvalidTable("knots and densities differ in length".into()));
        }
        match domain_end {
            Some(d) => {
                if hi.len() != k {
                    return Err(YoungError::InvalidTable("bounded table needs one hi per knot".into()));
                }
                if !(d > knots[k - 1]) || !d.is_finite() {
                    return Err(YoungError::InvalidTable("domain end must exceed the last knot".into()));
                }
            }
            None => {
                if hi.len() + 1 != k {
                    return Err(YoungError::InvalidTable("unbounded table needs one hi per bounded segment".into()));
                }
                if !(tail_slope >= T::zero()) || !tail_slope.is_finite() {
                    return Err(YoungError::InvalidTable("tail slope must be finite and non-negative".into()));
                }
                // Placeholder for the unbounded segment keeps indexing uniform.
                hi.push(lo[k - 1]);
            }
        }
        if knots[0] != T::zero() {
            return Err(YoungError::InvalidTable("first knot must be 0".into()));
        }
        for j in 1..k {
            if !(knots[j] > knots[j - 1]) || !knots[j].is_finite() {
                return Err(YoungError::InvalidTable(format!("knots not strictly increasing at {j}")));
            }
        }
        for j in 0..k {
            if !(lo[j] >= T::zero() && lo[j].is_finite() && hi[j].is_finite()) {
                return Err(YoungError::InvalidTable(format!("density not finite and non-negative at {j}")));
            }
            if hi[j] < lo[j] || (j + 1 < k && lo[j + 1] < hi[j]) {
                return Err(YoungError::DensityNotMonotone(knots[j].to_f64_lossy()));
            }
        }
        let mut values = Vec::with_capacity(k + 1);
        values.push(T::zero());
        for j in 0..k {
            let right = if j + 1 < k { Some(knots[j + 1]) } else { domain_end };
            if let Some(r) = right {
                let width = r - knots[j];
                values.push(values[j] + (lo[j] + hi[j]) / T::lit(2.0) * width);
            }
        }
        let table = Self { knots, lo, hi, tail_slope, domain_end, values };
        if table.is_trivial() {
            return Err(YoungError::Trivial);
        }
        Ok(table)
    }

    /// Piecewise-constant density `a_k` on `(knots[k], knots[k+1]]`, constant
    /// extension of the last value, optional finite domain end.
    pub fn from_step_density(knots: Vec<T>, density: Vec<T>, domain_end: Option<T>) -> Result<Self, YoungError> {
        let k = knots.len();
        let hi = match domain_end {
            Some(_) => density.clone(),
            None => density[..k.saturating_sub(1)].to_vec(),
        };
        Self::new(knots, density, hi, T::zero(), domain_end)
    }

    fn is_trivial(&self) -> bool {
        let last = self.knots.len() - 1;
        let all_zero = self.lo.iter().chain(self.hi.iter()).all(|&v| v == T::zero());
        match self.domain_end {
            // Zero density up to a finite end is a gauge: nontrivial.
            Some(_) => false,
            None => all_zero && self.tail_slope == T::zero() && self.lo[last] == T::zero(),
        }
    }

    pub fn knots(&self) -> &[T] {
        &self.knots
    }

    pub fn domain_end(&self) -> Option<T> {
        self.domain_end
    }

    fn segment(&self, t: T) -> usize {
        // Segment k covers (knots[k], knots[k+1]]; t = 0 belongs to segment 0.
        let idx = self.knots.partition_point(|&x| x < t);
        idx.saturating_sub(1)
    }

    fn slope(&self, k: usize) -> T {
        match self.right_end(k) {
            Some(r) => (self.hi[k] - self.lo[k]) / (r - self.knots[k]),
            None => self.tail_slope,
        }
    }

    fn right_end(&self, k: usize) -> Option<T> {
        if k + 1 < self.knots.len() {
            Some(self.knots[k + 1])
        } else {
            self.domain_end
        }
    }

    pub fn eval(&self, t: T) -> T {
        if let Some(d) = self.domain_end {
            if t > d {
                return T::infinity();
            }
        }
        let k = self.segment(t);
        let x = t - self.knots[k];
        self.values[k] + self.lo[k] * x + self.slope(k) * x * x / T::lit(2.0)
    }

    pub fn density(&self, t: T) -> T {
        if t <= T::zero() {
            return T::zero();
        }
        if let Some(d) = self.domain_end {
            if t > d {
                return T::infinity();
            }
        }
        let k = self.segment(t);
        self.lo[k] + self.slope(k) * (t - self.knots[k])
    }

    fn density_right(&self, t: T) -> T {
        if let Some(d) = self.domain_end {
            if t >= d {
                return T::infinity();
            }
        }
        let k = self.knots.partition_point(|&x| x <= t).saturating_sub(1);
        self.lo[k] + self.slope(k) * (t - self.knots[k])
    }

    /// `sup { t >= 0 : A(t) <= r }`.
    pub fn inverse(&self, r: T) -> T {
        let nk = self.knots.len();
        // Last knot whose value does not exceed r.
        let j = self.values[..nk].partition_point(|&v| v <= r);
        let k = j.saturating_sub(1);
        let c = r - self.values[k];
        let lo = self.lo[k];
        let half_slope = self.slope(k) / T::lit(2.0);
        let x = if half_slope == T::zero() {
            if lo == T::zero() {
                T::infinity()
            } else {
                c / lo
            }
        } else {
            T::lit(2.0) * c / (lo + (lo * lo + T::lit(4.0) * half_slope * c).sqrt())
        };
        let t = self.knots[k] + x;
        match self.right_end(k) {
            Some(end) => t.min(end),
            None => t,
        }
    }

    fn vertices(&self) -> (Vec<Vertex<T>>, Ray<T>) {
        let mut v = vec![Vertex { x: T::zero(), y: T::zero() }];
        let k = self.knots.len();
        for j in 0..k {
            v.push(Vertex { x: self.knots[j], y: self.lo[j] });
            if let Some(r) = self.right_end(j) {
                v.push(Vertex { x: r, y: self.hi[j] });
            }
        }
        let ray = match self.domain_end {
            Some(_) => Ray::Vertical,
            None => Ray::Sloped(self.tail_slope),
        };
        (v, ray)
    }

    fn from_vertices(v: &[Vertex<T>], ray: Ray<T>) -> Result<Self, YoungError> {
        let mut knots = Vec::new();
        let mut lo = Vec::new();
        let mut hi = Vec::new();
        for w in v.windows(2) {
            let (p, q) = (w[0], w[1]);
            if q.x > p.x {
                knots.push(p.x);
                lo.push(p.y);
                hi.push(q.y);
            }
        }
        let last = *v.last().expect("non-empty vertex list");
        match ray {
            Ray::Vertical => {
                if knots.is_empty() {
                    return Err(YoungError::Trivial);
                }
                Self::new(knots, lo, hi, T::zero(), Some(last.x))
            }
            Ray::Sloped(slope) => {
                knots.push(last.x);
                lo.push(last.y);
                Self::new(knots, lo, hi, slope, None)
            }
        }
    }

    /// Exact Young conjugate.
    pub fn conjugate(&self) -> Result<Self, YoungError> {
        let (v, ray) = self.vertices();
        let swapped: Vec<Vertex<T>> = v.iter().map(|p| Vertex { x: p.y, y: p.x }).collect();
        let ray = match ray {
            Ray::Vertical => Ray::Sloped(T::zero()),
            Ray::Sloped(s) if s == T::zero() => Ray::Vertical,
            Ray::Sloped(s) => Ray::Sloped(T::one() / s),
        };
        Self::from_vertices(&swapped, ray)
    }

    fn scaled(&self, w: T) -> Self {
        let mut out = self.clone();
        out.lo.iter_mut().for_each(|x| *x = *x * w);
        out.hi.iter_mut().for_each(|x| *x = *x * w);
        out.values.iter_mut().for_each(|x| *x = *x * w);
        out.tail_slope = out.tail_slope * w;
        out
    }
}

/// A Young function: `weight * shape(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct YoungFunction<T> {
    shape: Shape<T>,
    weight: T,
}

/// Branch accepted by [`YoungFunction::spliced`]; convexity is only required
/// on the side of the splice where the branch is used.
#[derive(Debug, Clone, PartialEq)]
pub enum Branch<T> {
    Power(T),
    PowerLog(T, T),
    PowerLogZero(T, T),
    Exp,
    Young(YoungFunction<T>),
}

const E: f64 = std::f64::consts::E;

/// Relative error allowed per segment when an analytic density is tabulated.
pub const TABLE_REL_TOL: f64 = 1e-7;
const TABLE_MAX_DEPTH: u32 = 24;
const TABLE_MAX_KNOTS: usize = 1 << 21;

fn check_param<T: Real>(name: &'static str, value: T, ok: bool) -> Result<(), YoungError> {
    if ok && value.is_finite() {
        Ok(())
    } else {
        Err(YoungError::InvalidParameter { name, value: value.to_f64_lossy() })
    }
}

impl<T: Real> YoungFunction<T> {
    pub(crate) fn from_shape(shape: Shape<T>) -> Self {
        Self { shape, weight: T::one() }
    }

    /// `t^p`, `p >= 1`.
    pub fn power(p: T) -> Result<Self, YoungError> {
        check_param("p", p, p >= T::one())?;
        Ok(Self::from_shape(Shape::Power { p }))
    }

    /// `t^p ln(e + t)^alpha`; requires `p > 1`, or `p = 1` and `alpha >= 0`.
    pub fn power_log(p: T, alpha: T) -> Result<Self, YoungError> {
        check_param("p", p, p >= T::one())?;
        check_param("alpha", alpha, p > T::one() || alpha >= T::zero())?;
        let f = Self::from_shape(Shape::PowerLog { p, alpha });
        f.validate()?;
        Ok(f)
    }

    /// `t^p ln(e + 1/t)^alpha`.
    pub fn power_log_zero(p: T, alpha: T) -> Result<Self, YoungError> {
        check_param("p", p, p >= T::one())?;
        check_param("alpha", alpha, true)?;
        let f = Self::from_shape(Shape::PowerLogZero { p, alpha });
        f.validate()?;
        Ok(f)
    }

    /// `e^t - 1 - t`.
    pub fn exp() -> Self {
        Self::from_shape(Shape::Exp)
    }

    /// `0` on `[0, b]` and `+inf` beyond.
    pub fn linf_gauge(b: T) -> Result<Self, YoungError> {
        check_param("b", b, b > T::zero())?;
        Ok(Self::from_shape(Shape::LinfGauge { b }))
    }

    pub fn tabulated(table: Tabulated<T>) -> Self {
        Self::from_shape(Shape::Tabulated(table))
    }

    /// Near-zero branch on `[0, at]`, near-infinity branch beyond, the latter
    /// rescaled so the function is continuous at `at`.
    pub fn spliced(near_zero: Branch<T>, near_infinity: Branch<T>, at: T) -> Result<Self, YoungError> {
        check_param("at", at, at > T::zero())?;
        let zero = near_zero.into_young();
        let inf = near_infinity.into_young();
        let z = zero.eval(at);
        let i = inf.eval(at);
        if !(z > T::zero() && z.is_finite()) {
            return Err(YoungError::InvalidSplice(at.to_f64_lossy(), "near-zero branch must be positive and finite at the splice"));
        }
        if !(i > T::zero() && i.is_finite()) {
            return Err(YoungError::InvalidSplice(at.to_f64_lossy(), "near-infinity branch must be positive and finite at the splice"));
        }
        let correction = z / i;
        let left = zero.density(at);
        let right = correction * inf.density_right(at);
        if right < left * (T::one() - T::tolerance(1e-12)) {
            return Err(YoungError::InvalidSplice(at.to_f64_lossy(), "density drops across the splice"));
        }
        let f = Self::from_shape(Shape::Spliced(Box::new(Splice { near_zero: zero, near_infinity: inf, at, correction })));
        f.validate()?;
        Ok(f)
    }

    pub fn shape(&self) -> &Shape<T> {
        &self.shape
    }

    pub fn weight(&self) -> T {
        self.weight
    }

    pub fn kind(&self) -> Kind {
        match self.shape {
            Shape::Tabulated(_) => Kind::Tabulated,
            Shape::Spliced(_) => Kind::Spliced,
            _ => Kind::Analytic,
        }
    }

    /// `A(t)` as an extended real.
    ///
    /// # Panics
    /// If `t` is negative or NaN; use [`YoungFunction::try_eval`] to get an
    /// error instead.
    #[inline]
    pub fn eval(&self, t: T) -> T {
        assert!(t >= T::zero(), "Young function evaluated at negative or NaN argument");
        let v = self.shape_eval(t);
        if v == T::zero() {
            v
        } else {
            self.weight * v
        }
    }

    pub fn try_eval(&self, t: T) -> Result<T, YoungError> {
        if t >= T::zero() {
            Ok(self.eval(t))
        } else {
            Err(YoungError::NegativeArgument(t.to_f64_lossy()))
        }
    }

    fn shape_eval(&self, t: T) -> T {
        match &self.shape {
            Shape::Power { p } => pow(t, *p),
            Shape::PowerLog { p, alpha } => pow(t, *p) * (T::lit(E) + t).ln().powf(*alpha),
            Shape::PowerLogZero { p, alpha } => {
                if t == T::zero() {
                    T::zero()
                } else {
                    pow(t, *p) * (T::lit(E) + t.recip()).ln().powf(*alpha)
                }
            }
            Shape::Exp => exp_minus_linear(t),
            Shape::LinfGauge { b } => {
                if t <= *b {
                    T::zero()
                } else {
                    T::infinity()
                }
            }
            Shape::Tabulated(table) => table.eval(t),
            Shape::Spliced(s) => {
                if t <= s.at {
                    s.near_zero.eval(t)
                } else {
                    s.correction * s.near_infinity.eval(t)
                }
            }
        }
    }

    /// Left-continuous density `a` with `A(t) = int_0^t a`; `a(0) = 0`.
    pub fn density(&self, t: T) -> T {
        if t <= T::zero() {
            return T::zero();
        }
        self.weight * self.shape_density(t, false)
    }

    /// Right limit of the density at `t`.
    pub fn density_right(&self, t: T) -> T {
        self.weight * self.shape_density(t, true)
    }

    fn shape_density(&self, t: T, right: bool) -> T {
        match &self.shape {
            Shape::Power { p } => {
                if *p == T::one() {
                    T::one()
                } else {
                    *p * pow(t, *p - T::one())
                }
            }
            Shape::PowerLog { p, alpha } => {
                let l = (T::lit(E) + t).ln();
                *p * pow(t, *p - T::one()) * l.powf(*alpha) + *alpha * pow(t, *p) * l.powf(*alpha - T::one()) / (T::lit(E) + t)
            }
            Shape::PowerLogZero { p, alpha } => {
                if t == T::zero() {
                    return if *p > T::one() { T::zero() } else { T::infinity() };
                }
                let m = (T::lit(E) + t.recip()).ln();
                pow(t, *p - T::one()) * m.powf(*alpha - T::one()) * (*p * m - *alpha / (T::lit(E) * t + T::one()))
            }
            Shape::Exp => t.exp_m1(),
            Shape::LinfGauge { b } => {
                if t < *b || (!right && t == *b) {
                    T::zero()
                } else {
                    T::infinity()
                }
            }
            Shape::Tabulated(table) => {
                if right {
                    table.density_right(t)
                } else {
                    table.density(t)
                }
            }
            Shape::Spliced(s) => {
                if t < s.at || (!right && t == s.at) {
                    s.near_zero.shape_density_weighted(t, right)
                } else {
                    s.correction * s.near_infinity.shape_density_weighted(t, right)
                }
            }
        }
    }

    fn shape_density_weighted(&self, t: T, right: bool) -> T {
        if !right && t <= T::zero() {
            return T::zero();
        }
        self.weight * self.shape_density(t, right)
    }

    /// Largest argument at which `A` is finite, if any.
    pub fn domain_end(&self) -> Option<T> {
        match &self.shape {
            Shape::LinfGauge { b } => Some(*b),
            Shape::Tabulated(table) => table.domain_end(),
            Shape::Spliced(s) => match s.near_zero.domain_end() {
                Some(d) if d < s.at => Some(d),
                _ => s.near_infinity.domain_end().filter(|&d| d >= s.at),
            },
            _ => None,
        }
    }

    /// Right-continuous generalized inverse `sup { t >= 0 : A(t) <= r }`.
    pub fn inverse(&self, r: T) -> T {
        assert!(r >= T::zero(), "inverse evaluated at negative or NaN level");
        if r.is_infinite() {
            return self.domain_end().unwrap_or(T::infinity());
        }
        let level = r / self.weight;
        match &self.shape {
            Shape::Power { p } => pow(level, T::one() / *p),
            Shape::LinfGauge { b } => *b,
            Shape::Tabulated(table) => table.inverse(level),
            Shape::Spliced(s) => {
                if self.eval(s.at) <= r {
                    let inner = s.near_infinity.inverse(r / s.correction);
                    inner.max(s.at)
                } else {
                    s.near_zero.inverse(r).min(s.at)
                }
            }
            _ => self.inverse_by_bisection(r),
        }
    }

    fn inverse_by_bisection(&self, r: T) -> T {
        let mut hi = T::one();
        let mut guard = 0;
        while self.eval(hi) <= r {
            hi = hi * T::lit(2.0);
            guard += 1;
            if guard > 2100 || hi.is_infinite() {
                return T::infinity();
            }
        }
        let mut lo = T::zero();
        if self.eval(lo) > r {
            return T::zero();
        }
        // Tighten the lower bracket geometrically when it is far below hi.
        let mut probe = hi / T::lit(2.0);
        while probe > T::zero() && self.eval(probe) > r {
            hi = probe;
            probe = probe / T::lit(2.0);
        }
        if probe > T::zero() {
            lo = probe;
        }
        bisect_last_true(|t| self.eval(t) <= r, lo, hi, 1e-15)
    }

    /// `A_M(t) = A(t) / M`.
    pub fn scale(&self, m: T) -> Result<Self, YoungError> {
        check_param("M", m, m > T::zero())?;
        Ok(Self { shape: self.shape.clone(), weight: self.weight / m })
    }

    /// Exact tabulated form where one exists (powers 1 and 2, gauges, tables);
    /// otherwise the density is sampled on a log grid, refined until linear
    /// interpolation is accurate, and linearly interpolated.
    pub fn to_tabulated(&self) -> Result<Tabulated<T>, YoungError> {
        let w = self.weight;
        match &self.shape {
            Shape::Tabulated(table) => return Ok(table.scaled(w)),
            Shape::LinfGauge { b } => {
                return Tabulated::new(vec![T::zero()], vec![T::zero()], vec![T::zero()], T::zero(), Some(*b));
            }
            Shape::Power { p } if *p == T::one() => {
                return Tabulated::new(vec![T::zero()], vec![w], vec![], T::zero(), None);
            }
            Shape::Power { p } if *p == T::lit(2.0) => {
                return Tabulated::new(vec![T::zero()], vec![T::zero()], vec![], T::lit(2.0) * w, None);
            }
            _ => {}
        }
        self.sample_density()
    }

    fn sample_density(&self) -> Result<Tabulated<T>, YoungError> {
        const PER_DECADE: i32 = 64;
        let cap = T::lit(1e300);
        let mut points: Vec<T> = vec![T::zero()];
        for j in (-8 * PER_DECADE)..=(8 * PER_DECADE) {
            let t = T::lit(10f64.powf(j as f64 / PER_DECADE as f64));
            if self.eval(t) > cap || !self.density(t).is_finite() {
                break;
            }
            points.push(t);
        }
        if let Shape::Spliced(s) = &self.shape {
            if s.at < *points.last().unwrap() {
                points.push(s.at);
            }
        }
        if let Some(d) = self.domain_end() {
            points.retain(|&t| t < d);
            points.push(d);
        }
        points.sort_by(|a, b| a.partial_cmp(b).unwrap());
        points.dedup();
        if points.len() < 3 {
            return Err(YoungError::Trivial);
        }
        let points = self.refine_knots(&points);
        let bounded = self.domain_end().is_some();
        let nseg = points.len() - 1;
        let knots: Vec<T> = points[..nseg].to_vec();
        let mut lo = Vec::with_capacity(nseg);
        let mut hi = Vec::with_capacity(nseg);
        for k in 0..nseg {
            let a = if k == 0 { self.density_right(T::min_positive_value()) } else { self.density_right(points[k]) };
            let b = self.density(points[k + 1]).max(a);
            let a = if k > 0 { a.max(*hi.last().unwrap()) } else { a };
            lo.push(a);
            hi.push(b.max(a));
        }
        if bounded {
            let d = *points.last().unwrap();
            Tabulated::new(knots, lo, hi, T::zero(), Some(d))
        } else {
            let last = *points.last().unwrap();
            let prev = points[points.len() - 2];
            let end = self.density(last).max(*hi.last().unwrap());
            let before = self.density(prev);
            let slope = ((end - before) / (last - prev)).max(T::zero());
            let mut knots = knots;
            knots.push(last);
            lo.push(end);
            Tabulated::new(knots, lo, hi, slope, None)
        }
    }

    /// Bisects segments until linear interpolation of the density integrates
    /// every segment to [`TABLE_REL_TOL`] of its exact increment, or to rounding
    /// level in low precision. The
    /// trapezoid error on `[t0, t1]` is `h (a0 + a1 - 2 a_mid) / 3` up to
    /// higher order, so the test needs densities only.
    fn refine_knots(&self, points: &[T]) -> Vec<T> {
        // Below a few ulps the bend test only sees rounding.
        let tol = T::lit(1.5) * T::lit(TABLE_REL_TOL).max(T::lit(64.0) * T::epsilon());
        let mut out = Vec::with_capacity(points.len());
        for w in points.windows(2) {
            out.push(w[0]);
            if w[0] == T::zero() {
                continue;
            }
            let mut stack = vec![(w[0], w[1], 0u32)];
            while let Some((t0, t1, depth)) = stack.pop() {
                let mid = T::lit(0.5) * (t0 + t1);
                let (a0, a1, am) = (self.density_right(t0), self.density(t1), self.density(mid));
                let bend = (a0 + a1 - am - am).abs();
                let split = mid > t0 && mid < t1 && depth < TABLE_MAX_DEPTH && out.len() < TABLE_MAX_KNOTS;
                if !split || !(bend > tol * (a0 + a1)) {
                    if t1 != w[1] {
                        out.push(t1);
                    }
                    continue;
                }
                // Right half first so that knots leave the stack in order.
                stack.push((mid, t1, depth + 1));
                stack.push((t0, mid, depth + 1));
            }
        }
        out.push(*points.last().unwrap());
        out
    }

    /// Young conjugate `sup_r { r t - A(r) }` as a tabulated function built
    /// from the generalized inverse of the (tabulated) density.
    pub fn conjugate(&self) -> Result<Self, YoungError> {
        Ok(Self::tabulated(self.to_tabulated()?.conjugate()?))
    }

    /// Checks `A(0) = 0`, nontriviality, monotone density and midpoint
    /// convexity on a log-spaced sample of `[1e-6, 1e6]` plus any splice or
    /// domain end.
    pub fn validate(&self) -> Result<(), YoungError> {
        if self.eval(T::zero()) != T::zero() {
            return Err(YoungError::NonzeroAtOrigin);
        }
        let mut ts: Vec<T> = (-96..=96).map(|j| T::lit(10f64.powf(j as f64 / 16.0))).collect();
        if let Shape::Spliced(s) = &self.shape {
            for f in [0.9, 0.99, 1.0, 1.01, 1.1] {
                ts.push(s.at * T::lit(f));
            }
        }
        if let Some(d) = self.domain_end() {
            ts.push(d);
        }
        ts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let values: Vec<T> = ts.iter().map(|&t| self.eval(t)).collect();
        if values.iter().all(|v| *v == T::zero()) || values.iter().all(|v| v.is_infinite()) {
            return Err(YoungError::Trivial);
        }
        let slack = T::tolerance(1e-10);
        for w in ts.windows(2) {
            let (a, b) = (self.density(w[0]), self.density(w[1]));
            if a.is_finite() && a > b * (T::one() + slack) + T::min_positive_value() {
                return Err(YoungError::DensityNotMonotone(w[0].to_f64_lossy()));
            }
        }
        for i in 0..ts.len() {
            for span in [1usize, 2, 8] {
                let j = i + span;
                if j >= ts.len() {
                    continue;
                }
                let (va, vb) = (values[i], values[j]);
                if !(va.is_finite() && vb.is_finite()) {
                    continue;
                }
                let mid = self.eval((ts[i] + ts[j]) / T::lit(2.0));
                let chord = (va + vb) / T::lit(2.0);
                if mid > chord * (T::one() + slack) + T::min_positive_value() {
                    return Err(YoungError::NotConvex(ts[i].to_f64_lossy()));
                }
            }
        }
        Ok(())
    }
}

impl<T: Real> Branch<T> {
    fn into_young(self) -> YoungFunction<T> {
        match self {
            Branch::Power(p) => YoungFunction::from_shape(Shape::Power { p }),
            Branch::PowerLog(p, alpha) => YoungFunction::from_shape(Shape::PowerLog { p, alpha }),
            Branch::PowerLogZero(p, alpha) => YoungFunction::from_shape(Shape::PowerLogZero { p, alpha }),
            Branch::Exp => YoungFunction::exp(),
            Branch::Young(f) => f,
        }
    }
}

/// `e^t - 1 - t` without cancellation near zero.
fn exp_minus_linear<T: Real>(t: T) -> T {
    if t < T::lit(1e-2) {
        // Taylor series through t^9; truncation error below 1e-20 relative.
        let mut term = t * t / T::lit(2.0);
        let mut sum = term;
        for k in 3..=9 {
            term = term * t / T::from_usize_lossy(k);
            sum = sum + term;
        }
        sum
    } else {
        t.exp_m1() - t
    }
}

/// Candidate constants `10^(k/64)` for `k` in `[-384, 384]`.
const DOMINATION_STEPS_PER_DECADE: i32 = 64;
const DOMINATION_DECADES: i32 = 6;
/// Sampled arguments `10^(j/16)` for `j` in `[-128, 128]`.
const SAMPLE_PER_DECADE: i32 = 16;
const SAMPLE_DECADES: i32 = 8;
/// Regime windows: near infinity means `t >= 1e2`, near zero `t <= 1e-2`.
const NEAR_INFINITY_FROM: f64 = 1e2;
const NEAR_ZERO_UP_TO: f64 = 1e-2;

/// Does `B(t) <= A(c t)` hold at every sample of `ts`?
pub fn domination_holds<T: Real>(a: &YoungFunction<T>, b: &YoungFunction<T>, c: T, ts: &[T]) -> bool {
    let slack = T::one() + T::tolerance(1e-12);
    ts.iter().all(|&t| {
        let lhs = b.eval(t);
        let rhs = a.eval(c * t);
        lhs <= rhs * slack || lhs == T::zero()
    })
}

/// Smallest grid constant `c <= 1e6` with `B(t) <= A(c t)` on the regime's
/// sampled range, or `None` when no grid constant works.
pub fn dominates<T: Real>(a: &YoungFunction<T>, b: &YoungFunction<T>, regime: Regime) -> Option<Domination<T>> {
    let all: Vec<T> = (-SAMPLE_DECADES * SAMPLE_PER_DECADE..=SAMPLE_DECADES * SAMPLE_PER_DECADE)
        .map(|j| T::lit(10f64.powf(j as f64 / SAMPLE_PER_DECADE as f64)))
        .collect();
    let window: Vec<T> = match regime {
        Regime::Global => all.clone(),
        Regime::NearInfinity => all.iter().copied().filter(|&t| t >= T::lit(NEAR_INFINITY_FROM)).collect(),
        Regime::NearZero => all.iter().copied().filter(|&t| t <= T::lit(NEAR_ZERO_UP_TO)).collect(),
    };
    let span = DOMINATION_DECADES * DOMINATION_STEPS_PER_DECADE;
    for k in -span..=span {
        let c = if k == 0 { T::one() } else { T::lit(10f64.powf(k as f64 / DOMINATION_STEPS_PER_DECADE as f64)) };
        if !domination_holds(a, b, c, &window) {
            continue;
        }
        let threshold = match regime {
            Regime::Global => None,
            Regime::NearInfinity => {
                // Smallest sample t0 such that the relation holds on [t0, max].
                let mut t0 = window[0];
                for i in (0..all.len()).rev() {
                    if domination_holds(a, b, c, &all[i..i + 1]) {
                        t0 = all[i];
                    } else {
                        break;
                    }
                }
                Some(t0)
            }
            Regime::NearZero => {
                let mut t0 = *window.last().unwrap();
                for t in all.iter() {
                    if domination_holds(a, b, c, std::slice::from_ref(t)) {
                        t0 = *t;
                    } else {
                        break;
                    }
                }
                Some(t0)
            }
        };
        return Some(Domination { c, threshold });
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn log_grid(lo: i32, hi: i32, per: i32) -> Vec<f64> {
        (lo * per..=hi * per).map(|j| 10f64.powf(j as f64 / per as f64)).collect()
    }

    fn rel(a: f64, b: f64) -> f64 {
        if a == b {
            0.0
        } else {
            (a - b).abs() / a.abs().max(b.abs())
        }
    }

    #[test]
    fn power_two_at_three() {
        assert_eq!(YoungFunction::power(2.0).unwrap().eval(3.0), 9.0);
    }

    #[test]
    fn gauge_values() {
        let g = YoungFunction::linf_gauge(1.0).unwrap();
        assert_eq!(g.eval(0.5), 0.0);
        assert_eq!(g.eval(1.0), 0.0);
        assert_eq!(g.eval(1.5), f64::INFINITY);
    }

    #[test]
    fn negative_argument_rejected() {
        let a = YoungFunction::power(2.0).unwrap();
        assert!(matches!(a.try_eval(-1.0), Err(YoungError::NegativeArgument(_))));
        assert!(std::panic::catch_unwind(|| a.eval(-1.0)).is_err());
    }

    #[test]
    fn power_below_one_rejected() {
        assert!(YoungFunction::power(0.5).is_err());
    }

    #[test]
    fn spliced_is_continuous_at_splice() {
        // p = 2, alpha = 1 near infinity; p0 = 1.5, alpha0 = 0 near zero.
        let a = YoungFunction::spliced(Branch::Power(1.5), Branch::PowerLog(2.0, 1.0), 1.0).unwrap();
        let s = match a.shape() {
            Shape::Spliced(s) => s.clone(),
            _ => unreachable!(),
        };
        let left = 1.0f64.powf(1.5);
        let right = s.correction * 1.0f64.powf(2.0) * (E + 1.0).ln();
        assert!((left - right).abs() <= 1e-12);
        let below = a.eval(1.0 - 1e-9);
        let above = a.eval(1.0 + 1e-9);
        assert!((below - above).abs() < 1e-8);
        assert_eq!(a.eval(1.0), left);
    }

    #[test]
    fn splice_with_dropping_density_is_rejected() {
        // t^3 near zero, t^1 near infinity: density drops from 3 to 1 at t = 1.
        let err = YoungFunction::spliced(Branch::Power(3.0), Branch::Power(1.0), 1.0).unwrap_err();
        assert!(matches!(err, YoungError::InvalidSplice(..)));
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(YoungFunction::power(2.0).unwrap().inverse(4.0), 2.0);
        let g = YoungFunction::linf_gauge(1.0).unwrap();
        for r in [1e-3, 1.0, 7.0] {
            assert_eq!(g.inverse(r), 1.0);
        }
    }

    #[test]
    fn tabulated_inverse_matches_bisection_on_eval() {
        // Step density a(t_k) = e^{t_k} - 1 on knots of [0, 8].
        let knots: Vec<f64> = (0..=64).map(|k| k as f64 * 0.125).collect();
        let dens: Vec<f64> = knots.iter().map(|&t| (t + 0.125f64).exp_m1()).collect();
        let table = Tabulated::from_step_density(knots, dens, None).unwrap();
        let a = YoungFunction::tabulated(table);
        let r = 5.0;
        let oracle = bisect_last_true(|t: f64| a.eval(t) <= r, 0.0, 8.0, 1e-15);
        assert!((a.inverse(r) - oracle).abs() <= 1e-10);
    }

    #[test]
    fn exp_conjugate_matches_closed_form() {
        let c = YoungFunction::<f64>::exp().conjugate().unwrap();
        for t in log_grid(-2, 4, 5) {
            let exact = (1.0 + t) * t.ln_1p() - t;
            assert!(rel(c.eval(t), exact) < 1e-6, "t = {t}: {} vs {exact}", c.eval(t));
        }
    }

    #[test]
    fn half_square_is_self_conjugate() {
        let a = YoungFunction::power(2.0).unwrap().scale(2.0).unwrap();
        let c = a.conjugate().unwrap();
        for t in log_grid(-6, 6, 8) {
            assert!(rel(c.eval(t), t * t / 2.0) <= 1e-9, "t = {t}");
        }
    }

    #[test]
    fn identity_conjugates_to_unit_gauge() {
        let c = YoungFunction::power(1.0).unwrap().conjugate().unwrap();
        assert_eq!(c.eval(0.5), 0.0);
        assert_eq!(c.eval(1.0), 0.0);
        assert_eq!(c.eval(1.0 + 1e-12), f64::INFINITY);
        assert_eq!(c.domain_end(), Some(1.0));
    }

    #[test]
    fn gauge_conjugates_to_linear() {
        let c = YoungFunction::linf_gauge(3.0).unwrap().conjugate().unwrap();
        for t in [0.1, 1.0, 10.0] {
            assert!(rel(c.eval(t), 3.0 * t) < 1e-15);
        }
    }

    #[test]
    fn conjugate_of_power_matches_legendre_transform() {
        // sup_r (rt - r^3) = 2 (t/3)^{3/2}
        let a = YoungFunction::power(3.0).unwrap();
        let c = a.conjugate().unwrap();
        for t in log_grid(-2, 3, 4) {
            let exact = 2.0 * (t / 3.0).powf(1.5);
            assert!(rel(c.eval(t), exact) < 1e-3, "t = {t}");
        }
    }

    #[test]
    fn scaling_divides_values_and_density() {
        let a = YoungFunction::exp();
        let b = a.scale(4.0).unwrap();
        for t in [0.01, 0.5, 3.0] {
            assert!(rel(b.eval(t), a.eval(t) / 4.0) < 1e-15);
            assert!(rel(b.density(t), a.density(t) / 4.0) < 1e-15);
        }
        let one = a.scale(1.0).unwrap();
        assert_eq!(one.eval(2.0), a.eval(2.0));
    }

    #[test]
    fn domination_identity_is_one() {
        let a = YoungFunction::power(1.0).unwrap();
        let d = dominates(&a, &a, Regime::Global).unwrap();
        assert_eq!(d.c, 1.0);
    }

    #[test]
    fn square_dominates_linear_near_infinity() {
        let a = YoungFunction::power(2.0).unwrap();
        let b = YoungFunction::power(1.0).unwrap();
        let d = dominates(&a, &b, Regime::NearInfinity).unwrap();
        assert!(d.c <= 1.0);
        // Direct scan oracle: t <= (c t)^2 for t >= 1 / c^2.
        let from = 1.0 / (d.c * d.c);
        for t in log_grid(0, 8, 16).into_iter().map(|t| t * from) {
            assert!(t <= (d.c * t).powi(2) * (1.0 + 1e-12));
        }
        // The certificate with c = 1 and t0 = 1 is accepted as well.
        assert!(domination_holds(&a, &b, 1.0, &log_grid(0, 8, 16)));
        // Linear does not dominate square globally.
        assert!(dominates(&b, &a, Regime::Global).is_none());
    }

    #[test]
    fn log_factor_dominates_square_near_infinity() {
        let a = YoungFunction::power_log(2.0, 1.0).unwrap();
        let b = YoungFunction::power(2.0).unwrap();
        let d = dominates(&a, &b, Regime::NearInfinity).unwrap();
        assert!(d.c <= 1.0);
        assert!(domination_holds(&a, &b, 1.0, &log_grid(0, 8, 16)));
    }

    #[test]
    fn analytic_families_validate() {
        YoungFunction::power(1.0).unwrap().validate().unwrap();
        YoungFunction::power(3.5).unwrap().validate().unwrap();
        YoungFunction::<f64>::exp().validate().unwrap();
        YoungFunction::power_log(1.0, 2.0).unwrap().validate().unwrap();
        YoungFunction::linf_gauge(2.0).unwrap().validate().unwrap();
    }

    #[test]
    fn table_validation_rejects_decreasing_density() {
        let r = Tabulated::from_step_density(vec![0.0, 1.0], vec![2.0, 1.0], None);
        assert!(matches!(r, Err(YoungError::DensityNotMonotone(_))));
        let r = Tabulated::<f64>::from_step_density(vec![0.0, 1.0], vec![0.0, 0.0], None);
        assert!(matches!(r, Err(YoungError::Trivial)));
    }

    #[test]
    fn f32_power_family_works() {
        let a = YoungFunction::<f32>::power(2.0).unwrap();
        assert_eq!(a.eval(3.0), 9.0);
        assert!((a.inverse(4.0) - 2.0).abs() < 1e-6);
    }
}
