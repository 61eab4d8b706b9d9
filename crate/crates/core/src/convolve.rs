//! Grid and sequence convolutions and the convolution inequalities checked on
//! them.
//!
//! Grid convolution is the convolution on the lattice `hZ^n` with Haar
//! measure `mu = h^n`, restricted back to the box. The exact-constant
//! inequalities therefore hold for it without discretization error.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::grid::{GridError, GridFunction, RealSequence, StepRearrangement};
use crate::scalar::{compensated_sum, Real};
use crate::target::SmoothnessParams;
use crate::young::YoungFunction;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConvolveError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("argument t must be positive, got {0}")]
    NonPositive(f64),
}

/// One side-by-side comparison `lhs <= rhs`; `margin = rhs - lhs`.
///
/// An infinite right-hand side yields a margin of `+inf`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvolutionReport {
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub context: BTreeMap<String, f64>,
}

impl ConvolutionReport {
    pub fn new(lhs: f64, rhs: f64) -> Self {
        let margin = if rhs.is_infinite() && rhs > 0.0 { f64::INFINITY } else { rhs - lhs };
        Self { lhs, rhs, margin, context: BTreeMap::new() }
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.context.insert(key.to_string(), value);
        self
    }

    /// `lhs <= rhs * (1 + rel)`.
    pub fn holds(&self, rel: f64) -> bool {
        self.margin >= -rel * self.rhs.abs() || self.margin.is_infinite() && self.margin > 0.0
    }

    /// `lhs / rhs`, `0` when both vanish.
    pub fn ratio(&self) -> f64 {
        if self.lhs == 0.0 {
            0.0
        } else {
            self.lhs / self.rhs
        }
    }
}

/// Both forms of a bound: Luxemburg norms and modulars.
#[derive(Debug, Clone, PartialEq)]
pub struct NormAndModular {
    pub norm: ConvolutionReport,
    pub modular: ConvolutionReport,
}

impl NormAndModular {
    pub fn holds(&self, rel: f64) -> bool {
        self.norm.holds(rel) && self.modular.holds(rel)
    }
}

/// `(u * v)(x_i) = mu sum_j u(x_i - y_j) v(y_j)` on the box, with `u` and `v`
/// zero outside it.
///
/// Products are summed in pairs `u(x-y)v(y) + u(y)v(x-y)` so that the result
/// is bitwise symmetric in `u` and `v`.
pub fn conv_grid<T: Real>(u: &GridFunction<T>, v: &GridFunction<T>) -> Result<GridFunction<T>, ConvolveError> {
    if !u.same_grid(v) {
        return Err(GridError::Mismatch.into());
    }
    let np = u.points();
    let center = np / 2;
    let mu = u.cell_measure();
    let (uv, vv) = (u.values(), v.values());
    let out = match u.n() {
        1 => (0..np)
            .map(|i| {
                let m = i + center;
                let first = m.saturating_sub(np - 1);
                let mut terms = Vec::new();
                let mut j = first;
                while 2 * j <= m {
                    let k = m - j;
                    if k < np {
                        terms.push(if j == k { uv[k] * vv[j] } else { uv[k] * vv[j] + uv[j] * vv[k] });
                    }
                    j += 1;
                }
                mu * terms.into_iter().fold(T::zero(), |a, b| a + b)
            })
            .collect(),
        _ => {
            let mut out = Vec::with_capacity(np * np);
            for i1 in 0..np {
                for i0 in 0..np {
                    let (m0, m1) = (i0 + center, i1 + center);
                    let mut acc = T::zero();
                    for j1 in m1.saturating_sub(np - 1)..np.min(m1 + 1) {
                        let k1 = m1 - j1;
                        if j1 > k1 {
                            break;
                        }
                        for j0 in m0.saturating_sub(np - 1)..np.min(m0 + 1) {
                            let k0 = m0 - j0;
                            if j1 == k1 && j0 > k0 {
                                break;
                            }
                            let (a, b) = (k1 * np + k0, j1 * np + j0);
                            acc = acc + if a == b { uv[a] * vv[b] } else { uv[a] * vv[b] + uv[b] * vv[a] };
                        }
                    }
                    out.push(mu * acc);
                }
            }
            out
        }
    };
    Ok(u.with_values(out)?)
}

/// `(a * b)_i = sum_l a_{i-l} b_l`.
pub fn conv_seq<T: Real>(a: &RealSequence<T>, b: &RealSequence<T>) -> RealSequence<T> {
    let (av, bv) = (a.values(), b.values());
    if av.is_empty() || bv.is_empty() {
        return RealSequence::new(a.offset() + b.offset(), Vec::new()).expect("empty sequence");
    }
    let mut out = vec![T::zero(); av.len() + bv.len() - 1];
    for (l, &y) in bv.iter().enumerate() {
        for (k, &x) in av.iter().enumerate() {
            out[k + l] = out[k + l] + x * y;
        }
    }
    RealSequence::new(a.offset() + b.offset(), out).expect("finite products")
}

/// Convolution with an `L^1` kernel: `||u*v||_A <= ||v||_1 ||u||_A` and
/// `int A(|u*v|) <= int A(||v||_1 |u|)`.
pub fn check_l1_bound<T: Real>(
    young: &YoungFunction<T>,
    u: &GridFunction<T>,
    v: &GridFunction<T>,
) -> Result<NormAndModular, ConvolveError> {
    let w = conv_grid(u, v)?;
    let v1 = v.l1_norm();
    let norm = ConvolutionReport::new(w.luxemburg_norm(young).to_f64_lossy(), (v1 * u.luxemburg_norm(young)).to_f64_lossy())
        .with("v_l1", v1.to_f64_lossy());
    let modular = ConvolutionReport::new(w.modular(young).to_f64_lossy(), u.scaled(v1).modular(young).to_f64_lossy());
    Ok(NormAndModular { norm, modular })
}

/// Discrete bound: `sum_i A(|(a*b)_i|) <= sum_l A(||a||_1 |b_l|)` and
/// `||a*b||_{l^A} <= ||a||_1 ||b||_{l^A}`.
pub fn check_discrete_bound<T: Real>(young: &YoungFunction<T>, a: &RealSequence<T>, b: &RealSequence<T>) -> NormAndModular {
    let c = conv_seq(a, b);
    let a1 = a.l1_norm();
    let modular = ConvolutionReport::new(c.modular(young).to_f64_lossy(), b.scaled(a1).modular(young).to_f64_lossy());
    let norm = ConvolutionReport::new(c.luxemburg_norm(young).to_f64_lossy(), (a1 * b.luxemburg_norm(young)).to_f64_lossy())
        .with("a_l1", a1.to_f64_lossy());
    NormAndModular { norm, modular }
}

/// `(mu sum |v|^p)^{1/p}`, computed with the maximum factored out.
pub fn lebesgue_norm<T: Real>(v: &GridFunction<T>, p: T) -> T {
    let m = v.sup_abs();
    if m == T::zero() {
        return T::zero();
    }
    let s = compensated_sum(v.values().iter().map(|x| (x.abs() / m).powf(p)));
    m * (s * v.cell_measure()).powf(T::one() / p)
}

/// Inputs shared by all sharp-bound checks for one `(A, n, sigma)`.
#[derive(Debug, Clone)]
pub struct SharpSetup<T> {
    pub young: YoungFunction<T>,
    pub target: YoungFunction<T>,
    pub params: SmoothnessParams<T>,
}

impl<T: Real> SharpSetup<T> {
    pub fn new(young: &YoungFunction<T>, params: SmoothnessParams<T>) -> Result<Self, crate::target::TargetError> {
        Ok(Self { young: young.clone(), target: crate::target::target(young, params)?, params })
    }

    /// Kernel exponent `n / (n - sigma)`.
    pub fn kernel_exponent(&self) -> T {
        T::one() / self.params.outer()
    }
}

/// `||u*v||_{A_{n/sigma}}` against `||v||_{n/(n-sigma)} ||u||_A`. The constant is
/// unknown, so the report's `ratio` is aggregated by callers.
pub fn check_sharp_bound<T: Real>(
    setup: &SharpSetup<T>,
    u: &GridFunction<T>,
    v: &GridFunction<T>,
) -> Result<ConvolutionReport, ConvolveError> {
    let w = conv_grid(u, v)?;
    let vp = lebesgue_norm(v, setup.kernel_exponent());
    let lhs = w.luxemburg_norm(&setup.target);
    let rhs = vp * u.luxemburg_norm(&setup.young);
    let report = ConvolutionReport::new(lhs.to_f64_lossy(), rhs.to_f64_lossy()).with("v_kernel_norm", vp.to_f64_lossy());
    let ratio = report.ratio();
    Ok(report.with("ratio", ratio))
}

/// Integral form with constant `c`:
/// `int A_{n/sigma}(|u*v| / (c ||v|| M^{sigma/n})) <= M`, `M = int A(|u|)`.
pub fn check_sharp_modular<T: Real>(
    setup: &SharpSetup<T>,
    u: &GridFunction<T>,
    v: &GridFunction<T>,
    c: T,
) -> Result<ConvolutionReport, ConvolveError> {
    let w = conv_grid(u, v)?;
    let m = u.modular(&setup.young);
    let vp = lebesgue_norm(v, setup.kernel_exponent());
    let n = T::from_usize_lossy(setup.params.n());
    let scale = c * vp * m.powf(setup.params.sigma() / n);
    let lhs = if scale > T::zero() { w.samples().modular(&setup.target, scale) } else { T::zero() };
    Ok(ConvolutionReport::new(lhs.to_f64_lossy(), m.to_f64_lossy()).with("c", c.to_f64_lossy()))
}

impl<T: Real> StepRearrangement<T> {
    /// `int_0^t u*`.
    pub fn integral_to(&self, t: T) -> T {
        let mut acc = T::zero();
        let mut start = T::zero();
        for (&v, &m) in self.values().iter().zip(self.measures()) {
            if t <= start {
                break;
            }
            let end = start + m;
            acc = acc + v * (end.min(t) - start);
            start = end;
        }
        acc
    }

    /// `int_t^inf u*(r) r^e dr` for `e` in `(-1, 0)`, exact on each step.
    pub fn weighted_tail(&self, t: T, e: T) -> T {
        let e1 = e + T::one();
        let mut terms = Vec::new();
        let mut start = T::zero();
        for (&v, &m) in self.values().iter().zip(self.measures()) {
            let end = start + m;
            if end > t {
                let a = start.max(t);
                terms.push(v * (end.powf(e1) - a.powf(e1)) / e1);
            }
            start = end;
        }
        compensated_sum(terms)
    }
}

/// O'Neil's bound with the kernel estimate `t^{(n-sigma)/n} v**(t) <= ||v||`
/// folded in:
/// `(u*v)**(t) <= ||v||_{n/(n-sigma)} (t^{(sigma-n)/n} int_0^t u* + int_t^inf u*(r) r^{(sigma-n)/n} dr)`.
pub fn oneil_check<T: Real>(
    u: &GridFunction<T>,
    v: &GridFunction<T>,
    params: SmoothnessParams<T>,
    t: T,
) -> Result<ConvolutionReport, ConvolveError> {
    if !(t > T::zero()) {
        return Err(ConvolveError::NonPositive(t.to_f64_lossy()));
    }
    let w = conv_grid(u, v)?;
    let lhs = w.rearrangement().double_star(t)?;
    let n = T::from_usize_lossy(params.n());
    let e = (params.sigma() - n) / n;
    let ur = u.rearrangement();
    let vp = lebesgue_norm(v, T::one() / params.outer());
    let rhs = vp * (t.powf(e) * ur.integral_to(t) + ur.weighted_tail(t, e));
    Ok(ConvolutionReport::new(lhs.to_f64_lossy(), rhs.to_f64_lossy()).with("t", t.to_f64_lossy()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(values: Vec<f64>) -> GridFunction<f64> {
        let n = values.len();
        // Half-width n/16 keeps the cell measure at 1/8, a power of two.
        GridFunction::new(1, n, n as f64 / 16.0, values).unwrap()
    }

    fn delta_like(u: &GridFunction<f64>) -> GridFunction<f64> {
        let mut v = vec![0.0; u.len()];
        let c = if u.n() == 1 { u.points() / 2 } else { (u.points() / 2) * u.points() + u.points() / 2 };
        v[c] = 1.0 / u.cell_measure();
        u.with_values(v).unwrap()
    }

    #[test]
    fn delta_reproduces_exactly() {
        let u = line((0..32).map(|i| ((i * 7) % 5) as f64 - 1.3).collect());
        let d = delta_like(&u);
        assert_eq!(conv_grid(&u, &d).unwrap(), u);
        let u2 = GridFunction::from_fn(2, 8, 0.5, |x: &[f64]| x[0] - 2.0 * x[1] * x[1]).unwrap();
        let d2 = delta_like(&u2);
        assert_eq!(conv_grid(&u2, &d2).unwrap(), u2);
    }

    #[test]
    fn commutes_bitwise() {
        let u = line((0..64).map(|i| (i as f64 * 0.37).sin()).collect());
        let v = line((0..64).map(|i| (i as f64 * 0.11).cos().powi(3)).collect());
        assert_eq!(conv_grid(&u, &v).unwrap(), conv_grid(&v, &u).unwrap());
        let u2 = GridFunction::from_fn(2, 8, 1.0, |x: &[f64]| (x[0] * 1.3 + x[1]).sin()).unwrap();
        let v2 = GridFunction::from_fn(2, 8, 1.0, |x: &[f64]| (x[0] - x[1] * 0.7).cos()).unwrap();
        assert_eq!(conv_grid(&u2, &v2).unwrap(), conv_grid(&v2, &u2).unwrap());
    }

    #[test]
    fn matches_naive_sum() {
        let u = GridFunction::from_fn(2, 8, 1.0, |x: &[f64]| (x[0] * 1.3 + x[1]).sin()).unwrap();
        let v = GridFunction::from_fn(2, 8, 1.0, |x: &[f64]| (x[0] - x[1] * 0.7).cos()).unwrap();
        let w = conv_grid(&u, &v).unwrap();
        let n = 8i64;
        for i1 in 0..n {
            for i0 in 0..n {
                let mut s = 0.0;
                for j1 in 0..n {
                    for j0 in 0..n {
                        let (k0, k1) = (i0 - j0 + n / 2, i1 - j1 + n / 2);
                        if (0..n).contains(&k0) && (0..n).contains(&k1) {
                            s += u.values()[(k1 * n + k0) as usize] * v.values()[(j1 * n + j0) as usize];
                        }
                    }
                }
                let got = w.values()[(i1 * n + i0) as usize];
                assert!((got - s * u.cell_measure()).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn mass_is_multiplicative_for_nonnegative_inputs() {
        // Supports near the center so nothing is truncated.
        let mut a = vec![0.0; 64];
        let mut b = vec![0.0; 64];
        for k in 0..8 {
            a[28 + k] = 1.0 + k as f64;
            b[30 + k] = 0.5 * k as f64 + 0.25;
        }
        let (u, v) = (line(a), line(b));
        let w = conv_grid(&u, &v).unwrap();
        assert!((w.l1_norm() / (u.l1_norm() * v.l1_norm()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sequence_examples() {
        let a = RealSequence::new(0, vec![1.0, 1.0]).unwrap();
        let b = RealSequence::new(0, vec![1.0, 2.0, 3.0]).unwrap();
        assert_eq!(conv_seq(&a, &b).values(), &[1.0, 3.0, 5.0, 3.0]);
        let d = RealSequence::new(0, vec![1.0]).unwrap();
        assert_eq!(conv_seq(&d, &b), b);
        let shifted = conv_seq(&RealSequence::new(3, vec![2.0]).unwrap(), &RealSequence::new(-1, vec![1.0, 4.0]).unwrap());
        assert_eq!(shifted.offset(), 2);
        assert_eq!(shifted.values(), &[2.0, 8.0]);
    }

    #[test]
    fn discrete_delta_is_equality() {
        let a = RealSequence::new(0, vec![1.0]).unwrap();
        let b = RealSequence::new(-2, vec![0.5, -1.5, 2.0]).unwrap();
        let r = check_discrete_bound(&YoungFunction::exp(), &a, &b);
        assert_eq!(r.modular.lhs, r.modular.rhs);
        assert_eq!(r.norm.lhs, r.norm.rhs);
        let zero = RealSequence::new(0, vec![0.0, 0.0]).unwrap();
        let r = check_discrete_bound(&YoungFunction::exp(), &zero, &b);
        assert_eq!((r.modular.lhs, r.modular.rhs), (0.0, 0.0));
    }

    #[test]
    fn l1_delta_is_equality() {
        let u = line((0..32).map(|i| ((i * 3) % 7) as f64 * 0.1).collect());
        let d = delta_like(&u);
        let r = check_l1_bound(&YoungFunction::power(1.5).unwrap(), &u, &d).unwrap();
        assert!(r.norm.margin.abs() <= 1e-9 * r.norm.rhs);
        assert!(r.holds(1e-12));
    }

    #[test]
    fn oneil_delta_kernel() {
        let u = line((0..32).map(|i| ((i * 5) % 9) as f64 * 0.3).collect());
        let d = delta_like(&u);
        let p = SmoothnessParams::new(1, 0.4).unwrap();
        for t in [0.1, 1.0, 10.0] {
            let r = oneil_check(&u, &d, p, t).unwrap();
            assert_eq!(r.lhs, u.rearrangement().double_star(t).unwrap());
            assert!(r.holds(0.0));
        }
        assert!(oneil_check(&u, &d, p, 0.0).is_err());
    }

    #[test]
    fn oneil_indicator_closed_form() {
        // u = indicator of measure m (8 cells of 1/8), t < m:
        // rhs / ||v|| = t^e t + (m^{e+1} - t^{e+1}) / (e+1).
        let mut a = vec![0.0; 32];
        for k in 12..20 {
            a[k] = 1.0;
        }
        let u = line(a);
        let d = delta_like(&u);
        let p = SmoothnessParams::new(1, 0.4).unwrap();
        let (t, m, e) = (0.5f64, 1.0f64, -0.6f64);
        let r = oneil_check(&u, &d, p, t).unwrap();
        let vnorm = lebesgue_norm(&d, 1.0 / 0.6);
        let expect = vnorm * (t.powf(e) * t + (m.powf(e + 1.0) - t.powf(e + 1.0)) / (e + 1.0));
        assert!((r.rhs / expect - 1.0).abs() < 1e-13);
        assert_eq!(r.lhs, 1.0);
    }

    #[test]
    fn zero_u_gives_zero_sharp_ratio() {
        let setup = SharpSetup::new(&YoungFunction::power(2.0).unwrap(), SmoothnessParams::new(1, 0.4).unwrap()).unwrap();
        let z = line(vec![0.0; 16]);
        let v = line((0..16).map(|i| i as f64).collect());
        let r = check_sharp_bound(&setup, &z, &v).unwrap();
        assert_eq!(r.ratio(), 0.0);
    }
}
