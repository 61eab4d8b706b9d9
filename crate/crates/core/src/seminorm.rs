//! Fractional seminorms on grids: Gagliardo, Besov and oscillation forms,
//! finite-difference gradients, full space norms, and a Hardy-type
//! inequality check.
//!
//! Every seminorm is the Luxemburg norm of a finite weighted sample set
//! `{(value, weight)}` collected once from the grid. The modular for a trial
//! `lambda` is `sum weight * A(value / lambda)`, evaluated in the canonical
//! sample order of [`WeightedSamples`]. Translating `u` by whole cells
//! permutes the samples, so the result is bitwise invariant.

use thiserror::Error;

use crate::convolve::ConvolutionReport;
use crate::grid::{GridError, GridFunction, WeightedSamples};
use crate::numeric::{adaptive, gauss_legendre_nodes, sum_panels, PanelSeries};
use crate::scalar::{compensated_sum, Real};
use crate::young::YoungFunction;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SeminormError {
    #[error("smoothness must be positive, finite and not an integer, got {0}")]
    Order(f64),
    #[error("this seminorm needs 0 < s < 1, got {0}")]
    NotFractional(f64),
    #[error("order {order} differences need more than {points} points per axis")]
    GridTooSmall { order: usize, points: usize },
    #[error("invalid step function: {0}")]
    Profile(&'static str),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Spectral(#[from] crate::lp::LpError),
}

/// Smoothness `s > 0` with `s` not an integer, split as `[s] + {s}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FractionalOrder<T> {
    s: T,
    int_part: usize,
}

impl<T: Real> FractionalOrder<T> {
    pub fn new(s: T) -> Result<Self, SeminormError> {
        if !(s > T::zero() && s.is_finite()) || s.fract() == T::zero() {
            return Err(SeminormError::Order(s.to_f64_lossy()));
        }
        let int_part = s.floor().to_usize().ok_or(SeminormError::Order(s.to_f64_lossy()))?;
        Ok(Self { s, int_part })
    }

    pub fn value(&self) -> T {
        self.s
    }

    /// `[s]`.
    pub fn int_part(&self) -> usize {
        self.int_part
    }

    /// `{s} = s - [s]`, in `(0, 1)`.
    pub fn frac_part(&self) -> T {
        self.s - T::from_usize_lossy(self.int_part)
    }

    fn require_below_one(&self) -> Result<(), SeminormError> {
        if self.int_part == 0 {
            Ok(())
        } else {
            Err(SeminormError::NotFractional(self.s.to_f64_lossy()))
        }
    }
}

/// How a grid function is continued beyond the cells it is trusted on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Boundary {
    /// The function is zero outside the box, so the grid models a compactly
    /// supported function on the whole space. Whole-cell translations that
    /// keep the support inside the box leave every seminorm unchanged.
    #[default]
    Zero,
    /// Only cells of the box are used: difference pairs and balls are
    /// clipped to it, and order-`k` gradients are kept on cells at least `k`
    /// cells from the edge. Constants (and polynomials, for oscillations)
    /// have seminorm zero.
    Interior,
}

/// What was summed to produce a [`SeminormResult`].
#[derive(Debug, Clone, PartialEq)]
pub struct Discretization<T> {
    pub boundary: Boundary,
    /// Number of distinct offsets, shifts or radii.
    pub scales: usize,
    /// Smallest and largest offset length, shift or radius.
    pub min_scale: T,
    pub max_scale: T,
    /// Nonzero terms in the modular.
    pub terms: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeminormResult<T> {
    pub value: T,
    /// The modular at `value`; at most one, and close to one unless it jumps.
    pub modular_at_value: T,
    pub record: Discretization<T>,
}

/// All order-`k` centered difference quotients of a grid function.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient<T> {
    /// Components indexed by axis sequences `(j_1, ..., j_k)` in lexicographic
    /// order, `n^k` in total.
    pub components: Vec<GridFunction<T>>,
    pub order: usize,
    /// Cells within this distance of the edge are not valid (set to zero).
    pub margin: usize,
}

impl<T: Real> Gradient<T> {
    /// Pointwise Euclidean magnitude over the components.
    pub fn magnitude(&self) -> GridFunction<T> {
        let first = &self.components[0];
        let values = (0..first.len())
            .map(|i| self.components.iter().map(|c| c.values()[i] * c.values()[i]).fold(T::zero(), |a, b| a + b).sqrt())
            .collect();
        first.with_values(values).expect("same grid")
    }
}

/// `D_j u(x) = (u(x + e_j) - u(x - e_j)) / 2h`, applied `k` times over every
/// axis sequence. `u` is taken as zero outside the box; with
/// [`Boundary::Interior`] the cells whose stencil leaves the box are zeroed
/// and reported through `margin`.
pub fn grad_k<T: Real>(u: &GridFunction<T>, k: usize, boundary: Boundary) -> Result<Gradient<T>, SeminormError> {
    if 2 * k >= u.points() {
        return Err(SeminormError::GridTooSmall { order: k, points: u.points() });
    }
    let mut comps = vec![u.clone()];
    for _ in 0..k {
        let mut next = Vec::with_capacity(comps.len() * u.n());
        for c in &comps {
            for axis in 0..u.n() {
                next.push(centered_difference(c, axis));
            }
        }
        comps = next;
    }
    let margin = match boundary {
        Boundary::Zero => 0,
        Boundary::Interior => k,
    };
    if margin > 0 {
        let np = u.points();
        for c in comps.iter_mut() {
            let values = c
                .values()
                .iter()
                .enumerate()
                .map(|(flat, &v)| {
                    let idx = c.index(flat);
                    let inside = (0..u.n()).all(|a| idx[a] >= margin && idx[a] < np - margin);
                    if inside {
                        v
                    } else {
                        T::zero()
                    }
                })
                .collect();
            *c = c.with_values(values)?;
        }
    }
    Ok(Gradient { components: comps, order: k, margin })
}

fn centered_difference<T: Real>(u: &GridFunction<T>, axis: usize) -> GridFunction<T> {
    let np = u.points();
    let stride = if axis == 0 { 1 } else { np };
    let inv = T::one() / (T::lit(2.0) * u.cell_width());
    let v = u.values();
    let values = (0..v.len())
        .map(|flat| {
            let i = u.index(flat)[axis];
            let fwd = if i + 1 < np { v[flat + stride] } else { T::zero() };
            let back = if i > 0 { v[flat - stride] } else { T::zero() };
            (fwd - back) * inv
        })
        .collect();
    u.with_values(values).expect("same grid")
}

/// Read-only view of one or more components on a common grid, with the
/// continuation rule of a [`Boundary`].
struct Field<'a, T> {
    comps: Vec<&'a [T]>,
    n: usize,
    points: i64,
    lo: i64,
    hi: i64,
    zero_outside: bool,
    cell: T,
    mu: T,
}

impl<'a, T: Real> Field<'a, T> {
    fn new(comps: &'a [GridFunction<T>], boundary: Boundary, margin: usize) -> Self {
        let first = &comps[0];
        let margin = match boundary {
            Boundary::Zero => 0,
            Boundary::Interior => margin as i64,
        };
        Self {
            comps: comps.iter().map(|c| c.values()).collect(),
            n: first.n(),
            points: first.points() as i64,
            lo: margin,
            hi: first.points() as i64 - margin,
            zero_outside: boundary == Boundary::Zero,
            cell: first.cell_width(),
            mu: first.cell_measure(),
        }
    }

    fn get(&self, comp: usize, x: [i64; 2]) -> Option<T> {
        let inside = (0..self.n).all(|a| x[a] >= self.lo && x[a] < self.hi);
        if inside {
            Some(self.comps[comp][(x[0] + x[1] * self.points) as usize])
        } else if self.zero_outside {
            Some(T::zero())
        } else {
            None
        }
    }

    /// Per-axis index range of base points `x` for which `x` or `x + h` is a
    /// trusted cell.
    fn base_range(&self, h: [i64; 2], axis: usize) -> std::ops::Range<i64> {
        if axis >= self.n {
            return 0..1;
        }
        (self.lo - h[axis].max(0))..(self.hi - h[axis].min(0))
    }

    /// Nonzero `|f(x + h) - f(x)|` over every component and base point, in
    /// index order.
    fn differences(&self, h: [i64; 2], mut push: impl FnMut(T)) {
        for x1 in self.base_range(h, 1) {
            for x0 in self.base_range(h, 0) {
                for c in 0..self.comps.len() {
                    let (Some(a), Some(b)) = (self.get(c, [x0, x1]), self.get(c, [x0 + h[0], x1 + h[1]])) else {
                        continue;
                    };
                    let d = (b - a).abs();
                    if d != T::zero() {
                        push(d);
                    }
                }
            }
        }
    }
}

impl<'a, T: Real> Field<'a, T> {
    /// Nonzero `|f(y)|` over every component and cell of the box.
    fn magnitudes(&self) -> Vec<T> {
        self.comps.iter().flat_map(|c| c.iter().map(|v| v.abs())).filter(|v| *v != T::zero()).collect()
    }
}

/// Far-field quadrature in `sigma = s ln(r / R)` runs over `[0, FAR_SIGMA]`
/// in panels of `FAR_PANEL`; the dropped rest is below `e^{-FAR_SIGMA} A(x)`
/// by convexity.
const FAR_SIGMA: f64 = 36.0;
const FAR_PANEL: f64 = 4.0;

/// `(t, w)` with `sum w g(t) ~ int_0^FAR_SIGMA g(sigma) dsigma`, applied as
/// `g(sigma) = A(x e^{-sigma})`: the nodes are returned as factors
/// `e^{-sigma}`.
fn radial_rule<T: Real>() -> Vec<(T, T)> {
    let panels = (FAR_SIGMA / FAR_PANEL).round() as usize;
    (0..panels)
        .flat_map(|k| {
            let a = T::lit(FAR_PANEL * k as f64);
            gauss_legendre_nodes(a, a + T::lit(FAR_PANEL))
        })
        .map(|(sigma, w)| ((-sigma).exp(), w))
        .collect()
}

/// Gagliardo terms from offsets outside the near square `|h_j| < N`, for
/// [`Boundary::Zero`]. There `f(x)` and `f(x + h)` never overlap, so an
/// ordered pair only sees `|f(y)|` at the one cell `y` in the box, once as
/// `x` and once as `x + h`. The lattice sum over those offsets becomes the
/// integral `mu^{-1} int dz` over the region outside the square of half
/// side `R = (N - 1/2) h`, which is
/// `2 mu sum_y int A(|f(y)| / (lambda |z|^s)) |z|^{-n} dz`.
fn gagliardo_far_field<T: Real>(s: T, field: &Field<'_, T>, samples: &mut Vec<(T, T)>) {
    let values = field.magnitudes();
    let radius = (T::from_i64(field.points).unwrap() - T::lit(0.5)) * field.cell;
    let two_mu = T::lit(2.0) * field.mu;
    let radial = radial_rule::<T>();
    // int_{r > rho} A(c r^{-s}) dr / r = s^{-1} int_0^inf A(c rho^{-s} e^{-sigma}) dsigma
    let mut shell = |rho: T, angle: T| {
        let scale = rho.powf(s).recip();
        for &(f, w) in &radial {
            let weight = two_mu * angle * w / s;
            for &v in &values {
                samples.push((v * scale * f, weight));
            }
        }
    };
    if field.n == 1 {
        shell(radius, T::lit(2.0));
    } else {
        shell(radius * T::SQRT_2(), T::lit(2.0) * T::PI());
        // R < r < R sqrt 2: the part of the circle outside the square spans
        // the angle 8 arccos(R / r). With r = R / cos(theta),
        // dr / r = tan(theta) dtheta.
        let scale = radius.powf(s).recip();
        for (theta, w) in gauss_legendre_nodes(T::zero(), T::FRAC_PI_4()) {
            let weight = two_mu * T::lit(8.0) * theta * theta.tan() * w;
            let factor = scale * theta.cos().powf(s);
            for &v in &values {
                samples.push((v * factor, weight));
            }
        }
    }
}

/// Largest relative remainder of the far-field dyadic shifts, bounded
/// through `A(2^{-s} x) <= 2^{-s} A(x)`.
const FAR_DYADIC_TOL: f64 = 1e-16;
const FAR_MAX_SHIFTS: usize = 4000;

/// Besov terms from dyadic shifts longer than the box, for
/// [`Boundary::Zero`]: every axis and shift `rho` contributes
/// `2 ln 2 mu sum_y A(|f(y)| / (lambda rho^s))`.
fn besov_far_field<T: Real>(s: T, field: &Field<'_, T>, first_shift: i64, samples: &mut Vec<(T, T)>) {
    let values = field.magnitudes();
    let ratio = T::lit(2.0).powf(-s);
    let shifts = if ratio < T::one() {
        let bound = (T::lit(FAR_DYADIC_TOL) * (T::one() - ratio)).ln() / ratio.ln();
        bound.ceil().to_usize().unwrap_or(FAR_MAX_SHIFTS).min(FAR_MAX_SHIFTS)
    } else {
        FAR_MAX_SHIFTS
    };
    let weight = T::lit(2.0) * T::from_usize_lossy(field.n) * T::LN_2() * field.mu;
    let mut scale = (T::from_i64(first_shift).unwrap() * field.cell).powf(s).recip();
    for _ in 0..shifts {
        for &v in &values {
            samples.push((v * scale, weight));
        }
        scale = scale * ratio;
    }
}

fn finish<T: Real>(young: &YoungFunction<T>, samples: Vec<(T, T)>, boundary: Boundary, scales: &[T]) -> SeminormResult<T> {
    let terms = samples.len();
    let samples = WeightedSamples::new(samples);
    let value = samples.luxemburg(young);
    let modular_at_value = if value > T::zero() && value.is_finite() { samples.modular(young, value) } else { T::zero() };
    let (min_scale, max_scale) = scales.iter().fold((T::infinity(), T::zero()), |(lo, hi), &r| (lo.min(r), hi.max(r)));
    SeminormResult { value, modular_at_value, record: Discretization { boundary, scales: scales.len(), min_scale, max_scale, terms } }
}

/// Offsets `h != 0` with `|h_j| < N`, one of each `{h, -h}` pair.
fn half_offsets(n: usize, points: usize) -> Vec<[i64; 2]> {
    let m = points as i64 - 1;
    let mut out = Vec::new();
    if n == 1 {
        out.extend((1..=m).map(|h| [h, 0]));
    } else {
        for h1 in 0..=m {
            for h0 in -m..=m {
                if h1 > 0 || h0 > 0 {
                    out.push([h0, h1]);
                }
            }
        }
    }
    out
}

/// Gagliardo samples of the stacked components at fractional order `s`.
///
/// The double integral over `x != y` becomes a sum over grid offsets `h`:
/// each ordered pair contributes `A(|f(x+h) - f(x)| / (lambda |h|^s))` with
/// weight `mu^2 / |h|^n`, and the pairs `h`, `-h` are folded together.
/// Offsets with `|h_j| < N` are summed exactly; in [`Boundary::Zero`] the
/// longer ones, where the function and its shift no longer overlap, are
/// added as an integral (see [`gagliardo_far_field`]).
fn gagliardo_collect<T: Real>(s: T, comps: &[GridFunction<T>], boundary: Boundary, margin: usize) -> (Vec<(T, T)>, Vec<T>) {
    let field = Field::new(comps, boundary, margin);
    let nt = T::from_usize_lossy(field.n);
    let mut samples = Vec::new();
    let mut lengths = Vec::new();
    for h in half_offsets(field.n, field.points as usize) {
        let len = T::from_i64(h[0] * h[0] + h[1] * h[1]).unwrap().sqrt() * field.cell;
        let scale = len.powf(s);
        let weight = T::lit(2.0) * field.mu * field.mu / len.powf(nt);
        lengths.push(len);
        field.differences(h, |d| samples.push((d / scale, weight)));
    }
    if boundary == Boundary::Zero {
        gagliardo_far_field(s, &field, &mut samples);
    }
    (samples, lengths)
}

fn gagliardo_components<T: Real>(
    young: &YoungFunction<T>,
    s: T,
    comps: &[GridFunction<T>],
    boundary: Boundary,
    margin: usize,
) -> SeminormResult<T> {
    let (samples, lengths) = gagliardo_collect(s, comps, boundary, margin);
    finish(young, samples, boundary, &lengths)
}

/// The weighted difference quotients behind [`gagliardo_higher`]; their
/// modular at `lambda` is the Gagliardo modular of `grad^{[s]} u`.
pub fn gagliardo_samples<T: Real>(
    s: FractionalOrder<T>,
    u: &GridFunction<T>,
    boundary: Boundary,
) -> Result<WeightedSamples<T>, SeminormError> {
    let grad = grad_k(u, s.int_part(), boundary)?;
    let (samples, _) = gagliardo_collect(s.frac_part(), &grad.components, boundary, grad.margin);
    Ok(WeightedSamples::new(samples))
}

/// `|u|_{s,A}` for `0 < s < 1`: the Luxemburg norm of the Gagliardo double
/// sum over grid offsets, including the far field in [`Boundary::Zero`].
pub fn gagliardo<T: Real>(
    young: &YoungFunction<T>,
    s: FractionalOrder<T>,
    u: &GridFunction<T>,
    boundary: Boundary,
) -> Result<SeminormResult<T>, SeminormError> {
    s.require_below_one()?;
    Ok(gagliardo_components(young, s.value(), std::slice::from_ref(u), boundary, 0))
}

/// `|grad^{[s]} u|_{{s},A}`: the Gagliardo seminorm at order `{s}` of all
/// order-`[s]` gradient components, with their modulars added before the
/// infimum over `lambda`. For `s < 1` this is [`gagliardo`].
pub fn gagliardo_higher<T: Real>(
    young: &YoungFunction<T>,
    s: FractionalOrder<T>,
    u: &GridFunction<T>,
    boundary: Boundary,
) -> Result<SeminormResult<T>, SeminormError> {
    let grad = grad_k(u, s.int_part(), boundary)?;
    Ok(gagliardo_components(young, s.frac_part(), &grad.components, boundary, grad.margin))
}

fn besov_collect<T: Real>(s: T, comps: &[GridFunction<T>], boundary: Boundary, margin: usize) -> (Vec<(T, T)>, Vec<T>) {
    let field = Field::new(comps, boundary, margin);
    let weight = T::LN_2() * field.mu;
    let mut samples = Vec::new();
    let mut radii = Vec::new();
    let mut shift = 1i64;
    while shift <= field.points {
        let rho = T::from_i64(shift).unwrap() * field.cell;
        let scale = rho.powf(s);
        radii.push(rho);
        for axis in 0..field.n {
            let mut h = [0, 0];
            h[axis] = shift;
            field.differences(h, |d| samples.push((d / scale, weight)));
        }
        shift *= 2;
    }
    if boundary == Boundary::Zero {
        besov_far_field(s, &field, shift, &mut samples);
    }
    (samples, radii)
}

fn besov_components<T: Real>(
    young: &YoungFunction<T>,
    s: T,
    comps: &[GridFunction<T>],
    boundary: Boundary,
    margin: usize,
) -> SeminormResult<T> {
    let (samples, radii) = besov_collect(s, comps, boundary, margin);
    finish(young, samples, boundary, &radii)
}

/// The weighted samples behind [`besov_higher`].
pub fn besov_samples<T: Real>(s: FractionalOrder<T>, u: &GridFunction<T>, boundary: Boundary) -> Result<WeightedSamples<T>, SeminormError> {
    let grad = grad_k(u, s.int_part(), boundary)?;
    let (samples, _) = besov_collect(s.frac_part(), &grad.components, boundary, grad.margin);
    Ok(WeightedSamples::new(samples))
}

/// Besov seminorm for `0 < s < 1`:
/// `sum_j int_0^inf int A(|u(x + rho e_j) - u(x)| / (lambda rho^s)) dx drho/rho`
/// with `rho = 2^k h` from one cell up, each dyadic shell weighted by
/// `ln 2`. Shifts are one-sided, as in the definition. With
/// [`Boundary::Zero`] the shells go on past the box until their remainder is
/// negligible; with [`Boundary::Interior`] they stop at the box width.
pub fn besov<T: Real>(
    young: &YoungFunction<T>,
    s: FractionalOrder<T>,
    u: &GridFunction<T>,
    boundary: Boundary,
) -> Result<SeminormResult<T>, SeminormError> {
    s.require_below_one()?;
    Ok(besov_components(young, s.value(), std::slice::from_ref(u), boundary, 0))
}

/// Besov seminorm of `grad^{[s]} u` at order `{s}`.
pub fn besov_higher<T: Real>(
    young: &YoungFunction<T>,
    s: FractionalOrder<T>,
    u: &GridFunction<T>,
    boundary: Boundary,
) -> Result<SeminormResult<T>, SeminormError> {
    let grad = grad_k(u, s.int_part(), boundary)?;
    Ok(besov_components(young, s.frac_part(), &grad.components, boundary, grad.margin))
}

/// Exponents `(a, b)` of the monomials `t0^a t1^b` of degree at most `d`.
fn monomials(n: usize, d: usize) -> Vec<(i32, i32)> {
    let mut out = Vec::new();
    for total in 0..=d as i32 {
        if n == 1 {
            out.push((total, 0));
        } else {
            for b in 0..=total {
                out.push((total - b, b));
            }
        }
    }
    out
}

/// Orthonormal basis (columns, as rows of length `points.len()`) of the
/// polynomials of degree `<= d` restricted to `points`, by modified
/// Gram-Schmidt; dependent columns are dropped.
fn polynomial_basis<T: Real>(points: &[[T; 2]], n: usize, d: usize) -> Vec<Vec<T>> {
    let mut basis: Vec<Vec<T>> = Vec::new();
    let drop_tol = T::tolerance(1e-10);
    for (a, b) in monomials(n, d) {
        let mut col: Vec<T> = points.iter().map(|p| p[0].powi(a) * p[1].powi(b)).collect();
        let norm0 = col.iter().map(|&v| v * v).fold(T::zero(), |x, y| x + y).sqrt();
        for q in &basis {
            let dot = col.iter().zip(q).map(|(&c, &e)| c * e).fold(T::zero(), |x, y| x + y);
            col.iter_mut().zip(q).for_each(|(c, &e)| *c = *c - dot * e);
        }
        let norm = col.iter().map(|&v| v * v).fold(T::zero(), |x, y| x + y).sqrt();
        if norm > drop_tol * norm0 && norm > T::zero() {
            col.iter_mut().for_each(|c| *c = *c / norm);
            basis.push(col);
        }
    }
    basis
}

/// Mean absolute residual of the least-squares polynomial fit. Residuals at
/// rounding level relative to the data are treated as zero, so that exact
/// polynomials have zero oscillation.
fn fit_residual<T: Real>(values: &[T], basis: &[Vec<T>]) -> T {
    let mut r = values.to_vec();
    for q in basis {
        let dot = r.iter().zip(q).map(|(&c, &e)| c * e).fold(T::zero(), |x, y| x + y);
        r.iter_mut().zip(q).for_each(|(c, &e)| *c = *c - dot * e);
    }
    let scale = values.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    let snap = T::tolerance(1e-12) * scale;
    let total = compensated_sum(r.iter().map(|v| v.abs()).filter(|&v| v > snap));
    total / T::from_usize_lossy(values.len())
}

/// Oscillation seminorm `|u|_{O^{s,A}}`:
/// `int_0^1 int A(osc^s u(x, r) / lambda) dx dr/r` over radii `r = 2^k h <= 1`
/// (weight `ln 2` each), where `osc^s u(x, r)` is the mean of `|u - q| / r^s`
/// over the grid points of the closed ball `B_r(x)` and `q` is the
/// least-squares polynomial of degree `[s]` on that ball.
///
/// The least-squares fit bounds the true infimum over polynomials from above
/// within a dimensional constant. Radii below one cell give balls with a
/// single point and contribute nothing; a grid coarser than `r = 1` gives 0.
pub fn oscillation<T: Real>(
    young: &YoungFunction<T>,
    s: FractionalOrder<T>,
    u: &GridFunction<T>,
    boundary: Boundary,
) -> Result<SeminormResult<T>, SeminormError> {
    let comps = std::slice::from_ref(u);
    let field = Field::new(comps, boundary, 0);
    let degree = s.int_part();
    let weight = T::LN_2() * field.mu;
    let one = T::one() + T::tolerance(1e-12);
    let mut samples = Vec::new();
    let mut radii = Vec::new();
    let mut cells = 1i64;
    loop {
        let r = T::from_i64(cells).unwrap() * field.cell;
        if r > one {
            break;
        }
        radii.push(r);
        let scale = r.powf(s.value());
        let ball = ball_offsets(field.n, cells);
        let local: Vec<[T; 2]> = ball
            .iter()
            .map(|o| [T::from_i64(o[0]).unwrap() / T::from_i64(cells).unwrap(), T::from_i64(o[1]).unwrap() / T::from_i64(cells).unwrap()])
            .collect();
        let full_basis = polynomial_basis(&local, field.n, degree);
        let reach = match boundary {
            Boundary::Zero => cells,
            Boundary::Interior => 0,
        };
        let range = |axis: usize| if axis < field.n { (field.lo - reach)..(field.hi + reach) } else { 0..1 };
        let mut values = Vec::with_capacity(ball.len());
        let mut kept = Vec::with_capacity(ball.len());
        for x1 in range(1) {
            for x0 in range(0) {
                values.clear();
                kept.clear();
                for (o, p) in ball.iter().zip(&local) {
                    if let Some(v) = field.get(0, [x0 + o[0], x1 + o[1]]) {
                        values.push(v);
                        kept.push(*p);
                    }
                }
                if values.iter().all(|&v| v == T::zero()) {
                    continue;
                }
                let osc = if kept.len() == ball.len() {
                    fit_residual(&values, &full_basis)
                } else {
                    fit_residual(&values, &polynomial_basis(&kept, field.n, degree))
                };
                if osc > T::zero() {
                    samples.push((osc / scale, weight));
                }
            }
        }
        cells *= 2;
    }
    Ok(finish(young, samples, boundary, &radii))
}

/// Integer offsets `o` with `|o| <= radius`, row by row.
fn ball_offsets(n: usize, radius: i64) -> Vec<[i64; 2]> {
    let r2 = radius * radius;
    let mut out = Vec::new();
    if n == 1 {
        out.extend((-radius..=radius).map(|o| [o, 0]));
    } else {
        for o1 in -radius..=radius {
            for o0 in -radius..=radius {
                if o0 * o0 + o1 * o1 <= r2 {
                    out.push([o0, o1]);
                }
            }
        }
    }
    out
}

/// The four equivalent norms on fractional Orlicz-Sobolev spaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Space {
    /// Gagliardo-Slobodeckij.
    W,
    /// Besov, with one-sided axis differences.
    B,
    /// Oscillation.
    O,
    /// Triebel-Lizorkin type, through the Littlewood-Paley decomposition.
    F,
}

impl std::str::FromStr for Space {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "W" | "w" => Ok(Space::W),
            "B" | "b" => Ok(Space::B),
            "O" | "o" => Ok(Space::O),
            "F" | "f" => Ok(Space::F),
            other => Err(format!("unknown space {other:?}, expected W, B, O or F")),
        }
    }
}

impl std::fmt::Display for Space {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let c = match self {
            Space::W => "W",
            Space::B => "B",
            Space::O => "O",
            Space::F => "F",
        };
        f.write_str(c)
    }
}

/// Full norm of `u` in the chosen space.
///
/// `W` and `B`: `sum_{k <= [s]} ||grad^k u||_A` plus the matching seminorm of
/// `grad^{[s]} u` at order `{s}`. `O`: `||u||_A + |u|_{O^{s,A}}`. `F` is
/// computed by [`crate::lp::fsa_norm`] on the periodized grid and ignores
/// `boundary`.
pub fn full_norm<T: Real>(
    space: Space,
    young: &YoungFunction<T>,
    s: FractionalOrder<T>,
    u: &GridFunction<T>,
    boundary: Boundary,
) -> Result<T, SeminormError> {
    match space {
        Space::W | Space::B => {
            let mut total = T::zero();
            for k in 0..=s.int_part() {
                let grad = grad_k(u, k, boundary)?;
                total = total + grad.magnitude().luxemburg_norm(young);
            }
            let semi = if space == Space::W { gagliardo_higher(young, s, u, boundary)? } else { besov_higher(young, s, u, boundary)? };
            Ok(total + semi.value)
        }
        Space::O => Ok(u.luxemburg_norm(young) + oscillation(young, s, u, boundary)?.value),
        Space::F => Ok(crate::lp::fsa_norm(young, s.value(), u)?.value),
    }
}

/// Non-negative continuous piecewise-linear function on `[0, inf)`, zero
/// outside `[t_0, t_last]`. A repeated knot encodes a jump, so step functions
/// are included.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinear<T> {
    knots: Vec<T>,
    values: Vec<T>,
}

impl<T: Real> PiecewiseLinear<T> {
    pub fn new(knots: Vec<T>, values: Vec<T>) -> Result<Self, SeminormError> {
        if knots.len() != values.len() || knots.len() < 2 {
            return Err(SeminormError::Profile("need matching knots and values, at least two"));
        }
        if knots.iter().any(|t| !(t.is_finite() && *t >= T::zero())) || knots.windows(2).any(|w| w[1] < w[0]) {
            return Err(SeminormError::Profile("knots must be finite, non-negative and sorted"));
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= T::zero())) {
            return Err(SeminormError::Profile("values must be finite and non-negative"));
        }
        Ok(Self { knots, values })
    }

    /// Step function `values[i]` on `[breaks[i], breaks[i+1])`.
    pub fn from_steps(breaks: &[T], values: &[T]) -> Result<Self, SeminormError> {
        if breaks.len() != values.len() + 1 {
            return Err(SeminormError::Profile("need one more break than values"));
        }
        let mut knots = Vec::with_capacity(2 * values.len());
        let mut vals = Vec::with_capacity(2 * values.len());
        for (i, &v) in values.iter().enumerate() {
            knots.extend([breaks[i], breaks[i + 1]]);
            vals.extend([v, v]);
        }
        Self::new(knots, vals)
    }

    pub fn knots(&self) -> &[T] {
        &self.knots
    }

    /// Segment `i` covers `[knots[i], knots[i+1]]`.
    fn segment(&self, t: T) -> Option<usize> {
        if t < self.knots[0] || t >= self.knots[self.knots.len() - 1] {
            return None;
        }
        let i = self.knots.partition_point(|&k| k <= t);
        Some(i - 1)
    }

    pub fn eval(&self, t: T) -> T {
        match self.segment(t) {
            None => T::zero(),
            Some(i) => {
                let (a, b) = (self.knots[i], self.knots[i + 1]);
                let w = (t - a) / (b - a);
                self.values[i] + (self.values[i + 1] - self.values[i]) * w
            }
        }
    }

    /// `int_0^t f`, exact.
    pub fn integral_to(&self, t: T) -> T {
        let half = T::lit(0.5);
        let mut acc = T::zero();
        for i in 0..self.knots.len() - 1 {
            let (a, b) = (self.knots[i], self.knots[i + 1]);
            if t <= a {
                break;
            }
            if b == a {
                continue;
            }
            let end = t.min(b);
            let fe = self.values[i] + (self.values[i + 1] - self.values[i]) * ((end - a) / (b - a));
            acc = acc + (self.values[i] + fe) * half * (end - a);
        }
        acc
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == T::zero())
    }
}

/// Integral of `g(t) dt/t` over `(0, inf)` for `g` smooth between `breaks`,
/// in the variable `ln t`. Both ends are summed over dyadic panels with
/// divergence detection; `None` means divergent or undecided.
fn log_integral<T: Real, G: Fn(T) -> T>(g: &G, breaks: &[T]) -> Option<T> {
    let rel = 1e-12;
    let in_log = |a: T, b: T| adaptive(|x: T| g(x.exp()), a.ln(), b.ln(), rel);
    let first = breaks[0];
    let last = breaks[breaks.len() - 1];
    let mut parts = Vec::new();
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            parts.push(in_log(w[0], w[1]));
        }
    }
    let two = T::lit(2.0);
    let head = sum_panels(
        |k| {
            let hi = first / two.powi(k as i32);
            let lo = hi / two;
            (lo > T::min_positive_value()).then(|| in_log(lo, hi))
        },
        1000,
    );
    let tail = sum_panels(
        |k| {
            let lo = last * two.powi(k as i32);
            let hi = lo * two;
            hi.is_finite().then(|| in_log(lo, hi))
        },
        1000,
    );
    match (head, tail) {
        (PanelSeries::Converges { sum: h, .. }, PanelSeries::Converges { sum: t, .. }) => {
            parts.push(h);
            parts.push(t);
            Some(compensated_sum(parts))
        }
        _ => None,
    }
}

/// Hardy-type inequality
/// `int_0^inf A(t^{-1-s} int_0^t f) dt/t <= int_0^inf A(f(t) / t^s) dt/t`
/// for a non-negative piecewise-linear `f`. The constant is exactly one.
/// A side whose integral diverges is reported as `+inf`.
pub fn hardy_check<T: Real>(young: &YoungFunction<T>, s: T, f: &PiecewiseLinear<T>) -> Result<ConvolutionReport, SeminormError> {
    if !(s > T::zero() && s < T::one()) {
        return Err(SeminormError::NotFractional(s.to_f64_lossy()));
    }
    if f.is_zero() {
        return Ok(ConvolutionReport::new(0.0, 0.0).with("s", s.to_f64_lossy()));
    }
    let mut breaks: Vec<T> = f.knots().iter().copied().filter(|&t| t > T::zero()).collect();
    breaks.dedup();
    if breaks.len() == 1 {
        breaks.insert(0, breaks[0] / T::lit(2.0));
    }
    let lhs_g = |t: T| young.eval(f.integral_to(t) / t.powf(T::one() + s));
    let rhs_g = |t: T| young.eval(f.eval(t) / t.powf(s));
    let side = |v: Option<T>| v.map(|x| x.to_f64_lossy()).unwrap_or(f64::INFINITY);
    let lhs = side(log_integral(&lhs_g, &breaks));
    // f vanishes beyond its last knot, so the right-hand tail is zero.
    let rhs = side(log_integral(&rhs_g, &breaks));
    Ok(ConvolutionReport::new(lhs, rhs).with("s", s.to_f64_lossy()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hat(points: usize, half_width: f64) -> GridFunction<f64> {
        GridFunction::from_fn(1, points, half_width, |x| (1.0 - x[0].abs()).max(0.0)).unwrap()
    }

    fn ord(s: f64) -> FractionalOrder<f64> {
        FractionalOrder::new(s).unwrap()
    }

    /// Gagliardo modular over all ordered pairs `(x, y)` of the zero-extended
    /// lattice with `0 < |x - y| < N` cells.
    fn brute_gagliardo_1d(a: &YoungFunction<f64>, s: f64, u: &[f64], h: f64, lambda: f64) -> f64 {
        let n = u.len() as i64;
        let get = |i: i64| if (0..n).contains(&i) { u[i as usize] } else { 0.0 };
        let mut total = 0.0;
        for x in -(n - 1)..(2 * n - 1) {
            for y in -(n - 1)..(2 * n - 1) {
                let k = (x - y).abs();
                if k == 0 || k >= n {
                    continue;
                }
                let d = k as f64 * h;
                total += a.eval((get(x) - get(y)).abs() / (lambda * d.powf(s))) * h * h / d;
            }
        }
        total
    }

    fn brute_norm(modular: impl Fn(f64) -> f64) -> f64 {
        let (mut lo, mut hi) = (1e-8f64, 1e8f64);
        for _ in 0..300 {
            let mid = (lo * hi).sqrt();
            if modular(mid) > 1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    }

    #[test]
    fn order_splits_integer_and_fractional_parts() {
        let s = ord(1.25);
        assert_eq!(s.int_part(), 1);
        assert_eq!(s.frac_part(), 0.25);
        assert!(FractionalOrder::new(2.0f64).is_err());
        assert!(FractionalOrder::new(-0.5f64).is_err());
    }

    #[test]
    fn gagliardo_matches_pairwise_sum() {
        let a = YoungFunction::power(2.0).unwrap();
        let u = hat(64, 2.0);
        let r = gagliardo(&a, ord(0.3), &u, Boundary::Zero).unwrap();
        let h = u.cell_width();
        // Offsets beyond the box, as a continuous integral from (N - 1/2) h.
        let big_r = (u.points() as f64 - 0.5) * h;
        let mass: f64 = u.values().iter().map(|v| v * v).sum();
        let far = |l: f64| 4.0 * h * mass / (l * l) * big_r.powf(-0.6) / 0.6;
        let oracle = brute_norm(|l| brute_gagliardo_1d(&a, 0.3, u.values(), h, l) + far(l));
        assert!((r.value / oracle - 1.0).abs() < 1e-12, "{} vs {}", r.value, oracle);
        assert!((r.modular_at_value - 1.0).abs() < 1e-10);
    }

    #[test]
    fn constant_has_zero_seminorms_inside_the_box() {
        let a = YoungFunction::power(2.0).unwrap();
        let u = GridFunction::from_fn(1, 32, 1.0, |_| 3.0).unwrap();
        for f in [gagliardo, besov, oscillation] {
            assert_eq!(f(&a, ord(0.4), &u, Boundary::Interior).unwrap().value, 0.0);
        }
    }

    #[test]
    fn translation_leaves_seminorms_unchanged() {
        let a = YoungFunction::power_log(1.5, 1.0).unwrap();
        let u = hat(64, 4.0);
        let v = u.translated(&[5]).unwrap();
        for f in [gagliardo, besov, oscillation] {
            let x = f(&a, ord(0.6), &u, Boundary::Zero).unwrap().value;
            let y = f(&a, ord(0.6), &v, Boundary::Zero).unwrap().value;
            assert_eq!(x, y);
        }
    }

    #[test]
    fn besov_matches_shell_sum() {
        let a = YoungFunction::power(2.0).unwrap();
        let u = hat(64, 2.0);
        let h = u.cell_width();
        let vals = u.values().to_vec();
        let get = |i: i64| if (0..64).contains(&i) { vals[i as usize] } else { 0.0 };
        let modular = |l: f64| {
            let mut total = 0.0;
            for k in 0..=6 {
                let shift = 1i64 << k;
                let rho = shift as f64 * h;
                for x in -shift..64 {
                    let d = (get(x + shift) - get(x)).abs();
                    total += std::f64::consts::LN_2 * h * a.eval(d / (l * rho.powf(0.3)));
                }
            }
            // Shifts past the box: no overlap, every value counted twice.
            for k in 7..400 {
                let rho = 2f64.powi(k) * h;
                for &v in &vals {
                    total += 2.0 * std::f64::consts::LN_2 * h * a.eval(v.abs() / (l * rho.powf(0.3)));
                }
            }
            total
        };
        let r = besov(&a, ord(0.3), &u, Boundary::Zero).unwrap();
        let oracle = brute_norm(modular);
        assert!((r.value / oracle - 1.0).abs() < 1e-12);
    }

    #[test]
    fn linear_function_has_constant_gradient() {
        let u = GridFunction::from_fn(2, 16, 2.0, |x| 3.0 * x[0] + 0.5).unwrap();
        let g = grad_k(&u, 1, Boundary::Interior).unwrap();
        assert_eq!(g.components.len(), 2);
        for flat in 0..u.len() {
            let [i0, i1] = u.index(flat);
            if (1..15).contains(&i0) && (1..15).contains(&i1) {
                assert_eq!(g.components[0].values()[flat], 3.0);
                assert_eq!(g.components[1].values()[flat], 0.0);
            }
        }
        assert_eq!(grad_k(&u, 0, Boundary::Zero).unwrap().components[0], u);
        assert!(grad_k(&GridFunction::from_fn(1, 8, 1.0, |_| 0.0).unwrap(), 4, Boundary::Zero).is_err());
    }

    #[test]
    fn sine_derivative_error_is_second_order() {
        let err = |points: usize| {
            let u = GridFunction::from_fn(1, points, 3.0f64, |x| x[0].sin()).unwrap();
            let g = grad_k(&u, 1, Boundary::Interior).unwrap();
            (1..points - 1).map(|i| (g.components[0].values()[i] - u.coord(i).cos()).abs()).fold(0.0, f64::max)
        };
        let ratio = err(64) / err(128);
        assert!((ratio - 4.0).abs() < 0.1, "{ratio}");
        // Taylor remainder: |D u - u'| <= h^2/6 max|u'''|.
        let h = 6.0 / 128.0;
        assert!(err(128) <= h * h / 6.0);
    }

    #[test]
    fn higher_order_vanishes_on_affine_and_matches_brute_force_on_quadratic() {
        let a = YoungFunction::power(2.0).unwrap();
        let affine = GridFunction::from_fn(1, 64, 8.0, |x| 3.0 * x[0] + 1.0).unwrap();
        assert_eq!(gagliardo_higher(&a, ord(1.5), &affine, Boundary::Interior).unwrap().value, 0.0);

        let q = GridFunction::from_fn(1, 64, 2.0, |x| x[0] * x[0]).unwrap();
        let r = gagliardo_higher(&a, ord(1.5), &q, Boundary::Interior).unwrap();
        // Independent oracle: derivative by hand on interior cells, then all
        // ordered interior pairs.
        let h = q.cell_width();
        let d: Vec<f64> = (1..63).map(|i| (q.values()[i + 1] - q.values()[i - 1]) / (2.0 * h)).collect();
        let modular = |l: f64| {
            let mut total = 0.0;
            for x in 0..d.len() {
                for y in 0..d.len() {
                    if x != y {
                        let dist = (x as f64 - y as f64).abs() * h;
                        total += a.eval((d[x] - d[y]).abs() / (l * dist.powf(0.5))) * h * h / dist;
                    }
                }
            }
            total
        };
        let oracle = brute_norm(modular);
        assert!((r.value / oracle - 1.0).abs() < 1e-12);
        let low = gagliardo_higher(&a, ord(0.5), &q, Boundary::Zero).unwrap().value;
        assert_eq!(low, gagliardo(&a, ord(0.5), &q, Boundary::Zero).unwrap().value);
    }

    #[test]
    fn oscillation_vanishes_on_polynomials() {
        let a = YoungFunction::power(2.0).unwrap();
        let lin = GridFunction::from_fn(2, 16, 2.0, |x| 2.0 * x[0] - x[1] + 0.25).unwrap();
        assert_eq!(oscillation(&a, ord(1.5), &lin, Boundary::Interior).unwrap().value, 0.0);
        let quad = GridFunction::from_fn(1, 64, 4.0, |x| x[0] * x[0] - x[0]).unwrap();
        assert_eq!(oscillation(&a, ord(2.5), &quad, Boundary::Interior).unwrap().value, 0.0);
        assert!(oscillation(&a, ord(0.5), &quad, Boundary::Interior).unwrap().value > 0.0);
    }

    #[test]
    fn full_norms_dominate_the_lebesgue_part() {
        let a = YoungFunction::power(2.0).unwrap();
        let u = hat(64, 4.0);
        let lux = u.luxemburg_norm(&a);
        for space in [Space::W, Space::B, Space::O] {
            let v = full_norm(space, &a, ord(0.5), &u, Boundary::Zero).unwrap();
            assert!(v >= lux);
            assert_eq!(full_norm(space, &a, ord(0.5), &u.zeros_like(), Boundary::Zero).unwrap(), 0.0);
        }
    }

    #[test]
    fn hardy_closed_form() {
        let a = YoungFunction::power(2.0).unwrap();
        let f = PiecewiseLinear::new(vec![0.0, 1.0], vec![0.0, 1.0]).unwrap();
        let r = hardy_check(&a, 0.5, &f).unwrap();
        assert!((r.lhs - 1.0 / 3.0).abs() < 1e-10, "{}", r.lhs);
        assert!((r.rhs - 1.0).abs() < 1e-10, "{}", r.rhs);
        let zero = PiecewiseLinear::new(vec![0.0, 1.0], vec![0.0, 0.0]).unwrap();
        let r0 = hardy_check(&a, 0.5, &zero).unwrap();
        assert_eq!((r0.lhs, r0.rhs), (0.0, 0.0));
    }

    #[test]
    fn hardy_step_function_holds() {
        let a = YoungFunction::exp();
        let f = PiecewiseLinear::from_steps(&[0.5, 1.0, 3.0], &[2.0, 0.5]).unwrap();
        let r = hardy_check(&a, 0.3, &f).unwrap();
        assert!(r.lhs.is_finite() && r.holds(1e-9), "{r:?}");
    }
}
