//! Dyadic Fourier partition of unity on the periodic box, Littlewood-Paley
//! blocks, and the `F^{s,A}` norm built from them.
//!
//! The box `[-L, L)^n` is treated as a torus, so the frequency lattice is
//! `xi = (pi / L) k` with `k` in `[-N/2, N/2)^n`.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use thiserror::Error;

use crate::grid::{GridError, GridFunction, WeightedSamples};
use crate::scalar::Real;
use crate::young::YoungFunction;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LpError {
    #[error("grid resolves |xi| up to {nyquist}, too coarse for two dyadic blocks")]
    TooCoarse { nyquist: f64 },
    #[error("block index {index} out of range 0..={max}")]
    Block { index: usize, max: usize },
    #[error("inverse transform left an imaginary part {residue:e} relative to the data")]
    NotReal { residue: f64 },
    #[error("smoothness must be positive and finite, got {0}")]
    Order(f64),
    #[error("grid does not match the partition")]
    Mismatch,
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// Largest relative imaginary residue accepted after an inverse transform.
pub const REAL_TOL: f64 = 1e-12;

fn bump<T: Real>(x: T) -> T {
    if x > T::zero() {
        (-T::one() / x).exp()
    } else {
        T::zero()
    }
}

/// Radial profile: 1 on `[0, 1]`, 0 on `[2, inf)`, and
/// `H(2 - r) / (H(2 - r) + H(r - 1))` with `H(x) = e^{-1/x}` in between.
pub fn profile<T: Real>(r: T) -> T {
    if r <= T::one() {
        return T::one();
    }
    if r >= T::lit(2.0) {
        return T::zero();
    }
    let a = bump(T::lit(2.0) - r);
    let b = bump(r - T::one());
    a / (a + b)
}

/// Multipliers `phi_0(xi) = g(|xi|)` and
/// `phi_i(xi) = g(2^{-i}|xi|) - g(2^{1-i}|xi|)` for `1 <= i <= i_max`, sampled
/// on the frequency lattice of one grid shape, in FFT order.
#[derive(Debug, Clone, PartialEq)]
pub struct DyadicPartition<T> {
    n: usize,
    points: usize,
    half_width: T,
    i_max: usize,
    radius: Vec<T>,
    multipliers: Vec<Vec<T>>,
}

impl<T: Real> DyadicPartition<T> {
    /// `i_max = floor(log2(pi N / 2L)) - 1`, one octave below the Nyquist
    /// radius so that the top annulus fits in the resolved spectrum.
    pub fn new(n: usize, points: usize, half_width: T) -> Result<Self, LpError> {
        // Validates the shape.
        GridFunction::new(n, points, half_width, vec![T::zero(); points.pow(n as u32)])?;
        let nyquist = T::PI() * T::from_usize_lossy(points) / (T::lit(2.0) * half_width);
        let top = nyquist.log2().floor() - T::one();
        if !(top >= T::one()) {
            return Err(LpError::TooCoarse { nyquist: nyquist.to_f64_lossy() });
        }
        let i_max = top.to_usize().unwrap();
        let step = T::PI() / half_width;
        let freq = |k: usize| {
            let k = if k < points / 2 { k as i64 } else { k as i64 - points as i64 };
            T::from_i64(k).unwrap() * step
        };
        let len = points.pow(n as u32);
        let radius: Vec<T> = (0..len)
            .map(|flat| {
                let x0 = freq(flat % points);
                let x1 = if n == 2 { freq(flat / points) } else { T::zero() };
                (x0 * x0 + x1 * x1).sqrt()
            })
            .collect();
        let multipliers = (0..=i_max).map(|i| radius.iter().map(|&r| Self::phi(i, r)).collect()).collect();
        Ok(Self { n, points, half_width, i_max, radius, multipliers })
    }

    pub fn for_grid(u: &GridFunction<T>) -> Result<Self, LpError> {
        Self::new(u.n(), u.points(), u.half_width())
    }

    /// Value of `phi_i` at radius `r`.
    pub fn phi(i: usize, r: T) -> T {
        let two = T::lit(2.0);
        if i == 0 {
            profile(r)
        } else {
            profile(r / two.powi(i as i32)) - profile(r / two.powi(i as i32 - 1))
        }
    }

    pub fn i_max(&self) -> usize {
        self.i_max
    }

    /// `|xi|` at each lattice point, in FFT order.
    pub fn radii(&self) -> &[T] {
        &self.radius
    }

    pub fn multiplier(&self, i: usize) -> Result<&[T], LpError> {
        self.multipliers.get(i).map(|m| m.as_slice()).ok_or(LpError::Block { index: i, max: self.i_max })
    }

    fn check(&self, u: &GridFunction<T>) -> Result<(), LpError> {
        if u.n() == self.n && u.points() == self.points && u.half_width() == self.half_width {
            Ok(())
        } else {
            Err(LpError::Mismatch)
        }
    }

    /// `phi_i(D) u`: forward transform, multiply, inverse transform.
    pub fn block(&self, u: &GridFunction<T>, i: usize) -> Result<GridFunction<T>, LpError> {
        self.check(u)?;
        let spectrum = Spectrum::forward(u);
        spectrum.apply(u, self.multiplier(i)?)
    }

    /// All blocks `0..=i_max`, sharing one forward transform.
    pub fn blocks(&self, u: &GridFunction<T>) -> Result<Vec<GridFunction<T>>, LpError> {
        self.check(u)?;
        let spectrum = Spectrum::forward(u);
        self.multipliers.iter().map(|m| spectrum.apply(u, m)).collect()
    }
}

/// Discrete Fourier transform of a grid function on the torus.
pub(crate) struct Spectrum<T: Real> {
    n: usize,
    points: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> Spectrum<T> {
    pub(crate) fn forward(u: &GridFunction<T>) -> Self {
        let mut data: Vec<Complex<T>> = u.values().iter().map(|&v| Complex::new(v, T::zero())).collect();
        transform(&mut data, u.n(), u.points(), false);
        Self { n: u.n(), points: u.points(), data }
    }

    /// Inverse transform of `multiplier * spectrum`, checked to be real.
    pub(crate) fn apply(&self, like: &GridFunction<T>, multiplier: &[T]) -> Result<GridFunction<T>, LpError> {
        let mut data: Vec<Complex<T>> = self.data.iter().zip(multiplier).map(|(&z, &m)| z * m).collect();
        self.finish(like, &mut data)
    }

    pub(crate) fn apply_complex(
        &self,
        like: &GridFunction<T>,
        multiplier: impl Fn(usize) -> Complex<T>,
    ) -> Result<GridFunction<T>, LpError> {
        let mut data: Vec<Complex<T>> = self.data.iter().enumerate().map(|(k, &z)| z * multiplier(k)).collect();
        self.finish(like, &mut data)
    }

    fn finish(&self, like: &GridFunction<T>, data: &mut [Complex<T>]) -> Result<GridFunction<T>, LpError> {
        transform(data, self.n, self.points, true);
        let scale = T::one() / T::from_usize_lossy(data.len());
        let mut sup = T::zero();
        let mut imag = T::zero();
        for z in data.iter() {
            sup = sup.max(z.re.abs());
            imag = imag.max(z.im.abs());
        }
        let data_scale = like.sup_abs() * T::from_usize_lossy(data.len());
        if imag > T::tolerance(REAL_TOL) * data_scale.max(sup) {
            return Err(LpError::NotReal { residue: (imag / data_scale.max(sup)).to_f64_lossy() });
        }
        Ok(like.with_values(data.iter().map(|z| z.re * scale).collect())?)
    }
}

fn transform<T: Real>(data: &mut [Complex<T>], n: usize, points: usize, inverse: bool) {
    let mut planner = FftPlanner::<T>::new();
    let fft = if inverse { planner.plan_fft_inverse(points) } else { planner.plan_fft_forward(points) };
    // Axis 0 is contiguous.
    fft.process(data);
    if n == 2 {
        let mut column = vec![Complex::new(T::zero(), T::zero()); points];
        for i0 in 0..points {
            for i1 in 0..points {
                column[i1] = data[i0 + i1 * points];
            }
            fft.process(&mut column);
            for i1 in 0..points {
                data[i0 + i1 * points] = column[i1];
            }
        }
    }
}

/// Result of an `F^{s,A}` norm evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct LpNorm<T> {
    pub value: T,
    pub modular_at_value: T,
    /// Blocks `0..=i_max` that were summed.
    pub blocks: usize,
}

/// `inf { lambda : sum_{i <= i_max} mu sum_x A(2^{is} |phi_i(D) u(x)| / lambda) <= 1 }`.
///
/// Frequencies above `2^{i_max + 1}` are not seen by any block, so the norm
/// only vanishes for all `u = 0` among band-limited `u`.
pub fn fsa_norm<T: Real>(young: &YoungFunction<T>, s: T, u: &GridFunction<T>) -> Result<LpNorm<T>, LpError> {
    let partition = DyadicPartition::for_grid(u)?;
    fsa_norm_with(&partition, young, s, u)
}

pub fn fsa_norm_with<T: Real>(
    partition: &DyadicPartition<T>,
    young: &YoungFunction<T>,
    s: T,
    u: &GridFunction<T>,
) -> Result<LpNorm<T>, LpError> {
    if !(s > T::zero() && s.is_finite()) {
        return Err(LpError::Order(s.to_f64_lossy()));
    }
    let blocks = partition.blocks(u)?;
    let samples = block_samples(&blocks, s, u.cell_measure());
    let value = samples.luxemburg(young);
    let modular_at_value = if value > T::zero() && value.is_finite() { samples.modular(young, value) } else { T::zero() };
    Ok(LpNorm { value, modular_at_value, blocks: blocks.len() })
}

fn block_samples<T: Real>(blocks: &[GridFunction<T>], s: T, mu: T) -> WeightedSamples<T> {
    let two = T::lit(2.0);
    WeightedSamples::new(blocks.iter().enumerate().flat_map(|(i, b)| {
        let w = two.powf(T::from_usize_lossy(i) * s);
        b.values().iter().map(move |&v| (w * v, mu))
    }))
}

/// `sum_i mu sum_x A(c 2^{is} |b_i(x)|)` over blocks of possibly several
/// components.
fn block_modular<T: Real>(young: &YoungFunction<T>, blocks: &[Vec<GridFunction<T>>], s: T, c: T, mu: T) -> T {
    let mut all = Vec::new();
    for comp in blocks {
        for (i, b) in comp.iter().enumerate() {
            let w = c * T::lit(2.0).powf(T::from_usize_lossy(i) * s);
            all.extend(b.values().iter().map(|&v| (w * v, mu)));
        }
    }
    WeightedSamples::new(all).modular(young, T::one())
}

/// Order-`k` derivatives of `u` on the torus, computed spectrally, in the
/// same component order as [`crate::seminorm::grad_k`]. The Nyquist mode is
/// dropped for `k >= 1`.
pub fn spectral_gradient<T: Real>(u: &GridFunction<T>, k: usize) -> Result<Vec<GridFunction<T>>, LpError> {
    if k == 0 {
        return Ok(vec![u.clone()]);
    }
    let n = u.n();
    let points = u.points();
    let step = T::PI() / u.half_width();
    let spectrum = Spectrum::forward(u);
    let freq = |idx: usize| -> Option<T> {
        if idx == points / 2 {
            return None;
        }
        let k = if idx < points / 2 { idx as i64 } else { idx as i64 - points as i64 };
        Some(T::from_i64(k).unwrap() * step)
    };
    let mut out = Vec::new();
    for seq in 0..n.pow(k as u32) {
        let mut axes = Vec::with_capacity(k);
        let mut rest = seq;
        for _ in 0..k {
            axes.push(rest % n);
            rest /= n;
        }
        axes.reverse();
        let comp = spectrum.apply_complex(u, |flat| {
            let idx = [flat % points, flat / points];
            let mut m = Complex::new(T::one(), T::zero());
            for &a in &axes {
                match freq(idx[a]) {
                    Some(xi) => m = m * Complex::new(T::zero(), xi),
                    None => return Complex::new(T::zero(), T::zero()),
                }
            }
            m
        })?;
        out.push(comp);
    }
    Ok(out)
}

/// The three sums of the gradient chain
/// `int A(c1 |grad^{[s]} u|) <= sum_i int A(2^{i{s}} |phi_i(D) grad^{[s]} u|)
///  <= sum_i int A(c2 2^{is} |phi_i(D) u|)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainReport<T> {
    pub c1: T,
    pub c2: T,
    pub gradient: T,
    pub gradient_blocks: T,
    pub blocks: T,
}

impl<T: Real> ChainReport<T> {
    /// `gradient / gradient_blocks`, 0 when both vanish.
    pub fn first_ratio(&self) -> T {
        ratio(self.gradient, self.gradient_blocks)
    }

    /// `gradient_blocks / blocks`, 0 when both vanish.
    pub fn second_ratio(&self) -> T {
        ratio(self.gradient_blocks, self.blocks)
    }

    pub fn ordered(&self) -> bool {
        self.gradient <= self.gradient_blocks && self.gradient_blocks <= self.blocks
    }
}

fn ratio<T: Real>(a: T, b: T) -> T {
    if a == T::zero() {
        T::zero()
    } else {
        a / b
    }
}

/// Evaluates the gradient chain on the torus with spectral derivatives and
/// the calibration constants `c1`, `c2`.
pub fn gradient_block_chain<T: Real>(young: &YoungFunction<T>, s: T, u: &GridFunction<T>, c1: T, c2: T) -> Result<ChainReport<T>, LpError> {
    if !(s > T::one() && s.is_finite() && s.fract() != T::zero()) {
        return Err(LpError::Order(s.to_f64_lossy()));
    }
    let k = s.floor().to_usize().unwrap();
    let frac = s - s.floor();
    let partition = DyadicPartition::for_grid(u)?;
    let grads = spectral_gradient(u, k)?;
    let mu = u.cell_measure();
    let magnitude: Vec<T> =
        (0..u.len()).map(|i| grads.iter().map(|g| g.values()[i] * g.values()[i]).fold(T::zero(), |a, b| a + b).sqrt()).collect();
    let gradient = WeightedSamples::new(magnitude.iter().map(|&v| (c1 * v, mu))).modular(young, T::one());
    let grad_blocks = grads.iter().map(|g| partition.blocks(g)).collect::<Result<Vec<_>, _>>()?;
    let gradient_blocks = block_modular(young, &grad_blocks, frac, T::one(), mu);
    let blocks = block_modular(young, &[partition.blocks(u)?], s, c2, mu);
    Ok(ChainReport { c1, c2, gradient, gradient_blocks, blocks })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn harmonic(points: usize, half_width: f64, k: i64) -> GridFunction<f64> {
        let xi = std::f64::consts::PI * k as f64 / half_width;
        GridFunction::from_fn(1, points, half_width, |x| (xi * x[0]).cos()).unwrap()
    }

    #[test]
    fn profile_plateaus_and_monotone_transition() {
        assert_eq!(profile(0.5f64), 1.0);
        assert_eq!(profile(3.0f64), 0.0);
        let mut prev = 1.0;
        // Near the ends the transition rounds to exactly 0 or 1.
        for j in 5..96 {
            let g = profile(1.0 + j as f64 / 100.0);
            assert!(g < prev && g > 0.0);
            prev = g;
        }
    }

    #[test]
    fn partition_supports_and_telescoping() {
        let p = DyadicPartition::<f64>::new(2, 64, 4.0).unwrap();
        for i in 0..=p.i_max() {
            let m = p.multiplier(i).unwrap();
            for (&r, &v) in p.radii().iter().zip(m) {
                assert!((0.0..=1.0).contains(&v));
                let lo = if i == 0 { 0.0 } else { 2f64.powi(i as i32 - 1) };
                if r < lo || r > 2f64.powi(i as i32 + 1) {
                    assert_eq!(v, 0.0);
                }
            }
            for l in i + 2..=p.i_max() {
                let other = p.multiplier(l).unwrap();
                assert!(m.iter().zip(other).all(|(a, b)| a * b == 0.0));
            }
        }
        let m = p.i_max();
        for (flat, &r) in p.radii().iter().enumerate() {
            let sum: f64 = (0..=m).map(|i| p.multiplier(i).unwrap()[flat]).sum();
            assert!((sum - profile(r / 2f64.powi(m as i32))).abs() < 1e-15);
        }
    }

    #[test]
    fn coarse_grid_is_rejected() {
        assert!(DyadicPartition::<f64>::new(1, 8, 8.0).is_err());
    }

    #[test]
    fn harmonic_on_plateau_is_reproduced_by_its_block() {
        // phi_i equals one only at |xi| = 2^i; there every other block vanishes.
        let l = std::f64::consts::PI;
        let u = harmonic(128, l, 4); // xi = 4 = 2^2
        let p = DyadicPartition::for_grid(&u).unwrap();
        let b = p.block(&u, 2).unwrap();
        for (x, y) in b.values().iter().zip(u.values()) {
            assert!((x - y).abs() < 1e-12);
        }
        for j in [0, 1, 3, 4, 5] {
            assert!(p.block(&u, j).unwrap().sup_abs() < 1e-12);
        }
    }

    #[test]
    fn blocks_sum_to_band_limited_function() {
        let l = std::f64::consts::PI;
        let u = GridFunction::from_fn(1, 128, l, |x| (x[0]).sin() + 0.3 * (5.0 * x[0]).cos() + 0.1).unwrap();
        let p = DyadicPartition::for_grid(&u).unwrap();
        let blocks = p.blocks(&u).unwrap();
        for i in 0..u.len() {
            let s: f64 = blocks.iter().map(|b| b.values()[i]).sum();
            assert!((s - u.values()[i]).abs() < 1e-10 * u.sup_abs());
        }
        // Finite overlap: sum of squared block norms within [1/3, 3] of |u|^2.
        let sq = |g: &GridFunction<f64>| g.values().iter().map(|v| v * v).sum::<f64>();
        let total: f64 = blocks.iter().map(sq).sum();
        let r = total / sq(&u);
        assert!((1.0 / 3.0..=3.0).contains(&r));
    }

    #[test]
    fn fsa_norm_zero_and_homogeneous() {
        let a = YoungFunction::power(2.0).unwrap();
        let u = GridFunction::from_fn(1, 128, 8.0f64, |x| (-x[0] * x[0]).exp()).unwrap();
        assert_eq!(fsa_norm(&a, 0.5, &u.zeros_like()).unwrap().value, 0.0);
        let v1 = fsa_norm(&a, 0.5, &u).unwrap().value;
        let v3 = fsa_norm(&a, 0.5, &u.scaled(3.0)).unwrap().value;
        assert!((v3 / v1 - 3.0).abs() < 1e-11);
    }

    #[test]
    fn spectral_gradient_of_harmonic() {
        let l = std::f64::consts::PI;
        let u = GridFunction::from_fn(1, 64, l, |x| (3.0 * x[0]).sin()).unwrap();
        let g = spectral_gradient(&u, 1).unwrap();
        for i in 0..64 {
            assert!((g[0].values()[i] - 3.0 * (3.0 * u.coord(i)).cos()).abs() < 1e-11);
        }
    }

    #[test]
    fn chain_on_constant_sees_only_the_zero_mode() {
        let a = YoungFunction::power(2.0).unwrap();
        let u = GridFunction::from_fn(1, 64, 4.0, |_| 2.0).unwrap();
        let r = gradient_block_chain(&a, 1.5, &u, 1.0, 1.0).unwrap();
        assert!(r.gradient < 1e-20 && r.gradient_blocks < 1e-20);
        let z = gradient_block_chain(&a, 1.5, &u.zeros_like(), 1.0, 1.0).unwrap();
        assert_eq!((z.gradient, z.gradient_blocks, z.blocks), (0.0, 0.0, 0.0));
    }
}
