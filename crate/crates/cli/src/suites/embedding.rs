//! The fractional Orlicz-Sobolev embedding into the Sobolev-conjugate
//! target, as a ratio experiment plus its integral form.

use orlicz_core::seminorm::{full_norm, gagliardo_samples, grad_k};
use orlicz_core::target::target;
use orlicz_core::young::Shape;
use orlicz_core::{Boundary, Grid, Order, Smoothness, Space, Young};
use rayon::prelude::*;

use super::examples::ls_slope;
use super::{log_space, SuiteError};
use crate::config::Settings;
use crate::family::smooth_family;
use crate::report::{CaseRecord, SuiteBuilder, SuiteReport};

const STABILITY: f64 = 0.10;
const SLOPE_TOL: f64 = 1e-3;
const INTEGRAL_SLACK: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct EmbeddingParams {
    pub young_spec: String,
    pub young: Young,
    pub s: f64,
    pub r: f64,
}

impl Default for EmbeddingParams {
    fn default() -> Self {
        Self { young_spec: "power(2)".into(), young: Young::power(2.0).unwrap(), s: 0.7, r: 0.3 }
    }
}

/// `sum_{k <= [s]} int A(|grad^k u| / lambda)` plus the Gagliardo modular
/// of `grad^{[s]} u` at `lambda`.
fn full_modular(young: &Young, s: Order, u: &Grid, boundary: Boundary, lambda: f64) -> Result<f64, String> {
    let mut total = 0.0;
    for k in 0..=s.int_part() {
        let g = grad_k(u, k, boundary).map_err(|e| e.to_string())?;
        total += g.magnitude().samples().modular(young, lambda);
    }
    Ok(total + gagliardo_samples(s, u, boundary).map_err(|e| e.to_string())?.modular(young, lambda))
}

struct Member {
    ratio: f64,
    /// `M`, the modular of `u` for `A` at scale one.
    m: f64,
}

fn member(young: &Young, tgt: &Young, s: Order, r: Order, u: &Grid, boundary: Boundary) -> Result<Member, String> {
    let top = full_norm(Space::W, young, s, u, boundary).map_err(|e| e.to_string())?;
    let low = full_norm(Space::W, tgt, r, u, boundary).map_err(|e| e.to_string())?;
    let m = full_modular(young, s, u, boundary, 1.0)?;
    Ok(Member { ratio: low / top, m })
}

/// Left side of the integral form at `Lambda = c M^{sigma/n}`.
fn integral_lhs(tgt: &Young, r: Order, u: &Grid, boundary: Boundary, c: f64, m: f64, exponent: f64) -> Result<f64, String> {
    full_modular(tgt, r, u, boundary, c * m.powf(exponent))
}

/// Smallest `c` for which the integral form holds, by bisection in `ln c`.
fn minimal_constant(tgt: &Young, r: Order, u: &Grid, boundary: Boundary, m: f64, exponent: f64) -> Result<f64, String> {
    let holds = |c: f64| integral_lhs(tgt, r, u, boundary, c, m, exponent).map(|v| v <= m);
    let (mut lo, mut hi) = (1e-6f64, 1.0f64);
    while !holds(hi)? {
        hi *= 2.0;
        if hi > 1e12 {
            return Ok(f64::INFINITY);
        }
    }
    if holds(lo)? {
        return Ok(lo);
    }
    for _ in 0..60 {
        let mid = (lo * hi).sqrt();
        if holds(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

pub fn run_embedding(settings: &Settings, params: &EmbeddingParams) -> Result<SuiteReport, SuiteError> {
    let n = settings.n;
    let sigma = params.s - params.r;
    let setup = |e: String| SuiteError::Setup(e);
    let s = Order::new(params.s).map_err(|e| setup(e.to_string()))?;
    let r = Order::new(params.r).map_err(|e| setup(e.to_string()))?;
    let smooth = Smoothness::new(n, sigma).map_err(|e| setup(e.to_string()))?;
    let tgt = target(&params.young, smooth).map_err(|e| setup(format!("target: {e}")))?;
    let exponent = sigma / n as f64;

    let mut b = SuiteBuilder::new("embedding", settings.seed);
    for (k, v) in settings.record() {
        b.setting(&k, v);
    }
    b.setting("A", &params.young_spec)
        .setting("s", params.s)
        .setting("r", params.r)
        .tolerance("stability_rel", STABILITY)
        .tolerance("slope_abs", SLOPE_TOL)
        .tolerance("integral_rel", INTEGRAL_SLACK);

    // Classical exponent for a subcritical power.
    if let Shape::Power { p } = params.young.shape() {
        let p = *p;
        if p < n as f64 / sigma {
            let ts = log_space(1e-3, 1e3, 61);
            let x: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
            let y: Vec<f64> = ts.iter().map(|&t| tgt.eval(t).ln()).collect();
            let slope = ls_slope(&x, &y);
            let expected = n as f64 * p / (n as f64 - sigma * p);
            let err = (slope - expected).abs();
            b.check("target-exponent", err <= SLOPE_TOL, slope, expected, format!("log-log slope of the target, |error| {err:.2e}"));
        }
    }

    let coarse = settings.ratio_grid();
    let fine = coarse.refined();
    let mut per_grid = Vec::new();
    for grid in [coarse, fine] {
        let fam = smooth_family(grid, settings.family_size, settings.seed).map_err(|e| setup(e.to_string()))?;
        let members: Vec<Result<Member, String>> =
            fam.par_iter().map(|(_, u)| member(&params.young, &tgt, s, r, u, settings.boundary)).collect();
        per_grid.push((fam, members));
    }

    let mut max_ratio = [0.0f64; 2];
    let mut all_finite = true;
    for (gi, (fam, members)) in per_grid.iter().enumerate() {
        for ((name, u), res) in fam.iter().zip(members) {
            let inputs = format!("u={name}, N={}", u.points());
            match res {
                Ok(mm) => {
                    let ok = mm.ratio.is_finite() && mm.ratio > 0.0;
                    all_finite &= ok;
                    max_ratio[gi] = max_ratio[gi].max(mm.ratio);
                    b.case(CaseRecord::new("ratio", inputs, mm.ratio, f64::INFINITY, ok));
                }
                Err(e) => {
                    all_finite = false;
                    b.case(CaseRecord::failed("ratio", inputs, e));
                }
            }
        }
    }
    b.check("ratio-finite", all_finite, max_ratio[0], f64::INFINITY, "target norm over source norm, every member and grid");
    let drift = (max_ratio[1] / max_ratio[0] - 1.0).abs();
    b.check(
        "max-ratio-stable",
        drift <= STABILITY,
        drift,
        STABILITY,
        format!("max ratio {:.6} -> {:.6} under N -> 2N", max_ratio[0], max_ratio[1]),
    );

    // Integral form: the norm constant, calibrated on the coarse grid with
    // the stability allowance, times the number of terms on each side.
    let terms = |o: Order| (o.int_part() + 2) as f64;
    let c0 = (1.0 + STABILITY) * max_ratio[0];
    let c = c0 * terms(s) * terms(r);
    let mut holds_all = true;
    let mut worst: f64 = 0.0;
    let mut largest_min_c: f64 = 0.0;
    for (fam, members) in &per_grid {
        let checks: Vec<Result<(f64, f64, f64), String>> = fam
            .par_iter()
            .zip(members)
            .map(|((_, u), res)| {
                let mm = res.as_ref().map_err(Clone::clone)?;
                let lhs = integral_lhs(&tgt, r, u, settings.boundary, c, mm.m, exponent)?;
                let cmin = minimal_constant(&tgt, r, u, settings.boundary, mm.m, exponent)?;
                Ok((lhs, mm.m, cmin))
            })
            .collect();
        for ((name, u), res) in fam.iter().zip(checks) {
            let inputs = format!("u={name}, N={}, c={c:.6}", u.points());
            match res {
                Ok((lhs, m, cmin)) => {
                    let ok = lhs <= m * (1.0 + INTEGRAL_SLACK);
                    holds_all &= ok;
                    worst = worst.max(lhs / m);
                    largest_min_c = largest_min_c.max(cmin);
                    b.case(CaseRecord::new("integral-form", inputs, lhs, m, ok).with_note(format!("smallest c that works: {cmin:.6}")));
                }
                Err(e) => {
                    holds_all = false;
                    b.case(CaseRecord::failed("integral-form", inputs, e));
                }
            }
        }
    }
    b.check("integral-form", holds_all, worst, 1.0, format!("worst lhs/M with c = {c:.6}"));
    b.check("integral-min-constant", largest_min_c.is_finite(), largest_min_c, c, "largest per-member minimal c (recorded)");
    Ok(b.finish())
}
