//! Pairwise ratios of the W, B, O and F norms over a smooth family, on a
//! coarse grid and its refinement.

use orlicz_core::seminorm::full_norm;
use orlicz_core::{Boundary, Grid, Order, Space, Young};
use rayon::prelude::*;

use super::{rel_diff, SuiteError};
use crate::config::Settings;
use crate::family::smooth_family;
use crate::report::{CaseRecord, SuiteBuilder, SuiteReport};

pub const MAX_CONSTANT: f64 = 100.0;
pub const STABILITY: f64 = 0.10;
const AMPLITUDE_TOL: f64 = 1e-9;
/// The F norm goes through an FFT, so a shifted input is only equal up to
/// rounding.
const SPECTRAL_SHIFT_TOL: f64 = 1e-12;

pub const SPACES: [Space; 4] = [Space::W, Space::B, Space::O, Space::F];

pub fn young_functions() -> Vec<(&'static str, Young)> {
    vec![
        ("power(1.5)", Young::power(1.5).unwrap()),
        ("power(2)", Young::power(2.0).unwrap()),
        ("powerlog(2,1)", Young::power_log(2.0, 1.0).unwrap()),
    ]
}

pub const ORDERS: [f64; 3] = [0.3, 0.7, 1.5];

pub fn norms(young: &Young, s: Order, u: &Grid, boundary: Boundary) -> Result<[f64; 4], String> {
    let mut out = [0.0; 4];
    for (slot, space) in out.iter_mut().zip(SPACES) {
        *slot = full_norm(space, young, s, u, boundary).map_err(|e| format!("{space}: {e}"))?;
    }
    Ok(out)
}

/// Extremes of `x / y` over members, `None` if any ratio is not finite and
/// positive.
fn extremes(values: &[[f64; 4]], x: usize, y: usize) -> Option<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for v in values {
        let r = v[x] / v[y];
        if !(r.is_finite() && r > 0.0) {
            return None;
        }
        lo = lo.min(r);
        hi = hi.max(r);
    }
    Some((lo, hi))
}

pub fn run(settings: &Settings) -> Result<SuiteReport, SuiteError> {
    let coarse = settings.ratio_grid();
    let fine = coarse.refined();
    let fam_c = smooth_family(coarse, settings.family_size, settings.seed).map_err(|e| SuiteError::Setup(e.to_string()))?;
    let fam_f = smooth_family(fine, settings.family_size, settings.seed).map_err(|e| SuiteError::Setup(e.to_string()))?;
    let youngs = young_functions();

    let mut b = SuiteBuilder::new("equivalence", settings.seed);
    for (k, v) in settings.record() {
        b.setting(&k, v);
    }
    b.setting("coarse_points", coarse.points)
        .setting("fine_points", fine.points)
        .setting("family", "alternating gaussian(0,0.75) and bump(0,1.5) members")
        .tolerance("max_constant", MAX_CONSTANT)
        .tolerance("stability_rel", STABILITY)
        .tolerance("amplitude_rel", AMPLITUDE_TOL)
        .tolerance("spectral_shift_rel", SPECTRAL_SHIFT_TOL);

    // One task per (A, s, grid, member); rayon keeps the output in order.
    let mut tasks = Vec::new();
    for ai in 0..youngs.len() {
        for (si, _) in ORDERS.iter().enumerate() {
            for (gi, fam) in [&fam_c, &fam_f].into_iter().enumerate() {
                for m in 0..fam.len() {
                    tasks.push((ai, si, gi, m));
                }
            }
        }
    }
    let results: Vec<Result<[f64; 4], String>> = tasks
        .par_iter()
        .map(|&(ai, si, gi, m)| {
            let fam = if gi == 0 { &fam_c } else { &fam_f };
            norms(&youngs[ai].1, Order::new(ORDERS[si]).unwrap(), &fam[m].1, settings.boundary)
        })
        .collect();

    let per_family = settings.family_size;
    let mut worst_c: f64 = 0.0;
    let mut worst_drift: f64 = 0.0;
    let mut all_finite = true;
    let mut failures = Vec::new();
    for (ai, (aname, _)) in youngs.iter().enumerate() {
        for (si, s) in ORDERS.iter().enumerate() {
            let base = (ai * ORDERS.len() + si) * 2 * per_family;
            let take = |gi: usize| -> Result<Vec<[f64; 4]>, String> {
                results[base + gi * per_family..base + (gi + 1) * per_family].iter().cloned().collect()
            };
            let group = format!("A={aname}, s={s}");
            let (vc, vf) = match (take(0), take(1)) {
                (Ok(c), Ok(f)) => (c, f),
                (Err(e), _) | (_, Err(e)) => {
                    all_finite = false;
                    b.case(CaseRecord::failed(&group, "all pairs".into(), e));
                    continue;
                }
            };
            for x in 0..4 {
                for y in x + 1..4 {
                    let pair = format!("{}/{}", SPACES[x], SPACES[y]);
                    let (Some((lo_c, hi_c)), Some((lo_f, hi_f))) = (extremes(&vc, x, y), extremes(&vf, x, y)) else {
                        all_finite = false;
                        b.case(CaseRecord::failed(&group, pair, "ratio not finite"));
                        continue;
                    };
                    let c = hi_c.max(1.0 / lo_c).max(hi_f).max(1.0 / lo_f);
                    let drift = (hi_f / hi_c - 1.0).abs().max((lo_f / lo_c - 1.0).abs());
                    worst_c = worst_c.max(c);
                    worst_drift = worst_drift.max(drift);
                    let ok = c <= MAX_CONSTANT && drift <= STABILITY;
                    if !ok {
                        failures.push(format!("{group} {pair}"));
                    }
                    b.case(
                        CaseRecord::new(&group, pair, c, MAX_CONSTANT, ok)
                            .with_note(format!("coarse [{lo_c:.6}, {hi_c:.6}], fine [{lo_f:.6}, {hi_f:.6}], drift {drift:.4}")),
                    );
                }
            }
        }
    }
    b.check("ratios-finite", all_finite, if all_finite { 1.0 } else { 0.0 }, 1.0, "every pairwise ratio finite and positive");
    b.check("constant-bound", worst_c <= MAX_CONSTANT, worst_c, MAX_CONSTANT, "largest C with all ratios in [1/C, C]");
    b.check(
        "extremal-stable",
        worst_drift <= STABILITY,
        worst_drift,
        STABILITY,
        if failures.is_empty() { "min and max ratios under N -> 2N".to_string() } else { format!("unstable: {}", failures.join("; ")) },
    );

    // Ratios do not see amplitude, nor whole-cell shifts of a function that
    // vanishes near the boundary (member 1 is a bump).
    let u = &fam_c[1].1;
    let scaled = u.scaled(3.7);
    let shifted = u.translated(&vec![5; u.n()]).expect("shift inside the box");
    let mut amp_err: f64 = 0.0;
    let mut shift_exact = true;
    let mut shift_err: f64 = 0.0;
    for (_, young) in &youngs {
        for s in ORDERS {
            let order = Order::new(s).unwrap();
            let (Ok(v0), Ok(v1), Ok(v2)) = (
                norms(young, order, u, settings.boundary),
                norms(young, order, &scaled, settings.boundary),
                norms(young, order, &shifted, settings.boundary),
            ) else {
                amp_err = f64::INFINITY;
                continue;
            };
            for x in 0..4 {
                for y in x + 1..4 {
                    amp_err = amp_err.max(rel_diff(v0[x] / v0[y], v1[x] / v1[y]));
                }
                if SPACES[x] == Space::F {
                    shift_err = shift_err.max(rel_diff(v0[x], v2[x]));
                } else {
                    shift_exact &= v0[x] == v2[x];
                }
            }
        }
    }
    b.check("amplitude-invariance", amp_err <= AMPLITUDE_TOL, amp_err, AMPLITUDE_TOL, "ratios of 3.7 u against u");
    b.check(
        "translation-invariance",
        shift_exact && shift_err <= SPECTRAL_SHIFT_TOL,
        shift_err,
        SPECTRAL_SHIFT_TOL,
        format!("W, B, O bitwise equal: {shift_exact}; value is the F deviation"),
    );
    Ok(b.finish())
}
