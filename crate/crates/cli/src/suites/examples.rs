//! Growth of Sobolev-conjugate targets for power and power-log functions.

use orlicz_core::target::{target, HProfile};
use orlicz_core::young::Branch;
use orlicz_core::{Smoothness, Young};

use super::log_space;
use crate::config::Settings;
use crate::report::{CaseRecord, SuiteBuilder, SuiteReport};

const SLOPE_TOL: f64 = 1e-3;
const EXP_SLOPE_TOL: f64 = 2e-2;
/// Power-log targets are only equivalent to their model up to constants
/// inside logarithms, so local slopes converge slowly.
const LOG_SLOPE_TOL: f64 = 5e-2;

/// Subcritical `(n, sigma, p)` triples.
pub const POWER_GRID: [(usize, f64, f64); 12] = [
    (1, 0.2, 1.0),
    (1, 0.2, 2.0),
    (1, 0.2, 3.0),
    (1, 0.4, 1.0),
    (1, 0.4, 1.5),
    (1, 0.4, 2.0),
    (2, 0.5, 1.0),
    (2, 0.5, 2.0),
    (2, 0.5, 3.0),
    (2, 1.0, 1.0),
    (2, 1.0, 1.5),
    (2, 1.0, 1.8),
];

/// Least-squares slope of `y` against `x`.
pub fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

fn slope_case(group: &str, inputs: String, measured: f64, expected: f64, tol: f64) -> CaseRecord {
    let err = (measured - expected).abs();
    CaseRecord::new(group, inputs, err, tol, err <= tol).with_note(format!("slope {measured:.6}, expected {expected:.6}"))
}

fn power_slope(n: usize, sigma: f64, p: f64) -> Result<f64, String> {
    let params = Smoothness::new(n, sigma).map_err(|e| e.to_string())?;
    let b = target(&Young::power(p).map_err(|e| e.to_string())?, params).map_err(|e| e.to_string())?;
    let ts = log_space(1e-3, 1e3, 61);
    let x: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
    let y: Vec<f64> = ts.iter().map(|&t| b.eval(t).ln()).collect();
    Ok(ls_slope(&x, &y))
}

/// Largest `t` with `ln B(t) <= level`, by bisection in `ln t`.
fn level_point(b: &Young, level: f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if b.eval(mid).ln() <= level {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Secant slope of `ln ln B` against `ln t` where `ln B` runs from 500 to
/// 650, for `A` with the critical power near infinity.
fn critical_slope(n: usize, sigma: f64, p0: f64) -> Result<(f64, f64), String> {
    let params = Smoothness::new(n, sigma).map_err(|e| e.to_string())?;
    let crit = params.critical_power();
    let a = Young::spliced(Branch::Power(p0), Branch::Power(crit), 1.0).map_err(|e| e.to_string())?;
    let b = target(&a, params).map_err(|e| e.to_string())?;
    let t1 = level_point(&b, 500.0, 1e-3, 1e6);
    let t2 = level_point(&b, 650.0, 1e-3, 1e6);
    let slope = (b.eval(t2).ln().ln() - b.eval(t1).ln().ln()) / (t2 / t1).ln();
    Ok((slope, n as f64 / (n as f64 - sigma)))
}

/// Local log-log slope of `B(t) / (log-factor)` over `ts`, where the log
/// factor is `|ln t|^beta`.
fn corrected_slope(b: &Young, ts: &[f64], beta: f64) -> f64 {
    let x: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
    let y: Vec<f64> = ts.iter().map(|&t| b.eval(t).ln() - beta * t.ln().abs().ln()).collect();
    ls_slope(&x, &y)
}

pub fn run(settings: &Settings) -> SuiteReport {
    let mut b = SuiteBuilder::new("examples", settings.seed);
    b.tolerance("power_slope_abs", SLOPE_TOL)
        .tolerance("exponential_slope_abs", EXP_SLOPE_TOL)
        .tolerance("powerlog_slope_abs", LOG_SLOPE_TOL)
        .setting("power_fit", "least squares of ln B against ln t, 61 points in [1e-3, 1e3]");

    for (n, sigma, p) in POWER_GRID {
        let inputs = format!("n={n}, sigma={sigma}, A=power({p})");
        let expected = n as f64 * p / (n as f64 - sigma * p);
        b.case(match power_slope(n, sigma, p) {
            Ok(slope) => slope_case("power-slope", inputs, slope, expected, SLOPE_TOL),
            Err(e) => CaseRecord::failed("power-slope", inputs, e),
        });
    }

    let inputs = "n=1, sigma=0.4, A=spliced(zero=power(1.5), inf=power(2.5), at=1)".to_string();
    b.case(match critical_slope(1, 0.4, 1.5) {
        Ok((slope, expected)) => slope_case("critical-exponential", inputs, slope, expected, EXP_SLOPE_TOL),
        Err(e) => CaseRecord::failed("critical-exponential", inputs, e),
    });

    // Supercritical near infinity: the target blows up at a finite point.
    let params = Smoothness::new(1, 0.4).unwrap();
    let a = Young::spliced(Branch::Power(1.5), Branch::Power(3.0), 1.0).unwrap();
    let inputs = "n=1, sigma=0.4, A=spliced(zero=power(1.5), inf=power(3), at=1)".to_string();
    let sup = HProfile::new(&a, params).and_then(|prof| Ok((prof.t_infinity()?, prof.target()?)));
    b.case(match sup {
        Ok((t_inf, tgt)) => {
            let finite = t_inf.is_finite() && tgt.domain_end().is_some_and(|d| rel_diff_ok(d, t_inf));
            let blows_up = tgt.eval(t_inf * (1.0 + 1e-9)) == f64::INFINITY && tgt.eval(t_inf * 2.0) == f64::INFINITY;
            let below = tgt.eval(t_inf * 0.99).is_finite();
            CaseRecord::new("supercritical", inputs, t_inf, f64::INFINITY, finite && blows_up && below)
                .with_note(format!("t_inf = {t_inf}"))
        }
        Err(e) => CaseRecord::failed("supercritical", inputs, e),
    });

    // Power-log functions, near infinity and near zero.
    for (p, alpha) in [(1.5, 1.0), (2.0, -0.5)] {
        let (n, sigma) = (1usize, 0.4);
        let d = n as f64 - sigma * p;
        let expected = n as f64 * p / d;
        let beta = n as f64 * alpha / d;
        let inputs = format!("n={n}, sigma={sigma}, A=powerlog({p},{alpha}), t in [1e20, 1e30]");
        let res = Young::power_log(p, alpha)
            .map_err(|e| e.to_string())
            .and_then(|a| target(&a, Smoothness::new(n, sigma).unwrap()).map_err(|e| e.to_string()));
        b.case(match res {
            Ok(tgt) => {
                slope_case("powerlog-infinity", inputs, corrected_slope(&tgt, &log_space(1e20, 1e30, 21), beta), expected, LOG_SLOPE_TOL)
            }
            Err(e) => CaseRecord::failed("powerlog-infinity", inputs, e),
        });
    }
    for (p0, alpha0) in [(1.5, 1.0), (2.0, 0.5)] {
        let (n, sigma) = (1usize, 0.4);
        let d = n as f64 - sigma * p0;
        let expected = n as f64 * p0 / d;
        let beta = n as f64 * alpha0 / d;
        let inputs = format!("n={n}, sigma={sigma}, A=powerlog0({p0},{alpha0}), t in [1e-30, 1e-20]");
        let res = Young::power_log_zero(p0, alpha0)
            .map_err(|e| e.to_string())
            .and_then(|a| target(&a, Smoothness::new(n, sigma).unwrap()).map_err(|e| e.to_string()));
        b.case(match res {
            Ok(tgt) => {
                slope_case("powerlog-zero", inputs, corrected_slope(&tgt, &log_space(1e-30, 1e-20, 21), beta), expected, LOG_SLOPE_TOL)
            }
            Err(e) => CaseRecord::failed("powerlog-zero", inputs, e),
        });
    }
    b.finish()
}

fn rel_diff_ok(a: f64, b: f64) -> bool {
    super::rel_diff(a, b) <= 1e-9
}
