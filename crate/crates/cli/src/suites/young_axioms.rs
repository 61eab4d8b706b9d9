//! Conjugation round trip and the inverse sandwich on random tables.

use rayon::prelude::*;

use super::{case_rng, log_space, random_table, rel_diff};
use crate::config::Settings;
use crate::report::{CaseRecord, SuiteBuilder, SuiteReport};

const ROUND_TRIP_TOL: f64 = 1e-8;
const UPPER_SLACK: f64 = 1e-9;
/// Rounding allowance on the lower bound, which holds with equality on
/// linear pieces.
const LOWER_SLACK: f64 = 1e-12;

fn one(seed: u64, k: usize) -> Vec<CaseRecord> {
    let mut rng = case_rng(seed, k as u64);
    let (desc, a) = random_table(&mut rng);
    let conj = match a.conjugate() {
        Ok(c) => c,
        Err(e) => return vec![CaseRecord::failed("double-conjugate", desc, e)],
    };
    let back = match conj.conjugate() {
        Ok(c) => c,
        Err(e) => return vec![CaseRecord::failed("double-conjugate", desc, e)],
    };
    let end = a.domain_end().unwrap_or(1e3);
    let mut ts = log_space(1e-3, 1e3, 100);
    if let orlicz_core::young::Shape::Tabulated(t) = a.shape() {
        ts.extend_from_slice(t.knots());
    }
    ts.push(end * 0.999);
    ts.push(end * 1.001);
    let worst = ts.iter().map(|&t| rel_diff(a.eval(t), back.eval(t))).fold(0.0, f64::max);

    let mut upper: f64 = 0.0;
    let mut lower = f64::INFINITY;
    for r in log_space(1e-4, 1e4, 100) {
        let prod = a.inverse(r) * conj.inverse(r);
        upper = upper.max(prod / (2.0 * r));
        lower = lower.min(prod / r);
    }
    vec![
        CaseRecord::new("double-conjugate", desc.clone(), worst, ROUND_TRIP_TOL, worst <= ROUND_TRIP_TOL),
        CaseRecord::new("sandwich-upper", desc.clone(), upper, 1.0 + UPPER_SLACK, upper <= 1.0 + UPPER_SLACK),
        CaseRecord::new("sandwich-lower", desc, 1.0, lower, lower >= 1.0 - LOWER_SLACK),
    ]
}

pub fn run(settings: &Settings) -> SuiteReport {
    let count = settings.cases_or(20);
    let mut b = SuiteBuilder::new("young-axioms", settings.seed);
    b.setting("functions", count)
        .setting("generator", "random piecewise-linear density")
        .tolerance("round_trip_rel", ROUND_TRIP_TOL)
        .tolerance("sandwich_upper_rel", UPPER_SLACK)
        .tolerance("sandwich_lower_rel", LOWER_SLACK);
    let cases: Vec<Vec<CaseRecord>> = (0..count).into_par_iter().map(|k| one(settings.seed, k)).collect();
    b.cases(cases.into_iter().flatten());
    b.finish()
}
