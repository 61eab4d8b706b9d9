//! The Hardy-type inequality with constant one on random step functions.

use orlicz_core::seminorm::{hardy_check, PiecewiseLinear};
use orlicz_core::Young;
use rand::Rng;
use rayon::prelude::*;

use super::{case_rng, random_young};
use crate::config::Settings;
use crate::report::{CaseRecord, SuiteBuilder, SuiteReport};

const SLACK: f64 = 1e-6;
const CLOSED_FORM_TOL: f64 = 1e-6;

fn random_case(seed: u64, k: usize) -> CaseRecord {
    let mut rng = case_rng(seed, k as u64);
    let (desc, a) = random_young(&mut rng);
    let s = rng.gen_range(0.05..0.95);
    let steps = rng.gen_range(1..=8);
    let mut breaks = vec![rng.gen_range(-3.0f64..1.0).exp()];
    for _ in 0..steps {
        let last = *breaks.last().unwrap();
        breaks.push(last + rng.gen_range(-3.0f64..1.0).exp());
    }
    let values: Vec<f64> = (0..steps).map(|_| if rng.gen_bool(0.1) { 0.0 } else { rng.gen_range(0.0..2.0) }).collect();
    let inputs = format!("A={desc}, s={s}, breaks={breaks:?}, values={values:?}");
    let f = match PiecewiseLinear::from_steps(&breaks, &values) {
        Ok(f) => f,
        Err(e) => return CaseRecord::failed("random-step", inputs, e),
    };
    match hardy_check(&a, s, &f) {
        Ok(r) => CaseRecord::new("random-step", inputs, r.lhs, r.rhs, r.holds(SLACK)),
        Err(e) => CaseRecord::failed("random-step", inputs, e),
    }
}

pub fn run(settings: &Settings) -> SuiteReport {
    let count = settings.cases_or(100);
    let mut b = SuiteBuilder::new("hardy", settings.seed);
    b.setting("functions", count).tolerance("slack_rel", SLACK).tolerance("closed_form_abs", CLOSED_FORM_TOL);
    let cases: Vec<CaseRecord> = (0..count).into_par_iter().map(|k| random_case(settings.seed, k)).collect();
    b.cases(cases);

    // f(t) = t on [0, 1], A = t^2, s = 1/2: lhs = 1/4 + 1/12, rhs = 1.
    let a = Young::power(2.0).unwrap();
    let f = PiecewiseLinear::new(vec![0.0, 1.0], vec![0.0, 1.0]).unwrap();
    match hardy_check(&a, 0.5, &f) {
        Ok(r) => {
            let err = (r.lhs - 1.0 / 3.0).abs().max((r.rhs - 1.0).abs());
            b.check("closed-form", err <= CLOSED_FORM_TOL, err, CLOSED_FORM_TOL, format!("lhs {} (1/3), rhs {} (1)", r.lhs, r.rhs));
            b.case(CaseRecord::new("closed-form", "A=power(2), s=0.5, f=t on [0,1]".into(), r.lhs, r.rhs, r.holds(SLACK)));
        }
        Err(e) => b.check("closed-form", false, f64::NAN, CLOSED_FORM_TOL, e.to_string()),
    }
    b.finish()
}
