//! Whole-cell translations and the power-case dilation law.

use orlicz_core::seminorm::{besov, full_norm, gagliardo};
use orlicz_core::{Boundary, Grid, Order, Space, Young};
use rayon::prelude::*;

use super::{rel_diff, SuiteError};
use crate::config::Settings;
use crate::family::{sample, Generator, GridSpec};
use crate::report::{CaseRecord, SuiteBuilder, SuiteReport};

const DILATION_TOL: f64 = 0.02;
const SPECTRAL_SHIFT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Norm {
    La,
    Space(Space),
}

impl std::fmt::Display for Norm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Norm::La => write!(f, "LA"),
            Norm::Space(s) => write!(f, "{s}"),
        }
    }
}

const NORMS: [Norm; 5] = [Norm::La, Norm::Space(Space::W), Norm::Space(Space::B), Norm::Space(Space::O), Norm::Space(Space::F)];

fn eval(norm: Norm, young: &Young, s: Order, u: &Grid, boundary: Boundary) -> Result<f64, String> {
    match norm {
        Norm::La => Ok(u.luxemburg_norm(young)),
        Norm::Space(space) => full_norm(space, young, s, u, boundary).map_err(|e| e.to_string()),
    }
}

fn translation_cases(settings: &Settings) -> Vec<CaseRecord> {
    let youngs = [("power(2)", Young::power(2.0).unwrap()), ("powerlog(2,1)", Young::power_log(2.0, 1.0).unwrap())];
    let one_d = GridSpec { n: 1, points: settings.ratio_points, half_width: settings.half_width };
    let two_d = GridSpec { n: 2, points: 32, half_width: settings.half_width / 2.0 };
    let mut tasks = Vec::new();
    for (grid, g, shift) in [
        (one_d, Generator::Bump { center: 0.3, width: 1.5 }, vec![3i64]),
        (one_d, Generator::Bump { center: -1.0, width: 2.0 }, vec![-37]),
        (two_d, Generator::Bump { center: 0.2, width: 1.0 }, vec![2, -3]),
    ] {
        for (name, young) in &youngs {
            for s in [0.4, 1.5] {
                for norm in NORMS {
                    tasks.push((grid, g, shift.clone(), *name, young.clone(), s, norm));
                }
            }
        }
    }
    tasks
        .into_par_iter()
        .map(|(grid, g, shift, name, young, s, norm)| {
            let inputs = format!("{norm}, A={name}, s={s}, u={g}, n={}, shift={shift:?}", grid.n);
            let res = (|| {
                let u = sample(g, grid).map_err(|e| e.to_string())?;
                let v = u.translated(&shift).map_err(|e| e.to_string())?;
                let order = Order::new(s).unwrap();
                Ok::<_, String>((eval(norm, &young, order, &u, Boundary::Zero)?, eval(norm, &young, order, &v, Boundary::Zero)?))
            })();
            match res {
                Ok((a, b)) => {
                    let ok = if norm == Norm::Space(Space::F) { rel_diff(a, b) <= SPECTRAL_SHIFT_TOL } else { a == b };
                    CaseRecord::new("translation", inputs, b, a, ok).with_note(format!("relative change {:e}", rel_diff(a, b)))
                }
                Err(e) => CaseRecord::failed("translation", inputs, e),
            }
        })
        .collect()
}

/// Signed deviation of `|u(2.)| / |u|` from `2^{s - n/p}`, Gagliardo then
/// Besov.
fn dilation(p: f64, s: f64, width: f64, grid: GridSpec) -> Result<[f64; 2], String> {
    let young = Young::power(p).unwrap();
    let order = Order::new(s).unwrap();
    let u = sample(Generator::Gaussian { center: 0.0, width }, grid).map_err(|e| e.to_string())?;
    let v = sample(Generator::Gaussian { center: 0.0, width: width / 2.0 }, grid).map_err(|e| e.to_string())?;
    let expected = 2f64.powf(s - grid.n as f64 / p);
    let err = |e: orlicz_core::seminorm::SeminormError| e.to_string();
    let values = [
        [
            gagliardo(&young, order, &u, Boundary::Zero).map_err(err)?.value,
            gagliardo(&young, order, &v, Boundary::Zero).map_err(err)?.value,
        ],
        [besov(&young, order, &u, Boundary::Zero).map_err(err)?.value, besov(&young, order, &v, Boundary::Zero).map_err(err)?.value],
    ];
    Ok(values.map(|[a, b]| b / a / expected - 1.0))
}

pub fn run(settings: &Settings) -> Result<SuiteReport, SuiteError> {
    let mut b = SuiteBuilder::new("invariance", settings.seed);
    for (k, v) in settings.record() {
        b.setting(&k, v);
    }
    b.tolerance("dilation_rel", DILATION_TOL).tolerance("spectral_shift_rel", SPECTRAL_SHIFT_TOL);

    let cases = translation_cases(settings);
    let exact = cases.iter().all(|c| c.pass);
    b.cases(cases);
    b.check("translation", exact, if exact { 0.0 } else { 1.0 }, 0.0, "LA, W, B, O bitwise; F to rounding");

    let coarse = GridSpec { n: 1, points: settings.points, half_width: settings.half_width };
    let fine = coarse.refined();
    let configs = [(2.0, 0.7, 0.5), (3.0, 0.5, 0.5), (1.5, 0.3, 0.5)];
    let results: Vec<(Result<[f64; 2], String>, Result<[f64; 2], String>)> =
        configs.par_iter().map(|&(p, s, w)| (dilation(p, s, w, coarse), dilation(p, s, w, fine))).collect();
    let mut worst: f64 = 0.0;
    let mut tightening = true;
    let mut all_ok = true;
    for ((p, s, w), (dc, df)) in configs.iter().zip(results) {
        let inputs = format!("A=power({p}), s={s}, u=gaussian(0,{w}), lambda=2");
        match (dc, df) {
            (Ok(dc), Ok(df)) => {
                for (k, name) in ["gagliardo", "besov"].iter().enumerate() {
                    let (ec, ef) = (dc[k].abs(), df[k].abs());
                    let ok = ef <= DILATION_TOL && ef <= ec;
                    tightening &= ef <= ec;
                    worst = worst.max(ef);
                    all_ok &= ok;
                    b.case(
                        CaseRecord::new(&format!("dilation-{name}"), inputs.clone(), ef, DILATION_TOL, ok)
                            .with_note(format!("signed error {:+.3e} at N={}, {:+.3e} at N={}", dc[k], coarse.points, df[k], fine.points)),
                    );
                }
            }
            (Err(e), _) | (_, Err(e)) => {
                all_ok = false;
                b.case(CaseRecord::failed("dilation", inputs, e));
            }
        }
    }
    b.check("dilation", all_ok, worst, DILATION_TOL, format!("worst relative error on the refined grid; tightening: {tightening}"));
    Ok(b.finish())
}
