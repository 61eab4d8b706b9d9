//! Convolution bounds: sequences, `L^1` kernels, the O'Neil bound and the
//! sharp Orlicz target.

use orlicz_core::convolve::{check_discrete_bound, check_l1_bound, check_sharp_bound, check_sharp_modular, oneil_check, SharpSetup};
use orlicz_core::{Grid, Sequence, Smoothness, Young};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{case_rng, random_young, SuiteError};
use crate::config::Settings;
use crate::family::{sample, Generator, GridSpec};
use crate::report::{CaseRecord, SuiteBuilder, SuiteReport};

pub const SUB_SUITES: &[&str] = &["discrete", "l1", "oneil", "sharp"];

const DISCRETE_SLACK: f64 = 1e-12;
const GRID_SLACK: f64 = 1e-6;
const STABILITY: f64 = 0.10;

/// Stream offsets keep the sub-suites' random cases independent.
const STREAM_DISCRETE: u64 = 0;
const STREAM_L1: u64 = 1 << 32;
const STREAM_ONEIL: u64 = 2 << 32;
const STREAM_SHARP: u64 = 3 << 32;

fn random_sequence(rng: &mut ChaCha8Rng) -> Sequence {
    let len = rng.gen_range(1..=16);
    let offset = rng.gen_range(-8..=8);
    let values = (0..len).map(|_| if rng.gen_bool(0.15) { 0.0 } else { rng.gen_range(-2.0..2.0) }).collect();
    Sequence::new(offset, values).unwrap()
}

/// A random localized or oscillating generator scaled to the box.
pub(crate) fn random_generator(rng: &mut ChaCha8Rng, half_width: f64) -> Generator {
    let center = rng.gen_range(-0.25..0.25) * half_width;
    let width = rng.gen_range(0.05..0.125) * half_width;
    match rng.gen_range(0..5) {
        0 => Generator::Gaussian { center, width },
        1 => Generator::Bump { center, width: 2.0 * width },
        2 => Generator::Hat { center, width: 2.0 * width },
        3 => Generator::Step { breaks: rng.gen_range(1..=6), seed: rng.gen() },
        _ => Generator::Trigpoly { degree: rng.gen_range(0..=6), seed: rng.gen() },
    }
}

fn random_grid(rng: &mut ChaCha8Rng, grid: GridSpec) -> (String, Grid) {
    let g = random_generator(rng, grid.half_width);
    let amp = rng.gen_range(-3.0..3.0);
    let u = sample(g, grid).expect("valid grid").scaled(amp);
    (format!("{amp}*{g}"), u)
}

fn discrete(seed: u64, count: usize) -> Vec<CaseRecord> {
    (0..count)
        .into_par_iter()
        .flat_map_iter(|k| {
            let mut rng = case_rng(seed, STREAM_DISCRETE + k as u64);
            let (desc, a) = random_young(&mut rng);
            let x = random_sequence(&mut rng);
            let y = random_sequence(&mut rng);
            let inputs = format!("A={desc}, a={:?}@{}, b={:?}@{}", x.values(), x.offset(), y.values(), y.offset());
            let r = check_discrete_bound(&a, &x, &y);
            [
                CaseRecord::new("discrete-norm", inputs.clone(), r.norm.lhs, r.norm.rhs, r.norm.holds(DISCRETE_SLACK)),
                CaseRecord::new("discrete-modular", inputs, r.modular.lhs, r.modular.rhs, r.modular.holds(DISCRETE_SLACK)),
            ]
        })
        .collect()
}

/// Grid for case `k`: every fifth case is two-dimensional.
fn case_grid(settings: &Settings, k: usize) -> GridSpec {
    if k % 5 == 4 {
        GridSpec { n: 2, points: 32, half_width: settings.half_width / 2.0 }
    } else {
        GridSpec { n: 1, points: 256, half_width: settings.half_width }
    }
}

fn l1(settings: &Settings, count: usize) -> Vec<CaseRecord> {
    (0..count)
        .into_par_iter()
        .flat_map_iter(|k| {
            let mut rng = case_rng(settings.seed, STREAM_L1 + k as u64);
            let (desc, a) = random_young(&mut rng);
            let grid = case_grid(settings, k);
            let (ud, u) = random_grid(&mut rng, grid);
            let (vd, v) = random_grid(&mut rng, grid);
            let inputs = format!("A={desc}, u={ud}, v={vd}, n={}, N={}", grid.n, grid.points);
            match check_l1_bound(&a, &u, &v) {
                Ok(r) => vec![
                    CaseRecord::new("l1-norm", inputs.clone(), r.norm.lhs, r.norm.rhs, r.norm.holds(GRID_SLACK)),
                    CaseRecord::new("l1-modular", inputs, r.modular.lhs, r.modular.rhs, r.modular.holds(GRID_SLACK)),
                ],
                Err(e) => vec![CaseRecord::failed("l1-norm", inputs, e)],
            }
        })
        .collect()
}

fn oneil(settings: &Settings, count: usize) -> Vec<CaseRecord> {
    (0..count)
        .into_par_iter()
        .flat_map_iter(|k| {
            let mut rng = case_rng(settings.seed, STREAM_ONEIL + k as u64);
            let sigma = rng.gen_range(0.1..0.9);
            let params = Smoothness::new(1, sigma).unwrap();
            let grid = GridSpec { n: 1, points: 256, half_width: settings.half_width };
            let (ud, u) = random_grid(&mut rng, grid);
            let (vd, v) = random_grid(&mut rng, grid);
            [0.1, 1.0, 10.0]
                .into_iter()
                .map(|t| {
                    let inputs = format!("sigma={sigma}, t={t}, u={ud}, v={vd}");
                    match oneil_check(&u, &v, params, t) {
                        Ok(r) => CaseRecord::new("oneil", inputs, r.lhs, r.rhs, r.holds(GRID_SLACK)),
                        Err(e) => CaseRecord::failed("oneil", inputs, e),
                    }
                })
                .collect::<Vec<_>>()
        })
        .collect()
}

/// Sharp bound ratios on a coarse and a refined grid, then the modular form
/// with the constant calibrated on the coarse grid.
fn sharp(settings: &Settings, count: usize, b: &mut SuiteBuilder) {
    let a = Young::power(2.0).unwrap();
    let params = Smoothness::new(1, 0.4).unwrap();
    let setup = match SharpSetup::new(&a, params) {
        Ok(s) => s,
        Err(e) => {
            b.check("sharp-setup", false, f64::NAN, f64::NAN, e.to_string());
            return;
        }
    };
    let coarse = GridSpec { n: 1, points: settings.ratio_points, half_width: settings.half_width };
    let fine = coarse.refined();
    let pairs: Vec<(Generator, Generator)> = (0..count)
        .map(|k| {
            let mut rng = case_rng(settings.seed, STREAM_SHARP + k as u64);
            let hw = settings.half_width;
            // Smooth members only, so both grids resolve the same functions.
            let pick = |rng: &mut ChaCha8Rng| {
                let center = rng.gen_range(-0.25..0.25) * hw;
                let width = rng.gen_range(0.05..0.125) * hw;
                if rng.gen_bool(0.5) {
                    Generator::Gaussian { center, width }
                } else {
                    Generator::Bump { center, width: 2.0 * width }
                }
            };
            (pick(&mut rng), pick(&mut rng))
        })
        .collect();
    let ratios = |grid: GridSpec| -> Vec<Result<f64, String>> {
        pairs
            .par_iter()
            .map(|&(gu, gv)| {
                let u = sample(gu, grid).map_err(|e| e.to_string())?;
                let v = sample(gv, grid).map_err(|e| e.to_string())?;
                check_sharp_bound(&setup, &u, &v).map(|r| r.ratio()).map_err(|e| e.to_string())
            })
            .collect()
    };
    let rc = ratios(coarse);
    let rf = ratios(fine);
    let mut max_c: f64 = 0.0;
    let mut max_f: f64 = 0.0;
    let mut min_c = f64::INFINITY;
    let mut all_ok = true;
    for (k, ((gu, gv), (c, f))) in pairs.iter().zip(rc.iter().zip(&rf)).enumerate() {
        let inputs = format!("A=power(2), n=1, sigma=0.4, u={gu}, v={gv}");
        match (c, f) {
            (Ok(c), Ok(f)) => {
                let ok = c.is_finite() && f.is_finite() && *c > 0.0;
                all_ok &= ok;
                max_c = max_c.max(*c);
                min_c = min_c.min(*c);
                max_f = max_f.max(*f);
                b.case(
                    CaseRecord::new("sharp-ratio", inputs, *c, *f, ok).with_note(format!("pair {k}: coarse ratio (lhs) vs refined (rhs)")),
                );
            }
            (Err(e), _) | (_, Err(e)) => {
                all_ok = false;
                b.case(CaseRecord::failed("sharp-ratio", inputs, e));
            }
        }
    }
    b.check("sharp-ratios-finite", all_ok, max_c, f64::INFINITY, "every ratio finite and positive");
    b.check("sharp-spread", min_c > 0.0, max_c / min_c, f64::INFINITY, format!("max/min ratio over {count} pairs (recorded)"));
    let drift = (max_f / max_c - 1.0).abs();
    b.check("sharp-max-stable", drift <= STABILITY, drift, STABILITY, format!("max ratio {max_c:.6} -> {max_f:.6} under N -> 2N"));

    let c = (1.0 + STABILITY) * max_c;
    let mut worst: f64 = 0.0;
    let mut holds = true;
    for grid in [coarse, fine] {
        for (gu, gv) in &pairs {
            let (Ok(u), Ok(v)) = (sample(*gu, grid), sample(*gv, grid)) else { continue };
            match check_sharp_modular(&setup, &u, &v, c) {
                Ok(r) => {
                    holds &= r.holds(GRID_SLACK);
                    worst = worst.max(r.ratio());
                }
                Err(_) => holds = false,
            }
        }
    }
    b.check("sharp-modular", holds, worst, 1.0, format!("modular form with calibrated c = {c:.6}; value is the worst lhs/M"));
}

pub fn run(settings: &Settings) -> Result<SuiteReport, SuiteError> {
    let subs: Vec<&str> = match settings.sub_suite.as_deref() {
        None => SUB_SUITES.to_vec(),
        Some(s) if SUB_SUITES.contains(&s) => vec![s],
        Some(s) => return Err(SuiteError::UnknownSubSuite(s.to_string())),
    };
    let mut b = SuiteBuilder::new("convolution", settings.seed);
    b.setting("sub_suites", subs.join(","))
        .tolerance("discrete_rel", DISCRETE_SLACK)
        .tolerance("grid_rel", GRID_SLACK)
        .tolerance("stability_rel", STABILITY);
    for sub in subs {
        match sub {
            "discrete" => b.cases(discrete(settings.seed, settings.cases_or(1000))),
            "l1" => b.cases(l1(settings, settings.cases_or(100))),
            "oneil" => b.cases(oneil(settings, settings.cases_or(50))),
            _ => sharp(settings, settings.cases_or(30), &mut b),
        }
    }
    Ok(b.finish())
}
