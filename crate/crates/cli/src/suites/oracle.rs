//! Gagliardo and Besov modulars against direct pair sums.

use orlicz_core::seminorm::{besov_samples, gagliardo_samples};
use orlicz_core::{Boundary, Grid, Order, Young};
use rayon::prelude::*;

use super::rel_diff;
use crate::config::Settings;
use crate::family::{sample, Generator, GridSpec};
use crate::oracle::{besov_modular, gagliardo_modular, norm_by_bisection};
use crate::report::{CaseRecord, SuiteBuilder, SuiteReport};

const MODULAR_TOL: f64 = 1e-12;
const NORM_TOL: f64 = 1e-9;

fn functions(seed: u64) -> Vec<(Generator, usize, Young, &'static str, f64)> {
    vec![
        (Generator::Gaussian { center: 0.0, width: 0.4 }, 64, Young::power(1.5).unwrap(), "power(1.5)", 0.3),
        (Generator::Bump { center: 0.2, width: 0.8 }, 64, Young::power_log(2.0, 1.0).unwrap(), "powerlog(2,1)", 0.5),
        (Generator::Hat { center: -0.3, width: 0.6 }, 32, Young::power(2.0).unwrap(), "power(2)", 0.8),
        (Generator::Step { breaks: 3, seed }, 64, Young::power(1.2).unwrap(), "power(1.2)", 0.2),
        (Generator::Trigpoly { degree: 3, seed }, 32, Young::power_log(1.5, 0.5).unwrap(), "powerlog(1.5,0.5)", 0.6),
        (Generator::Gaussian { center: 0.5, width: 0.25 }, 16, Young::exp(), "exp()", 0.4),
        (Generator::Step { breaks: 6, seed: seed.wrapping_add(1) }, 32, Young::exp(), "exp()", 0.7),
        (Generator::Bump { center: -0.4, width: 0.5 }, 16, Young::power(3.0).unwrap(), "power(3)", 0.9),
        (Generator::Trigpoly { degree: 5, seed: seed.wrapping_add(2) }, 64, Young::power(2.0).unwrap(), "power(2)", 0.1),
        (Generator::Hat { center: 0.1, width: 1.2 }, 64, Young::power_log(3.0, -0.5).unwrap(), "powerlog(3,-0.5)", 0.5),
    ]
}

type Modular = fn(&Young, f64, &Grid, Boundary, f64) -> f64;

fn compare(
    group: &str,
    inputs: &str,
    young: &Young,
    s: f64,
    u: &Grid,
    boundary: Boundary,
    library: &orlicz_core::WeightedSamples<f64>,
    oracle: Modular,
) -> Vec<CaseRecord> {
    let norm = library.luxemburg(young);
    let mut out = Vec::new();
    for factor in [0.5, 1.0, 2.0] {
        let lambda = if norm > 0.0 { factor * norm } else { factor };
        let lib = library.modular(young, lambda);
        let direct = oracle(young, s, u, boundary, lambda);
        let err = rel_diff(lib, direct);
        out.push(
            CaseRecord::new(&format!("{group}-modular"), format!("{inputs}, lambda={lambda:e}"), err, MODULAR_TOL, err <= MODULAR_TOL)
                .with_note(format!("library {lib:e}, direct {direct:e}")),
        );
    }
    let direct_norm = norm_by_bisection(|l| oracle(young, s, u, boundary, l));
    let err = rel_diff(norm, direct_norm);
    out.push(
        CaseRecord::new(&format!("{group}-norm"), inputs.to_string(), err, NORM_TOL, err <= NORM_TOL)
            .with_note(format!("library {norm:e}, bisection {direct_norm:e}")),
    );
    out
}

pub fn run(settings: &Settings) -> SuiteReport {
    let mut b = SuiteBuilder::new("oracle", settings.seed);
    b.setting("half_width", 2.0).tolerance("modular_rel", MODULAR_TOL).tolerance("norm_rel", NORM_TOL);
    let cases: Vec<Vec<CaseRecord>> = functions(settings.seed)
        .into_par_iter()
        .map(|(g, points, young, name, s)| {
            let grid = GridSpec { n: 1, points, half_width: 2.0 };
            let inputs = format!("u={g}, N={points}, A={name}, s={s}");
            let u = match sample(g, grid) {
                Ok(u) => u,
                Err(e) => return vec![CaseRecord::failed("gagliardo-modular", inputs, e)],
            };
            let order = Order::new(s).unwrap();
            let mut out = Vec::new();
            for boundary in [Boundary::Zero, Boundary::Interior] {
                let inputs = format!("{inputs}, boundary={boundary:?}");
                match gagliardo_samples(order, &u, boundary) {
                    Ok(samples) => out.extend(compare("gagliardo", &inputs, &young, s, &u, boundary, &samples, gagliardo_modular)),
                    Err(e) => out.push(CaseRecord::failed("gagliardo-modular", inputs.clone(), e)),
                }
                match besov_samples(order, &u, boundary) {
                    Ok(samples) => out.extend(compare("besov", &inputs, &young, s, &u, boundary, &samples, besov_modular)),
                    Err(e) => out.push(CaseRecord::failed("besov-modular", inputs, e)),
                }
            }
            out
        })
        .collect();
    b.cases(cases.into_iter().flatten());
    b.finish()
}
