//! Littlewood-Paley partition: telescoping reconstruction, annulus supports
//! and disjointness of non-neighbouring blocks.

use orlicz_core::lp::DyadicPartition;
use orlicz_core::Partition;
use rayon::prelude::*;

use crate::config::Settings;
use crate::family::{sample, Generator, GridSpec};
use crate::report::{CaseRecord, SuiteBuilder, SuiteReport};

const RECONSTRUCTION_TOL: f64 = 1e-10;

/// Highest trigonometric degree whose frequencies `pi |k| / L`, with
/// `|k_j| <= degree` on every axis, stay where the blocks sum to one.
fn max_degree(p: &Partition, grid: GridSpec) -> usize {
    let top = 2f64.powi(p.i_max() as i32);
    (top * grid.half_width / (std::f64::consts::PI * (grid.n as f64).sqrt())).floor() as usize
}

fn structure(p: &Partition) -> (bool, bool, usize) {
    let radii = p.radii();
    let mut supports = true;
    let mut disjoint = true;
    let mut checked = 0;
    for i in 0..=p.i_max() {
        let m = p.multiplier(i).unwrap();
        let (lo, hi) = if i == 0 { (0.0, 2.0) } else { (2f64.powi(i as i32 - 1), 2f64.powi(i as i32 + 1)) };
        for (&phi, &r) in m.iter().zip(radii) {
            if phi != 0.0 && !(lo <= r && r <= hi) {
                supports = false;
            }
        }
        for l in i + 2..=p.i_max() {
            let other = p.multiplier(l).unwrap();
            disjoint &= m.iter().zip(other).all(|(&a, &b)| a * b == 0.0);
            checked += 1;
        }
    }
    (supports, disjoint, checked)
}

pub fn run(settings: &Settings) -> SuiteReport {
    let count = settings.cases_or(20);
    let mut b = SuiteBuilder::new("partition", settings.seed);
    b.tolerance("reconstruction_rel", RECONSTRUCTION_TOL);
    let grids = [
        GridSpec { n: 1, points: settings.points, half_width: settings.half_width },
        GridSpec { n: 2, points: 64, half_width: settings.half_width / 2.0 },
    ];
    for grid in grids {
        let tag = format!("n={}, N={}, L={}", grid.n, grid.points, grid.half_width);
        let p = match DyadicPartition::new(grid.n, grid.points, grid.half_width) {
            Ok(p) => p,
            Err(e) => {
                b.check(&format!("partition {tag}"), false, f64::NAN, f64::NAN, e.to_string());
                continue;
            }
        };
        let (supports, disjoint, pairs) = structure(&p);
        b.check(&format!("annulus-support {tag}"), supports, p.i_max() as f64, f64::NAN, "phi_i vanishes outside its annulus");
        b.check(&format!("disjoint {tag}"), disjoint, pairs as f64, f64::NAN, "phi_i phi_l = 0 whenever |i - l| >= 2");

        let dmax = max_degree(&p, grid).min(if grid.n == 1 { 48 } else { 8 });
        b.setting(&format!("max_degree {tag}"), dmax);
        let cases: Vec<CaseRecord> = (0..count)
            .into_par_iter()
            .map(|k| {
                let degree = 1 + k % dmax.max(1);
                let g = Generator::Trigpoly { degree, seed: settings.seed.wrapping_mul(1000).wrapping_add(k as u64) };
                let inputs = format!("{g}, {tag}");
                let u = match sample(g, grid) {
                    Ok(u) => u,
                    Err(e) => return CaseRecord::failed("telescoping", inputs, e),
                };
                match p.blocks(&u) {
                    Ok(blocks) => {
                        let scale = u.sup_abs();
                        let err = (0..u.len())
                            .map(|j| (blocks.iter().map(|bl| bl.values()[j]).sum::<f64>() - u.values()[j]).abs())
                            .fold(0.0, f64::max)
                            / scale;
                        CaseRecord::new("telescoping", inputs, err, RECONSTRUCTION_TOL, err <= RECONSTRUCTION_TOL)
                    }
                    Err(e) => CaseRecord::failed("telescoping", inputs, e),
                }
            })
            .collect();
        b.cases(cases);
    }
    b.finish()
}
