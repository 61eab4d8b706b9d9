//! Verification suites. Each suite turns one family of claims into cases
//! (inequalities with their margins) and checks (named pass/fail criteria).

use orlicz_core::young::Tabulated;
use orlicz_core::Young;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::config::Settings;
use crate::report::SuiteReport;

mod convolution;
mod embedding;
mod equivalence;
mod examples;
mod hardy;
mod invariance;
mod oracle;
mod partition;
mod young_axioms;

pub use convolution::SUB_SUITES as CONVOLUTION_SUB_SUITES;
pub use embedding::{run_embedding, EmbeddingParams};

pub const SUITES: &[&str] =
    &["young-axioms", "examples", "convolution", "hardy", "oracle", "equivalence", "embedding", "partition", "invariance"];

#[derive(Debug, Error)]
pub enum SuiteError {
    #[error("unknown suite {0:?}; expected one of {list}", list = SUITES.join(", "))]
    Unknown(String),
    #[error("unknown convolution sub-suite {0:?}; expected one of l1, discrete, sharp, oneil")]
    UnknownSubSuite(String),
    #[error("{0}")]
    Setup(String),
}

pub fn run_suite(name: &str, settings: &Settings) -> Result<SuiteReport, SuiteError> {
    match name {
        "young-axioms" => Ok(young_axioms::run(settings)),
        "examples" => Ok(examples::run(settings)),
        "convolution" => convolution::run(settings),
        "hardy" => Ok(hardy::run(settings)),
        "oracle" => Ok(oracle::run(settings)),
        "equivalence" => equivalence::run(settings),
        "embedding" => run_embedding(settings, &EmbeddingParams::default()),
        "partition" => Ok(partition::run(settings)),
        "invariance" => invariance::run(settings),
        other => Err(SuiteError::Unknown(other.to_string())),
    }
}

/// Independent stream `stream` of the run seed.
pub(crate) fn case_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Random convex piecewise-linear Young function: a nondecreasing density
/// that is linear between random knots, possibly with jumps, a flat zero
/// start, or a finite domain end.
pub(crate) fn random_table(rng: &mut ChaCha8Rng) -> (String, Young) {
    let segments = rng.gen_range(2..=7);
    let mut knots = vec![0.0];
    for _ in 1..segments {
        let last = *knots.last().unwrap();
        knots.push(last + rng.gen_range(-2.0f64..2.0).exp());
    }
    let flat_start = rng.gen_bool(0.25);
    let bounded = rng.gen_bool(0.2);
    let mut lo = Vec::with_capacity(segments);
    let mut hi = Vec::with_capacity(segments);
    let mut level: f64 = if flat_start { 0.0 } else { rng.gen_range(0.0..1.0) };
    for k in 0..segments {
        if k > 0 && (rng.gen_bool(0.5) || level == 0.0) {
            level += rng.gen_range(0.1..1.0);
        }
        lo.push(level);
        let unbounded_tail = k + 1 == segments && !bounded;
        if !unbounded_tail {
            let len = knots.get(k + 1).map_or(1.0, |&next| next - knots[k]);
            if !(flat_start && k == 0) {
                level += rng.gen_range(0.0..2.0) * len;
            }
            hi.push(level);
        }
    }
    let domain_end = bounded.then(|| knots[segments - 1] + rng.gen_range(-1.0f64..1.0).exp());
    let tail_slope = if bounded || rng.gen_bool(0.5) { 0.0 } else { rng.gen_range(0.0..1.0) };
    let desc = format!("table(knots={knots:?}, lo={lo:?}, hi={hi:?}, tail={tail_slope}, end={domain_end:?})");
    let table = Tabulated::new(knots, lo, hi, tail_slope, domain_end).expect("random table is convex");
    (desc, Young::tabulated(table))
}

/// A Young function drawn from the closed-form families or a random table.
pub(crate) fn random_young(rng: &mut ChaCha8Rng) -> (String, Young) {
    match rng.gen_range(0..4) {
        0 => {
            let p = rng.gen_range(1.0..4.0);
            (format!("power({p})"), Young::power(p).unwrap())
        }
        1 => {
            let p = rng.gen_range(1.1..3.0);
            let a = rng.gen_range(-0.5..2.0);
            (format!("powerlog({p},{a})"), Young::power_log(p, a).unwrap())
        }
        2 => ("exp()".to_string(), Young::exp()),
        _ => random_table(rng),
    }
}

/// `|a / b - 1|`, with equal values (including infinities) at distance 0.
pub(crate) fn rel_diff(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

/// `n` points spaced evenly in `ln t` over `[lo, hi]`.
pub(crate) fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|k| (a + (b - a) * k as f64 / (n - 1) as f64).exp()).collect()
}
