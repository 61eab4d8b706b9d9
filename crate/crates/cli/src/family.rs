//! Seeded test-function families.
//!
//! A family is a generator plus a member count. Member 0 is the generator
//! exactly as written; later members perturb it with a ChaCha8 stream keyed
//! by the member index, so members can be produced in any order.

use std::f64::consts::PI;
use std::fmt;

use orlicz_core::grammar::{parse_call, SpecError};
use orlicz_core::{Grid, GridError};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Recorded in reports next to every seed.
pub const PRNG: &str = "ChaCha8";

/// Share of `L^1` mass that gaussian and bump members keep at distance at
/// least `width` from the box boundary.
pub const MASS_FRACTION: f64 = 0.9999;

#[derive(Debug, Error)]
pub enum FamilyError {
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error("{name}: {msg}")]
    Args { name: String, msg: &'static str },
    #[error("unknown generator {0:?}")]
    Unknown(String),
    #[error("member {member}: only {fraction:.6} of the mass stays {width} away from the boundary")]
    BoundaryMass { member: usize, fraction: f64, width: f64 },
    #[error("member {0} is not finite")]
    NotFinite(usize),
    #[error(transparent)]
    Grid(#[from] GridError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Generator {
    Gaussian { center: f64, width: f64 },
    Bump { center: f64, width: f64 },
    Hat { center: f64, width: f64 },
    Trigpoly { degree: usize, seed: u64 },
    Step { breaks: usize, seed: u64 },
}

impl Generator {
    pub fn parse(spec: &str) -> Result<Self, FamilyError> {
        let call = parse_call(spec)?;
        let name = call.name.as_str();
        let arg = |i: usize, key: &str| call.positional.get(i).copied().or_else(|| call.keyword(key));
        let args_err = |msg| FamilyError::Args { name: name.to_string(), msg };
        let count = |v: Option<f64>, msg| match v {
            Some(x) if x >= 0.0 && x.fract() == 0.0 => Ok(x as u64),
            _ => Err(args_err(msg)),
        };
        match name {
            "gaussian" | "bump" | "hat" => {
                let center = arg(0, "center").ok_or_else(|| args_err("expected (center, width)"))?;
                let width = arg(1, "width").ok_or_else(|| args_err("expected (center, width)"))?;
                if !(width > 0.0 && width.is_finite() && center.is_finite()) {
                    return Err(args_err("width must be positive and center finite"));
                }
                Ok(match name {
                    "gaussian" => Generator::Gaussian { center, width },
                    "bump" => Generator::Bump { center, width },
                    _ => Generator::Hat { center, width },
                })
            }
            "trigpoly" => Ok(Generator::Trigpoly {
                degree: count(arg(0, "degree"), "expected (degree, seed) with integer arguments")? as usize,
                seed: count(arg(1, "seed"), "expected (degree, seed) with integer arguments")?,
            }),
            "step" => {
                let breaks = count(arg(0, "breaks"), "expected (breaks, seed) with integer arguments")? as usize;
                if breaks == 0 {
                    return Err(args_err("need at least one break"));
                }
                Ok(Generator::Step { breaks, seed: count(arg(1, "seed"), "expected (breaks, seed) with integer arguments")? })
            }
            other => Err(FamilyError::Unknown(other.to_string())),
        }
    }

    fn localized(&self) -> Option<(f64, f64)> {
        match *self {
            Generator::Gaussian { center, width } | Generator::Bump { center, width } => Some((center, width)),
            _ => None,
        }
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Generator::Gaussian { center, width } => write!(f, "gaussian({center},{width})"),
            Generator::Bump { center, width } => write!(f, "bump({center},{width})"),
            Generator::Hat { center, width } => write!(f, "hat({center},{width})"),
            Generator::Trigpoly { degree, seed } => write!(f, "trigpoly({degree},{seed})"),
            Generator::Step { breaks, seed } => write!(f, "step({breaks},{seed})"),
        }
    }
}

/// Grid shared by all members.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub n: usize,
    pub points: usize,
    pub half_width: f64,
}

impl GridSpec {
    pub fn refined(self) -> Self {
        Self { points: 2 * self.points, ..self }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FunctionFamily {
    pub generator: Generator,
    pub count: usize,
    pub grid: GridSpec,
    /// Drives member perturbations of gaussian, bump and hat generators.
    pub seed: u64,
}

fn member_rng(seed: u64, member: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(member as u64);
    rng
}

fn gaussian(r2: f64, width: f64) -> f64 {
    (-0.5 * r2 / (width * width)).exp()
}

/// `exp(1 - 1 / (1 - |x|^2 / w^2))` inside the ball of radius `w`, peak 1.
fn bump(r2: f64, width: f64) -> f64 {
    let q = r2 / (width * width);
    if q < 1.0 {
        (1.0 - 1.0 / (1.0 - q)).exp()
    } else {
        0.0
    }
}

fn hat(r2: f64, width: f64) -> f64 {
    (1.0 - r2.sqrt() / width).max(0.0)
}

impl FunctionFamily {
    pub fn new(generator: Generator, count: usize, grid: GridSpec, seed: u64) -> Self {
        Self { generator, count, grid, seed }
    }

    /// The concrete generator of one member.
    pub fn member_generator(&self, member: usize) -> Generator {
        if member == 0 {
            return self.generator;
        }
        let mut rng = member_rng(self.seed, member);
        match self.generator {
            Generator::Gaussian { center, width } | Generator::Bump { center, width } | Generator::Hat { center, width } => {
                let w = width * 2f64.powf(rng.gen_range(-0.5..0.5));
                let c = center + w * rng.gen_range(-1.0..1.0);
                match self.generator {
                    Generator::Gaussian { .. } => Generator::Gaussian { center: c, width: w },
                    Generator::Bump { .. } => Generator::Bump { center: c, width: w },
                    _ => Generator::Hat { center: c, width: w },
                }
            }
            Generator::Trigpoly { degree, seed } => Generator::Trigpoly { degree, seed: seed.wrapping_add(member as u64) },
            Generator::Step { breaks, seed } => Generator::Step { breaks, seed: seed.wrapping_add(member as u64) },
        }
    }

    pub fn generate_member(&self, member: usize) -> Result<Grid, FamilyError> {
        let g = self.member_generator(member);
        let u = sample(g, self.grid)?;
        if u.values().iter().any(|v| !v.is_finite()) {
            return Err(FamilyError::NotFinite(member));
        }
        if let Some((_, width)) = g.localized() {
            let fraction = interior_mass_fraction(&u, width);
            if fraction < MASS_FRACTION {
                return Err(FamilyError::BoundaryMass { member, fraction, width });
            }
        }
        Ok(u)
    }

    pub fn generate(&self) -> Result<Vec<Grid>, FamilyError> {
        (0..self.count).map(|k| self.generate_member(k)).collect()
    }
}

/// Samples one generator on the grid.
pub fn sample(g: Generator, grid: GridSpec) -> Result<Grid, FamilyError> {
    let GridSpec { n, points, half_width } = grid;
    let u = match g {
        Generator::Gaussian { center, width } | Generator::Bump { center, width } | Generator::Hat { center, width } => {
            let profile: fn(f64, f64) -> f64 = match g {
                Generator::Gaussian { .. } => gaussian,
                Generator::Bump { .. } => bump,
                _ => hat,
            };
            Grid::from_fn(n, points, half_width, |x| {
                let r2: f64 = x.iter().map(|&xi| (xi - center) * (xi - center)).sum();
                profile(r2, width)
            })?
        }
        Generator::Trigpoly { degree, seed } => {
            let modes = trig_modes(n, degree, seed);
            let k0 = PI / half_width;
            Grid::from_fn(n, points, half_width, |x| {
                modes
                    .iter()
                    .map(|m| {
                        let phase = k0 * (m.k[0] as f64 * x[0] + m.k[1] as f64 * x.get(1).copied().unwrap_or(0.0));
                        m.cos * phase.cos() + m.sin * phase.sin()
                    })
                    .sum()
            })?
        }
        Generator::Step { breaks, seed } => {
            let mut rng = member_rng(seed, 0);
            let axes: Vec<(Vec<f64>, Vec<f64>)> = (0..n)
                .map(|_| {
                    let inner = 0.875 * half_width;
                    let mut cuts: Vec<f64> = (0..breaks).map(|_| rng.gen_range(-inner..inner)).collect();
                    cuts.sort_by(f64::total_cmp);
                    let levels: Vec<f64> = (0..=breaks).map(|_| rng.gen_range(-1.0..1.0)).collect();
                    (cuts, levels)
                })
                .collect();
            Grid::from_fn(n, points, half_width, |x| {
                axes.iter().zip(x).map(|((cuts, levels), &xi)| levels[cuts.partition_point(|&c| c <= xi)]).product()
            })?
        }
    };
    Ok(u)
}

#[derive(Debug, Clone, Copy)]
struct Mode {
    k: [i64; 2],
    cos: f64,
    sin: f64,
}

/// Frequencies with `|k_j| <= degree` in a half space (so each real mode
/// appears once) and coefficients uniform in `[-1, 1]`.
fn trig_modes(n: usize, degree: usize, seed: u64) -> Vec<Mode> {
    let d = degree as i64;
    let mut rng = member_rng(seed, 0);
    let mut out = Vec::new();
    let k1_range = if n == 1 { 0..=0 } else { -d..=d };
    for k0 in 0..=d {
        for k1 in k1_range.clone() {
            if k0 == 0 && k1 < 0 {
                continue;
            }
            let cos = rng.gen_range(-1.0..1.0);
            let sin = if k0 == 0 && k1 == 0 { 0.0 } else { rng.gen_range(-1.0..1.0) };
            out.push(Mode { k: [k0, k1], cos, sin });
        }
    }
    out
}

/// Fraction of `sum |u|` on cells at distance `>= width` from the boundary.
pub fn interior_mass_fraction(u: &Grid, width: f64) -> f64 {
    let l = u.half_width();
    let mut inner = 0.0;
    let mut total = 0.0;
    for (flat, v) in u.values().iter().enumerate() {
        let idx = u.index(flat);
        let dist = (0..u.n())
            .map(|a| {
                let x = u.coord(idx[a]);
                (x + l).min(l - x)
            })
            .fold(f64::INFINITY, f64::min);
        total += v.abs();
        if dist >= width {
            inner += v.abs();
        }
    }
    if total == 0.0 {
        1.0
    } else {
        inner / total
    }
}

/// Smooth localized family used by the norm suites: gaussians and bumps
/// centred near the origin, alternating.
pub fn smooth_family(grid: GridSpec, count: usize, seed: u64) -> Result<Vec<(String, Grid)>, FamilyError> {
    let gaussians = FunctionFamily::new(Generator::Gaussian { center: 0.0, width: 0.75 }, count.div_ceil(2), grid, seed);
    let bumps = FunctionFamily::new(Generator::Bump { center: 0.0, width: 1.5 }, count / 2, grid, seed ^ 0x9e37_79b9);
    let mut out = Vec::with_capacity(count);
    for k in 0..count {
        let fam = if k % 2 == 0 { &gaussians } else { &bumps };
        let member = k / 2;
        out.push((fam.member_generator(member).to_string(), fam.generate_member(member)?));
    }
    Ok(out)
}
