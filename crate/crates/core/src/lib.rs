//! Young functions, Orlicz and fractional Orlicz-Sobolev norms on sampled
//! grids, and the convolution and embedding inequalities between them.
//!
//! Every numerical type is generic over the scalar ([`Real`], implemented
//! for `f32` and `f64`). The aliases at the crate root fix `f64`, with `*32`
//! variants for single precision.
//!
//! ```
//! use orlicz_core::{Grid, Young};
//!
//! let a = Young::power(2.0).unwrap();
//! let u = Grid::from_fn(1, 64, 4.0, |x| (-x[0] * x[0]).exp()).unwrap();
//! let norm = u.luxemburg_norm(&a);
//! assert!((norm - (std::f64::consts::PI / 2.0).sqrt().sqrt()).abs() < 1e-6);
//! ```

pub mod convolve;
pub mod grammar;
pub mod grid;
pub mod io;
pub mod lp;
pub mod numeric;
pub mod scalar;
pub mod seminorm;
pub mod target;
pub mod young;

pub use convolve::{ConvolutionReport, NormAndModular};
pub use grid::{GridError, GridFunction, RealSequence, StepRearrangement, WeightedSamples};
pub use scalar::Real;
pub use seminorm::{Boundary, FractionalOrder, SeminormResult, Space};
pub use target::{Admissibility, SmoothnessParams};
pub use young::{Regime, YoungError, YoungFunction};

pub type Young = YoungFunction<f64>;
pub type Young32 = YoungFunction<f32>;
pub type Grid = GridFunction<f64>;
pub type Grid32 = GridFunction<f32>;
pub type Sequence = RealSequence<f64>;
pub type Sequence32 = RealSequence<f32>;
pub type Rearrangement = StepRearrangement<f64>;
pub type Order = FractionalOrder<f64>;
pub type Smoothness = SmoothnessParams<f64>;
pub type Partition = lp::DyadicPartition<f64>;
