//! The generic core runs in `f32` and agrees with `f64` to single precision.

use orlicz_core::seminorm::{gagliardo, Boundary};
use orlicz_core::{FractionalOrder, Grid, Grid32, Young, Young32};

#[test]
fn luxemburg_norm_agrees_across_precisions() {
    let a64 = Young::power_log(1.5, 1.0).unwrap();
    let a32 = Young32::power_log(1.5, 1.0).unwrap();
    let u64 = Grid::from_fn(1, 128, 6.0, |x| (-x[0] * x[0]).exp()).unwrap();
    let u32 = Grid32::from_fn(1, 128, 6.0, |x| (-x[0] * x[0]).exp()).unwrap();
    let n64 = u64.luxemburg_norm(&a64);
    let n32 = u32.luxemburg_norm(&a32) as f64;
    assert!((n32 / n64 - 1.0).abs() < 1e-4, "{n32} vs {n64}");
}

#[test]
fn gagliardo_agrees_across_precisions() {
    let a64 = Young::power(2.0).unwrap();
    let a32 = Young32::power(2.0).unwrap();
    let u64 = Grid::from_fn(1, 64, 4.0, |x| (1.0 - x[0].abs()).max(0.0)).unwrap();
    let u32 = Grid32::from_fn(1, 64, 4.0, |x| (1.0 - x[0].abs()).max(0.0)).unwrap();
    let g64 = gagliardo(&a64, FractionalOrder::new(0.4).unwrap(), &u64, Boundary::Zero).unwrap().value;
    let g32 = gagliardo(&a32, FractionalOrder::new(0.4f32).unwrap(), &u32, Boundary::Zero).unwrap().value as f64;
    assert!((g32 / g64 - 1.0).abs() < 1e-4);
}

#[test]
fn conjugate_round_trip_in_single_precision() {
    let a = Young32::power(3.0).unwrap();
    let back = a.conjugate().unwrap().conjugate().unwrap();
    for t in [0.1f32, 1.0, 4.0] {
        assert!((back.eval(t) / a.eval(t) - 1.0).abs() < 1e-3);
    }
}
