use orlicz_core::convolve::{check_discrete_bound, check_l1_bound, conv_grid};
use orlicz_core::seminorm::{besov, gagliardo, oscillation, Boundary};
use orlicz_core::{Grid, Order, Sequence, Young};
use proptest::prelude::*;

fn young_strategy() -> impl Strategy<Value = Young> {
    prop_oneof![
        (1.05f64..4.0).prop_map(|p| Young::power(p).unwrap()),
        (1.1f64..3.0, 0.0f64..2.0).prop_map(|(p, a)| Young::power_log(p, a).unwrap()),
        Just(Young::exp()),
    ]
}

fn bump_grid(values: Vec<f64>) -> Grid {
    // Keep the support away from the box edges.
    let mut v = vec![0.0; 64];
    v[16..16 + values.len()].copy_from_slice(&values);
    Grid::new(1, 64, 4.0, v).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn young_inequality_holds(a in young_strategy(), s in 1e-3f64..1e2, t in 1e-3f64..1e2) {
        let conj = a.conjugate().unwrap();
        let rhs = a.eval(s) + conj.eval(t);
        prop_assert!(s * t <= rhs * (1.0 + 1e-6) + 1e-12);
    }

    #[test]
    fn inverse_sandwich(a in young_strategy(), r in 1e-4f64..1e4) {
        let conj = a.conjugate().unwrap();
        let prod = a.inverse(r) * conj.inverse(r);
        prop_assert!(prod >= r * (1.0 - 1e-6));
        prop_assert!(prod <= 2.0 * r * (1.0 + 1e-6));
    }

    #[test]
    fn luxemburg_is_homogeneous_and_monotone(
        a in young_strategy(),
        values in prop::collection::vec(-3.0f64..3.0, 1..32),
        c in 0.1f64..10.0,
    ) {
        let u = bump_grid(values);
        let n = u.luxemburg_norm(&a);
        prop_assume!(n > 0.0);
        let nc = u.scaled(c).luxemburg_norm(&a);
        prop_assert!((nc / (c * n) - 1.0).abs() < 1e-9);
        let bigger = u.map(|v| v.abs() * 1.5).unwrap();
        prop_assert!(bigger.luxemburg_norm(&a) >= n * (1.0 - 1e-12));
    }

    #[test]
    fn rearrangement_preserves_norm(a in young_strategy(), values in prop::collection::vec(-3.0f64..3.0, 1..32)) {
        let u = bump_grid(values.clone());
        let mut rev = values;
        rev.reverse();
        let v = bump_grid(rev);
        prop_assert_eq!(u.luxemburg_norm(&a), v.luxemburg_norm(&a));
    }

    #[test]
    fn discrete_convolution_bound(
        a in young_strategy(),
        x in prop::collection::vec(-2.0f64..2.0, 1..16),
        y in prop::collection::vec(-2.0f64..2.0, 1..16),
        off in -5i64..5,
    ) {
        let r = check_discrete_bound(&a, &Sequence::new(off, x).unwrap(), &Sequence::new(0, y).unwrap());
        prop_assert!(r.holds(1e-12), "{:?}", r);
    }

    #[test]
    fn grid_convolution_bound_and_symmetry(
        a in young_strategy(),
        x in prop::collection::vec(-2.0f64..2.0, 1..24),
        y in prop::collection::vec(-2.0f64..2.0, 1..24),
    ) {
        let (u, v) = (bump_grid(x), bump_grid(y));
        prop_assert!(check_l1_bound(&a, &u, &v).unwrap().holds(1e-6));
        prop_assert_eq!(conv_grid(&u, &v).unwrap(), conv_grid(&v, &u).unwrap());
    }

    #[test]
    fn seminorms_are_translation_invariant_and_homogeneous(
        values in prop::collection::vec(-1.0f64..1.0, 2..20),
        shift in -8i64..8,
        s in 0.1f64..0.9,
        c in 0.2f64..5.0,
    ) {
        let a = Young::power_log(2.0, 1.0).unwrap();
        let s = Order::new(s).unwrap();
        let u = bump_grid(values);
        let v = u.translated(&[shift]).unwrap();
        for f in [gagliardo, besov, oscillation] {
            let x = f(&a, s, &u, Boundary::Zero).unwrap().value;
            prop_assert_eq!(x, f(&a, s, &v, Boundary::Zero).unwrap().value);
            let y = f(&a, s, &u.scaled(c), Boundary::Zero).unwrap().value;
            if x > 0.0 {
                prop_assert!((y / (c * x) - 1.0).abs() < 1e-9);
            }
        }
    }
}
