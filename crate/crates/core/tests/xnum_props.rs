use std::cmp::Ordering;

use escape_atlas::xnum::{SignedTower, TowerReal, MAX_HEIGHT};
use proptest::prelude::*;

fn tower() -> impl Strategy<Value = TowerReal> {
    (0u32..=6, 0.0f64..1.0).prop_map(|(h, m)| TowerReal::new(h, m).unwrap())
}

fn positive_real() -> impl Strategy<Value = f64> {
    prop_oneof![0.0f64..20.0, (-300.0f64..300.0).prop_map(|e| 10f64.powf(e))]
}

// Relative error budget for x -> tower -> x: the mantissa carries one
// rounding, which exp^h amplifies by the product of the intermediate levels.
fn round_trip_budget(x: f64) -> f64 {
    let mut cond = 1.0;
    let mut v = x;
    while v >= 1.0 {
        v = v.ln();
        cond *= v.max(1.0);
    }
    4.0 * f64::EPSILON * cond
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20_000))]

    #[test]
    fn from_real_is_monotone(x in positive_real(), y in positive_real()) {
        prop_assume!(x != y);
        let (x, y) = if x < y { (x, y) } else { (y, x) };
        let (a, b) = (TowerReal::from_real(x).unwrap(), TowerReal::from_real(y).unwrap());
        prop_assert_eq!(a.cmp(&b), Ordering::Less);
    }

    #[test]
    fn normalization_is_idempotent(h in 0u32..=8, m in 0.0f64..50.0) {
        let once = TowerReal::new(h, m).unwrap();
        let twice = TowerReal::new(once.height(), once.mantissa()).unwrap();
        prop_assert_eq!(once, twice);
        prop_assert!((0.0..1.0).contains(&once.mantissa()));
    }

    #[test]
    fn exp_ln_inverse(a in tower()) {
        prop_assert_eq!(a.exp().unwrap().ln().unwrap(), a);
    }

    #[test]
    fn exp_preserves_order(a in tower(), b in tower()) {
        prop_assume!(a != b);
        let (a, b) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(a.exp().unwrap() < b.exp().unwrap());
    }

    #[test]
    fn real_round_trip(x in positive_real()) {
        let back = TowerReal::from_real(x).unwrap().to_f64().unwrap();
        let rel = if x == 0.0 { back.abs() } else { (back - x).abs() / x };
        prop_assert!(rel <= round_trip_budget(x), "x={x} back={back} rel={rel}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2_000))]

    #[test]
    fn small_values_round_trip_within_four_ulp(x in 0.0f64..std::f64::consts::E.exp()) {
        let back = TowerReal::from_real(x).unwrap().to_f64().unwrap();
        let ulps = (back.to_bits() as i64 - x.to_bits() as i64).unsigned_abs();
        // below e^e the mantissa passes through at most two logarithms
        prop_assert!(ulps <= 4 || (back - x).abs() <= 4.0 * f64::EPSILON * x.max(1.0), "x={x} back={back}");
    }

    #[test]
    fn order_agrees_with_reals(x in positive_real(), y in positive_real()) {
        let (a, b) = (TowerReal::from_real(x).unwrap(), TowerReal::from_real(y).unwrap());
        if x < y { prop_assert!(a <= b) } else if x > y { prop_assert!(a >= b) }
    }

    #[test]
    fn sum_dominates_operands(a in tower(), b in tower()) {
        let s = a.add(&b).unwrap();
        prop_assert!(s >= a && s >= b);
    }

    #[test]
    fn low_sums_match_floats(x in 0.0f64..2.7, y in 0.0f64..2.7) {
        let s = TowerReal::from_real(x).unwrap().add(&TowerReal::from_real(y).unwrap()).unwrap();
        prop_assert!((s.to_f64().unwrap() - (x + y)).abs() <= 8.0 * f64::EPSILON * (x + y).max(1.0));
    }

    #[test]
    fn text_round_trip_is_exact(a in tower()) {
        let s = a.to_string();
        prop_assert_eq!(s.parse::<TowerReal>().unwrap(), a);
    }

    #[test]
    fn signed_order_matches_floats(x in -1e6f64..1e6, y in -1e6f64..1e6) {
        let (a, b) = (SignedTower::from_f64(x).unwrap(), SignedTower::from_f64(y).unwrap());
        prop_assert_eq!(a.cmp(&b), x.partial_cmp(&y).unwrap());
    }
}

#[test]
fn saturation_is_reported() {
    let top = TowerReal::new(MAX_HEIGHT, 0.25).unwrap();
    assert!(top.exp().is_err());
    assert!(TowerReal::new(MAX_HEIGHT + 1, 0.25).is_err());
}
