use chefs_hat::agents::introspective_confidence;
use chefs_hat::rivalry::{
    relative_performance, shaped_reward, similarity, RivalryReport, HumanProfile, ShapingCondition,
    TraitVector, MAX_SIMILARITY,
};
use proptest::prelude::*;

fn trait_vec() -> impl Strategy<Value = TraitVector> {
    (0.0..=5.0f64, 0.0..=5.0f64, 0.0..=5.0f64).prop_map(|(a, b, c)| TraitVector::new(a, b, c).unwrap())
}

fn condition() -> impl Strategy<Value = ShapingCondition> {
    prop_oneof![
        Just(ShapingCondition::Increase),
        Just(ShapingCondition::Decrease),
        Just(ShapingCondition::Maintain),
        Just(ShapingCondition::None),
    ]
}

proptest! {
    #[test]
    fn similarity_is_a_bounded_metric(x in trait_vec(), y in trait_vec(), z in trait_vec()) {
        prop_assert_eq!(similarity(&x, &x), 0.0);
        prop_assert!((similarity(&x, &y) - similarity(&y, &x)).abs() < 1e-12);
        prop_assert!(similarity(&x, &z) <= similarity(&x, &y) + similarity(&y, &z) + 1e-12);
        prop_assert!(similarity(&x, &y) <= MAX_SIMILARITY + 1e-12);
    }

    #[test]
    fn relative_performance_is_antisymmetric_and_bounded(a in 0u32..40, b in 0u32..40) {
        let p = relative_performance(a, b);
        prop_assert_eq!(p, -relative_performance(b, a));
        prop_assert!((-1.0..=1.0).contains(&p));
        if a.abs_diff(b) <= 15 {
            prop_assert!((p - (a as f64 - b as f64) / 15.0).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_lambda_leaves_rewards_alone(base in -1.0..1.0f64, r in -1.0..10.0f64, t in -1.0..10.0f64, c in condition()) {
        prop_assert_eq!(shaped_reward(base, c, r, 0.0, t), base);
        prop_assert_eq!(shaped_reward(base, ShapingCondition::None, r, 0.7, t), base);
    }

    #[test]
    fn shaping_directions(base in -1.0..1.0f64, r in 0.0..10.0f64, dr in 0.01..1.0f64, lambda in 0.01..1.0f64) {
        let inc = |r| shaped_reward(base, ShapingCondition::Increase, r, lambda, 0.0);
        let dec = |r| shaped_reward(base, ShapingCondition::Decrease, r, lambda, 0.0);
        prop_assert!(inc(r + dr) > inc(r));
        prop_assert!(dec(r + dr) < dec(r));
        let keep = |r| shaped_reward(base, ShapingCondition::Maintain, r, lambda, 3.0);
        prop_assert!(keep(3.0) >= keep(r));
    }

    #[test]
    fn confidence_is_monotone_in_unit_interval(q1 in -2.0..3.0f64, q2 in -2.0..3.0f64) {
        let (lo, hi) = if q1 <= q2 { (q1, q2) } else { (q2, q1) };
        let (a, b) = (introspective_confidence(lo), introspective_confidence(hi));
        prop_assert!((0.0..=1.0).contains(&a) && (0.0..=1.0).contains(&b));
        prop_assert!(a <= b);
    }

    #[test]
    fn rivalry_is_the_mean_of_its_parts(h in trait_vec(), a in trait_vec(), comp in 0.0..=5.0f64, ph in 0u32..20, pa in 0u32..20) {
        let profile = HumanProfile::new(h, comp).unwrap();
        let r = RivalryReport::compute(&profile, &a, ph, pa, Default::default());
        let expected = (similarity(&h, &a) + comp + relative_performance(ph, pa)) / 3.0;
        prop_assert!((r.rivalry - expected).abs() < 1e-12);
    }
}

#[test]
fn out_of_range_traits_are_rejected() {
    assert!(TraitVector::new(5.01, 0.0, 0.0).is_err());
    assert!(TraitVector::new(0.0, -0.01, 0.0).is_err());
    assert!(TraitVector::new(0.0, 0.0, f64::NAN).is_err());
    let ok = TraitVector::new(1.0, 2.0, 3.0).unwrap();
    assert!(HumanProfile::new(ok, 6.0).is_err());
}
