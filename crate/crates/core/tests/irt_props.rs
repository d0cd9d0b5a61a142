mod common;

use std::collections::BTreeMap;

use proptest::prelude::*;
use quizcal_core::irt::{
    calibrate_items, estimate_skill, item_response_probability, read_traits_csv, write_traits_csv, IrtConfig,
    LatentTraits,
};

fn cfg() -> IrtConfig {
    IrtConfig::default()
}

proptest! {
    #[test]
    fn half_at_difficulty(a in -1.0f64..2.5, b in -5.0f64..5.0) {
        prop_assert_eq!(item_response_probability(b, &LatentTraits::clamped(b, a), &cfg()), 0.5);
    }

    #[test]
    fn point_symmetry(theta in -5.0f64..5.0, a in -1.0f64..2.5, b in -2.5f64..2.5) {
        let t = LatentTraits::clamped(b, a);
        let sum = item_response_probability(theta, &t, &cfg()) + item_response_probability(2.0 * b - theta, &t, &cfg());
        prop_assert!((sum - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn monotone_in_skill(x in -5.0f64..4.9, dx in 0.01f64..0.1, a in 0.05f64..2.5, b in -2.0f64..2.0) {
        let up = LatentTraits::clamped(b, a);
        let down = LatentTraits::clamped(b, -a.min(1.0));
        let flat = LatentTraits::clamped(b, 0.0);
        prop_assert!(item_response_probability(x + dx, &up, &cfg()) > item_response_probability(x, &up, &cfg()));
        prop_assert!(item_response_probability(x + dx, &down, &cfg()) < item_response_probability(x, &down, &cfg()));
        prop_assert_eq!(item_response_probability(x, &flat, &cfg()), 0.5);
    }

    #[test]
    fn matches_textbook_formula(theta in -5.0f64..5.0, a in -1.0f64..2.5, b in -5.0f64..5.0) {
        let p = item_response_probability(theta, &LatentTraits::clamped(b, a), &cfg());
        prop_assert!((p - common::naive_probability(theta, a, b, 1.7)).abs() < 1e-12);
    }

    #[test]
    fn skill_matches_fine_grid(items in prop::collection::vec((-3.0f64..3.0, 0.2f64..2.5, any::<bool>()), 5)) {
        let answered: Vec<(LatentTraits, bool)> = items.iter().map(|&(b, a, c)| (LatentTraits::clamped(b, a), c)).collect();
        let got = estimate_skill(&answered, &cfg()).theta;
        let oracle = common::grid_argmax_skill(&answered, &cfg(), 10_001);
        // On a flat optimum, compare likelihoods instead of locations.
        let f = |x| common::naive_skill_log_likelihood(x, &answered, 1.7);
        prop_assert!((got - oracle).abs() <= 1e-3 || f(got) >= f(oracle) - 1e-9, "got {got}, grid {oracle}");
    }
}

#[test]
fn gradient_matches_finite_differences() {
    for seed in 0..100 {
        let e = common::gradient_check(seed);
        assert!(e < 1e-4, "seed {seed}: relative error {e}");
    }
}

#[test]
fn calibration_ascends_monotonically() {
    for seed in 0..5 {
        let (a, _, _) = common::gradient_instance(seed);
        let cal = calibrate_items(&a, &cfg(), seed).unwrap();
        for w in cal.history.windows(2) {
            assert!(w[1] >= w[0] - 1e-9 * w[0].abs().max(1.0), "{:?}", cal.history);
        }
    }
}

#[test]
fn symmetric_pair_gives_zero_skill() {
    let answered = [
        (LatentTraits::clamped(-1.0, 1.0), true),
        (LatentTraits::clamped(1.0, 1.0), false),
    ];
    assert!(estimate_skill(&answered, &cfg()).theta.abs() <= 1e-3);
    assert_eq!(estimate_skill(&[], &cfg()).theta, 0.0);
}

#[test]
fn traits_csv_round_trip_at_six_decimals() {
    let traits = BTreeMap::from([
        ("q1".to_owned(), LatentTraits::clamped(0.1234567, 1.5)),
        ("q2".to_owned(), LatentTraits::clamped(-4.0, -0.25)),
    ]);
    let mut buf = Vec::new();
    write_traits_csv(&mut buf, &traits).unwrap();
    let text = String::from_utf8(buf.clone()).unwrap();
    assert!(text.starts_with("question_id,difficulty,discrimination\n"));
    assert!(text.contains("q1,0.123457,1.500000"));
    let back = read_traits_csv(buf.as_slice()).unwrap();
    assert_eq!(back["q2"], traits["q2"]);
}
