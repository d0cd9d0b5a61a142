mod common;

use std::collections::BTreeMap;

use proptest::prelude::*;
use quizcal_core::corpus::{Choice, Interaction, InteractionDataset, Question};
use quizcal_core::eval::{
    auc, classification_metrics, regression_metrics, run_ablation, sap_constant, sap_simulate, AblationSettings,
    MAJORITY_LABEL,
};
use quizcal_core::irt::{IrtConfig, LatentTraits, TraitKind};
use quizcal_core::regress::{default_search_space, fit_mean_baseline, RegressorKind};
use quizcal_core::textfeat::{FeatureGroups, FeatureMatrix};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

proptest! {
    #[test]
    fn auc_matches_pairwise_count(
        points in prop::collection::vec((0u8..20, any::<bool>()), 1..200)
    ) {
        // Small integer scores force plenty of ties.
        let scores: Vec<f64> = points.iter().map(|p| p.0 as f64 / 4.0).collect();
        let labels: Vec<bool> = points.iter().map(|p| p.1).collect();
        let got = auc(&scores, &labels);
        let want = common::pairwise_auc(&scores, &labels);
        match (got, want) {
            (Some(g), Some(w)) => prop_assert!((g - w).abs() <= 1e-12, "{} vs {}", g, w),
            (g, w) => prop_assert_eq!(g, w),
        }
    }

    #[test]
    fn mae_never_exceeds_rmse(
        pairs in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 1..100)
    ) {
        let (p, t): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        let m = regression_metrics(&p, &t, (-5.0, 5.0)).unwrap();
        prop_assert!(m.mae <= m.rmse + 1e-12);
        prop_assert!((m.relative_rmse - m.rmse / 10.0).abs() < 1e-15);
    }

    #[test]
    fn metrics_invariant_to_common_shift(
        pairs in prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 1..100),
        shift in -2.0f64..2.0,
    ) {
        let (p, t): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        let ps: Vec<f64> = p.iter().map(|v| v + shift).collect();
        let ts: Vec<f64> = t.iter().map(|v| v + shift).collect();
        let a = regression_metrics(&p, &t, (-5.0, 5.0)).unwrap();
        let b = regression_metrics(&ps, &ts, (-5.0, 5.0)).unwrap();
        prop_assert!((a.rmse - b.rmse).abs() < 1e-9);
        prop_assert!((a.relative_rmse - b.relative_rmse).abs() < 1e-9);
    }

    #[test]
    fn classification_counts_are_consistent(
        points in prop::collection::vec((0.0f64..1.0, any::<bool>()), 1..100)
    ) {
        let scores: Vec<f64> = points.iter().map(|p| p.0).collect();
        let labels: Vec<bool> = points.iter().map(|p| p.1).collect();
        let m = classification_metrics(&scores, &labels, 0.5).unwrap();
        let hits = scores.iter().zip(&labels).filter(|(s, l)| (**s > 0.5) == **l).count();
        prop_assert!((m.accuracy - hits as f64 / labels.len() as f64).abs() < 1e-15);
    }
}

fn random_items(rng: &mut ChaCha8Rng, n: usize) -> BTreeMap<String, LatentTraits> {
    (0..n)
        .map(|i| {
            (
                format!("q{i}"),
                LatentTraits::clamped(rng.random_range(-2.0..2.0), rng.random_range(0.3..2.0)),
            )
        })
        .collect()
}

#[test]
fn replay_ignores_later_answers() {
    let config = IrtConfig::default();
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let traits = random_items(&mut rng, 12);
        let ids: Vec<String> = traits.keys().cloned().collect();
        let answers: Vec<Interaction> = (0..12)
            .map(|k| Interaction {
                student_id: "s".into(),
                question_id: ids[k].clone(),
                correct: rng.random_bool(0.6),
                timestamp_ms: 10 * k as u64,
            })
            .collect();
        let cut = rng.random_range(1..11);
        let base = sap_simulate(&InteractionDataset::new(answers.clone()), &traits, &config).unwrap();

        // Shuffle and relabel the answers after `cut`, keeping them later in time.
        let mut tail: Vec<Interaction> = answers[cut..].to_vec();
        tail.shuffle(&mut rng);
        for (k, x) in tail.iter_mut().enumerate() {
            x.timestamp_ms = 1000 + k as u64;
            x.correct = rng.random_bool(0.5);
        }
        let mut changed = answers[..cut].to_vec();
        changed.extend(tail);
        changed.reverse();
        let other = sap_simulate(&InteractionDataset::new(changed), &traits, &config).unwrap();
        assert_eq!(base[..cut], other[..cut], "seed {seed}");
    }
}

#[test]
fn replay_students_are_independent() {
    let config = IrtConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let traits = random_items(&mut rng, 6);
    let mk = |s: &str, q: &str, c: bool, t: u64| Interaction {
        student_id: s.into(),
        question_id: q.into(),
        correct: c,
        timestamp_ms: t,
    };
    let alone = vec![mk("a", "q0", true, 1), mk("a", "q1", false, 2), mk("a", "q2", true, 3)];
    let mut mixed = alone.clone();
    mixed.insert(1, mk("b", "q3", false, 0));
    mixed.push(mk("b", "q4", false, 2));
    let r1 = sap_simulate(&InteractionDataset::new(alone), &traits, &config).unwrap();
    let r2 = sap_simulate(&InteractionDataset::new(mixed), &traits, &config).unwrap();
    let a_only: Vec<_> = r2.into_iter().filter(|r| r.student_id == "a").collect();
    assert_eq!(r1, a_only);
}

#[test]
fn constant_replay_matches_base_rate() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let answers: Vec<Interaction> = (0..200)
        .map(|k| Interaction {
            student_id: format!("s{}", k % 7),
            question_id: format!("q{}", k % 11),
            correct: rng.random_bool(0.7),
            timestamp_ms: k as u64,
        })
        .collect();
    let a = InteractionDataset::new(answers);
    let rate = a.correct_rate().unwrap();
    let recs = sap_constant(&a, rate);
    let scores: Vec<f64> = recs.iter().map(|r| r.score).collect();
    let labels: Vec<bool> = recs.iter().map(|r| r.label).collect();
    let m = classification_metrics(&scores, &labels, 0.5).unwrap();
    assert_eq!(m.auc, Some(0.5));
    assert!((m.accuracy - rate).abs() < 1e-12);
    assert_eq!(m.recall_correct, Some(1.0));
    assert_eq!(m.recall_wrong, Some(0.0));
}

fn question(id: &str, stem: &str) -> Question {
    Question::new(
        id,
        stem,
        vec![Choice::new("the first answer", true), Choice::new("another reply", false)],
    )
    .unwrap()
}

fn traits_for(questions: &[Question], rng: &mut ChaCha8Rng) -> BTreeMap<String, LatentTraits> {
    questions
        .iter()
        .map(|q| {
            (
                q.question_id.clone(),
                LatentTraits::clamped(rng.random_range(-2.0..2.0), rng.random_range(0.3..2.0)),
            )
        })
        .collect()
}

#[test]
fn ablation_with_identical_texts_ties_every_row() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let qs: Vec<Question> = (0..30)
        .map(|i| question(&format!("q{i:02}"), "Which planet orbits closest to the sun in our system?"))
        .collect();
    let traits = traits_for(&qs, &mut rng);
    let (train, test) = qs.split_at(20);
    let mut space = default_search_space(RegressorKind::Tree, false, 2, 5);
    space.k_folds = 4;
    let settings = AblationSettings { kind: RegressorKind::Tree, space };
    let report = run_ablation(train, test, &traits, &settings).unwrap();
    assert_eq!(report.rows.len(), 8);
    assert_eq!(report.rows.last().unwrap().label, MAJORITY_LABEL);
    for t in TraitKind::ALL {
        let y: Vec<f64> = train.iter().map(|q| t.of(&traits[&q.question_id])).collect();
        let truth: Vec<f64> = test.iter().map(|q| t.of(&traits[&q.question_id])).collect();
        let baseline = fit_mean_baseline(&y, t).unwrap();
        let pred = baseline.predict(&FeatureMatrix::raw(vec![Vec::new(); test.len()])).unwrap();
        let want = regression_metrics(&pred, &truth, t.range()).unwrap();
        for row in &report.rows {
            let got = row.result(t).metrics;
            assert!((got.rmse - want.rmse).abs() < 1e-9, "{} {}: {} vs {}", row.label, t.name(), got.rmse, want.rmse);
            assert!((got.mae - want.mae).abs() < 1e-9);
        }
    }
    for groups in FeatureGroups::ABLATION {
        assert!(report.row(Some(groups)).is_some());
    }
    assert_eq!(report.table().rows.len(), 8);
}
