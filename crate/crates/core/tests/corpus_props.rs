mod common;

use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use quizcal_core::corpus::{
    filter_min_interactions, split_questions, stratified_split_interactions, Choice, Interaction, InteractionDataset,
    Question, QuestionDataset,
};

fn dataset(pairs: &[(u8, u8, bool)]) -> InteractionDataset {
    InteractionDataset::new(
        pairs
            .iter()
            .enumerate()
            .map(|(t, &(s, q, c))| Interaction {
                student_id: format!("s{s}"),
                question_id: format!("q{q}"),
                correct: c,
                timestamp_ms: t as u64,
            })
            .collect(),
    )
}

fn pairs_strategy() -> impl Strategy<Value = Vec<(u8, u8, bool)>> {
    prop::collection::vec((0u8..8, 0u8..6, any::<bool>()), 0..80)
}

proptest! {
    #[test]
    fn filter_matches_one_entity_at_a_time_oracle(pairs in pairs_strategy(), min in 1usize..5) {
        let a = dataset(&pairs);
        let got: Vec<(String, String)> = filter_min_interactions(&a, min)
            .iter()
            .map(|i| (i.student_id.clone(), i.question_id.clone()))
            .collect();
        let all: Vec<(String, String)> = a.iter().map(|i| (i.student_id.clone(), i.question_id.clone())).collect();
        prop_assert_eq!(got, common::brute_force_filter(&all, min));
    }

    #[test]
    fn filter_is_a_fixed_point(pairs in pairs_strategy(), min in 1usize..5) {
        let once = filter_min_interactions(&dataset(&pairs), min);
        prop_assert_eq!(filter_min_interactions(&once, min), once);
    }

    #[test]
    fn stratified_split_partitions_every_question(
        pairs in prop::collection::vec((0u8..10, 0u8..5, any::<bool>()), 10..120),
        f in 0.05f64..0.95,
        seed in any::<u64>(),
    ) {
        let a = filter_min_interactions(&dataset(&pairs), 2);
        prop_assume!(!a.is_empty());
        let (gte, sap) = stratified_split_interactions(&a, f, seed).unwrap();
        prop_assert_eq!(gte.len() + sap.len(), a.len());
        let key = |i: &Interaction| (i.student_id.clone(), i.question_id.clone(), i.timestamp_ms);
        let g: BTreeSet<_> = gte.iter().map(key).collect();
        let s: BTreeSet<_> = sap.iter().map(key).collect();
        prop_assert!(g.is_disjoint(&s));
        let all: BTreeSet<_> = a.iter().map(key).collect();
        prop_assert_eq!(g.union(&s).cloned().collect::<BTreeSet<_>>(), all);
        prop_assert_eq!(gte.question_ids(), a.question_ids());
        prop_assert_eq!(sap.question_ids(), a.question_ids());
        // Both parts keep input order.
        let ts: Vec<u64> = gte.iter().map(|i| i.timestamp_ms).collect();
        prop_assert!(ts.windows(2).all(|w| w[0] < w[1]));
        // Same seed, same split.
        let (gte2, _) = stratified_split_interactions(&a, f, seed).unwrap();
        prop_assert_eq!(gte2, gte);
    }

    #[test]
    fn question_split_partitions(n in 2usize..40, f in 0.05f64..0.95, seed in any::<u64>()) {
        let qs: Vec<Question> = (0..n)
            .map(|i| Question::new(format!("q{i:03}"), "Stem?", vec![Choice::new("a", true), Choice::new("b", false)]).unwrap())
            .collect();
        let q = QuestionDataset::new(qs).unwrap();
        let (train, test) = split_questions(&q, f, seed).unwrap();
        prop_assert_eq!(train.len() + test.len(), n);
        prop_assert!(!train.is_empty() && !test.is_empty());
        let mut ids: Vec<String> = train.questions.iter().chain(&test.questions).map(|q| q.question_id.clone()).collect();
        ids.sort();
        prop_assert_eq!(ids, q.questions.iter().map(|q| q.question_id.clone()).collect::<Vec<_>>());
    }
}

#[test]
fn split_rejects_single_interaction_questions() {
    let a = dataset(&[(0, 0, true), (1, 0, false), (0, 1, true)]);
    assert!(stratified_split_interactions(&a, 0.5, 1).is_err());
}

#[test]
fn correct_rate_counts() {
    let a = dataset(&[(0, 0, true), (1, 0, false), (2, 0, true), (3, 0, true)]);
    assert_eq!(a.correct_rate(), Some(0.75));
    let by_q: BTreeMap<String, usize> = a.question_ids().into_iter().map(|q| (q, 1)).collect();
    assert_eq!(by_q.len(), 1);
}
