use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use quizcal_core::irt::{calibrate_items, estimate_skill, IrtConfig, LatentTraits, TraitKind};
use quizcal_core::regress::{fit_forest, ForestParams};
use quizcal_core::synth::{generate_questions, simulate_interactions, SynthConfig};
use quizcal_core::textfeat::{FeatureExtractor, FeatureGroups, TextCache};

fn calibration(c: &mut Criterion) {
    let cfg = SynthConfig::new(100, 200, 40, 0.8, 1);
    let (_, planted) = generate_questions(&cfg).unwrap();
    let sim = simulate_interactions(&planted, &cfg).unwrap();
    let irt = IrtConfig::default();
    c.bench_function("calibrate_100x200", |b| {
        b.iter(|| calibrate_items(black_box(&sim.interactions), &irt, 3).unwrap())
    });
}

fn skill(c: &mut Criterion) {
    let answered: Vec<(LatentTraits, bool)> = (0..50)
        .map(|i| (LatentTraits::clamped(-2.0 + 0.08 * i as f64, 1.2), i % 3 != 0))
        .collect();
    let irt = IrtConfig::default();
    c.bench_function("estimate_skill_50", |b| b.iter(|| estimate_skill(black_box(&answered), &irt)));
}

fn features_and_forest(c: &mut Criterion) {
    let cfg = SynthConfig::new(300, 1, 1, 0.8, 2);
    let (q, planted) = generate_questions(&cfg).unwrap();
    c.bench_function("text_cache_300", |b| {
        b.iter(|| TextCache::new(black_box(&q.questions), FeatureGroups::ALL).unwrap())
    });
    let extractor = FeatureExtractor::fit(&q.questions, FeatureGroups::ALL, 0.02, 0.95).unwrap();
    let x = extractor.transform(&q.questions).unwrap();
    let y: Vec<f64> = q.questions.iter().map(|x| planted[&x.question_id].difficulty()).collect();
    let params = ForestParams {
        n_trees: 50,
        ..ForestParams::default()
    };
    c.bench_function("forest_50_trees_300_rows", |b| {
        b.iter(|| fit_forest(black_box(&x), &y, TraitKind::Difficulty, &params).unwrap())
    });
}

criterion_group!(benches, calibration, skill, features_and_forest);
criterion_main!(benches);
