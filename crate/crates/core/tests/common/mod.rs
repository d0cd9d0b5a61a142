//! Independent reference implementations used as test oracles.
#![allow(dead_code, clippy::needless_range_loop)]

use std::collections::{BTreeMap, BTreeSet};

use quizcal_core::corpus::{Interaction, InteractionDataset};
use quizcal_core::irt::{dataset_log_likelihood, log_likelihood_gradient, IrtConfig, LatentTraits};
use rand::{Rng, SeedableRng};

pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    sxy / (sxx * syy).sqrt()
}

pub fn rmse(x: &[f64], y: &[f64]) -> f64 {
    (x.iter().zip(y).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / x.len() as f64).sqrt()
}

/// Textbook response probability, written without any stabilization.
pub fn naive_probability(theta: f64, a: f64, b: f64, d: f64) -> f64 {
    1.0 / (1.0 + (-d * a * (theta - b)).exp())
}

/// Log-likelihood of answers to known items at skill `theta`, summed in the
/// plainest form.
pub fn naive_skill_log_likelihood(theta: f64, answered: &[(LatentTraits, bool)], d: f64) -> f64 {
    answered
        .iter()
        .map(|(t, c)| {
            let p = naive_probability(theta, t.discrimination(), t.difficulty(), d);
            if *c {
                p.ln()
            } else {
                (1.0 - p).ln()
            }
        })
        .sum()
}

/// Argmax over a uniform grid of `points` values on the skill bounds; the
/// first (lowest) maximizer wins.
pub fn grid_argmax_skill(answered: &[(LatentTraits, bool)], config: &IrtConfig, points: usize) -> f64 {
    let (lo, hi) = config.theta_bounds;
    let mut best = (lo, f64::NEG_INFINITY);
    for k in 0..points {
        let x = lo + (hi - lo) * k as f64 / (points - 1) as f64;
        let f = naive_skill_log_likelihood(x, answered, config.scaling);
        if f > best.1 {
            best = (x, f);
        }
    }
    best.0
}

/// TF-IDF weights straight from the definition:
/// count(w, d) * (ln((N + 1) / (df(w) + 1)) + 1), for every term of `vocab`.
pub fn brute_force_tfidf(doc: &[String], corpus: &[Vec<String>], vocab: &[String]) -> Vec<f64> {
    let n = corpus.len() as f64;
    vocab
        .iter()
        .map(|w| {
            let count = doc.iter().filter(|t| *t == w).count() as f64;
            let df = corpus.iter().filter(|d| d.contains(w)).count() as f64;
            count * (((n + 1.0) / (df + 1.0)).ln() + 1.0)
        })
        .collect()
}

/// Terms whose document-frequency fraction lies in `[inf, sup]`, sorted.
pub fn brute_force_vocabulary(corpus: &[Vec<String>], inf: f64, sup: f64) -> Vec<String> {
    let terms: BTreeSet<&String> = corpus.iter().flatten().collect();
    terms
        .into_iter()
        .filter(|w| {
            let df = corpus.iter().filter(|d| d.contains(w)).count() as f64 / corpus.len() as f64;
            inf <= df && df <= sup
        })
        .cloned()
        .collect()
}

/// AUC as the share of (correct, wrong) pairs ranked correctly, ties half.
pub fn pairwise_auc(scores: &[f64], labels: &[bool]) -> Option<f64> {
    let pos: Vec<f64> = scores.iter().zip(labels).filter(|(_, l)| **l).map(|(s, _)| *s).collect();
    let neg: Vec<f64> = scores.iter().zip(labels).filter(|(_, l)| !**l).map(|(s, _)| *s).collect();
    if pos.is_empty() || neg.is_empty() {
        return None;
    }
    let mut total = 0.0;
    for p in &pos {
        for n in &neg {
            total += if p > n {
                1.0
            } else if p == n {
                0.5
            } else {
                0.0
            };
        }
    }
    Some(total / (pos.len() * neg.len()) as f64)
}

/// Ordinary least squares with intercept by Gaussian elimination with
/// partial pivoting on the raw normal equations. Returns (slopes, intercept).
pub fn normal_equations(rows: &[Vec<f64>], y: &[f64]) -> (Vec<f64>, f64) {
    let d = rows[0].len() + 1;
    let mut a = vec![vec![0.0; d + 1]; d];
    for (r, &yi) in rows.iter().zip(y) {
        let x: Vec<f64> = std::iter::once(1.0).chain(r.iter().copied()).collect();
        for i in 0..d {
            for j in 0..d {
                a[i][j] += x[i] * x[j];
            }
            a[i][d] += x[i] * yi;
        }
    }
    for c in 0..d {
        let p = (c..d).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        a.swap(c, p);
        for i in 0..d {
            if i != c {
                let f = a[i][c] / a[c][c];
                for j in c..=d {
                    a[i][j] -= f * a[c][j];
                }
            }
        }
    }
    let beta: Vec<f64> = (0..d).map(|i| a[i][d] / a[i][i]).collect();
    (beta[1..].to_vec(), beta[0])
}

/// Brute-force version of the minimum-interaction filter: repeatedly drop
/// every interaction of one under-represented student or question.
pub fn brute_force_filter(a: &[(String, String)], min_count: usize) -> Vec<(String, String)> {
    let mut keep: Vec<(String, String)> = a.to_vec();
    loop {
        let mut students: BTreeMap<&str, usize> = BTreeMap::new();
        let mut questions: BTreeMap<&str, usize> = BTreeMap::new();
        for (s, q) in &keep {
            *students.entry(s).or_default() += 1;
            *questions.entry(q).or_default() += 1;
        }
        let bad_student = students.iter().find(|(_, c)| **c < min_count).map(|(s, _)| s.to_string());
        let bad_question = questions.iter().find(|(_, c)| **c < min_count).map(|(q, _)| q.to_string());
        if let Some(s) = bad_student {
            keep.retain(|(x, _)| *x != s);
        } else if let Some(q) = bad_question {
            keep.retain(|(_, x)| *x != q);
        } else {
            return keep;
        }
    }
}

pub const GOLDEN_TEXT: &str = include_str!("../data/golden_readability.txt");

/// Hand-computed values; the arithmetic is in `data/golden_readability.md`.
pub const GOLDEN: [(&str, f64); 6] = [
    ("fre", 38.8646923077),
    ("fkgl", 9.1303076923),
    ("ari", 5.0823076923),
    ("fog", 11.3107692308),
    ("cli", 8.3600000000),
    ("smog", 9.3871000000),
];

/// Random toy corpus of at most 10 documents over a 12-word alphabet.
pub fn toy_corpus(seed: u64) -> Vec<Vec<String>> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let n_docs = rng.random_range(1..=10);
    (0..n_docs)
        .map(|_| {
            let len = rng.random_range(0..15);
            (0..len).map(|_| format!("w{}", rng.random_range(0..12))).collect()
        })
        .collect()
}

/// Random likelihood instance with 10 interactions over 3 students and 3 items.
pub fn gradient_instance(seed: u64) -> (InteractionDataset, BTreeMap<String, f64>, BTreeMap<String, LatentTraits>) {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let thetas: BTreeMap<String, f64> = (0..3).map(|i| (format!("s{i}"), rng.random_range(-2.0..2.0))).collect();
    let traits: BTreeMap<String, LatentTraits> = (0..3)
        .map(|i| {
            (
                format!("q{i}"),
                LatentTraits::clamped(rng.random_range(-2.0..2.0), rng.random_range(0.2..2.0)),
            )
        })
        .collect();
    let inter = (0..10)
        .map(|t| Interaction {
            student_id: format!("s{}", rng.random_range(0..3)),
            question_id: format!("q{}", rng.random_range(0..3)),
            correct: rng.random_bool(0.6),
            timestamp_ms: t,
        })
        .collect();
    (InteractionDataset::new(inter), thetas, traits)
}

pub fn rel_err(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-6)
}

/// Worst relative error between the analytic gradient and central
/// differences.
pub fn gradient_check(seed: u64) -> f64 {
    let (a, thetas, traits) = gradient_instance(seed);
    let c = IrtConfig::default();
    let g = log_likelihood_gradient(&a, &thetas, &traits, &c).unwrap();
    let h = 1e-5;
    let ll = |th: &BTreeMap<String, f64>, tr: &BTreeMap<String, LatentTraits>| dataset_log_likelihood(&a, th, tr, &c).unwrap();
    let mut worst: f64 = 0.0;
    for k in thetas.keys() {
        let (mut p, mut m) = (thetas.clone(), thetas.clone());
        *p.get_mut(k).unwrap() += h;
        *m.get_mut(k).unwrap() -= h;
        worst = worst.max(rel_err(g.theta[k], (ll(&p, &traits) - ll(&m, &traits)) / (2.0 * h)));
    }
    for k in traits.keys() {
        let t = traits[k];
        let shift = |db: f64, da: f64| {
            let mut tr = traits.clone();
            tr.insert(k.clone(), LatentTraits::try_new(t.difficulty() + db, t.discrimination() + da).unwrap());
            ll(&thetas, &tr)
        };
        worst = worst.max(rel_err(g.difficulty[k], (shift(h, 0.0) - shift(-h, 0.0)) / (2.0 * h)));
        worst = worst.max(rel_err(g.discrimination[k], (shift(0.0, h) - shift(0.0, -h)) / (2.0 * h)));
    }
    worst
}
