//! Synthetic question banks and answer logs with planted latent traits.
//!
//! Text is built from pseudo-words of consonant-vowel syllables, so every
//! word's syllable count is exact. A latent text score, correlated with the
//! planted trait at `text_signal_strength`, steers stem length, syllable mix
//! and tiered marker vocabulary (difficulty), and choice lengths and marker
//! words (discrimination).

use std::collections::BTreeMap;
use std::io::Write;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Choice, CorpusError, Interaction, InteractionDataset, Question, QuestionDataset};
use crate::irt::{item_response_probability, IrtConfig, LatentTraits};
use crate::seeding;
use crate::textfeat::stop_words;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid synthetic configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
}

pub type Result<T> = std::result::Result<T, SynthError>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthConfig {
    pub n_questions: usize,
    pub n_students: usize,
    pub answers_per_student: usize,
    /// Correlation between each planted trait and its text score, in [0, 1].
    pub text_signal_strength: f64,
    pub seed: u64,
    #[serde(default)]
    pub difficulty_mean: f64,
    #[serde(default = "one")]
    pub difficulty_sd: f64,
    #[serde(default = "four")]
    pub choices_per_question: usize,
}

fn one() -> f64 {
    1.0
}

fn four() -> usize {
    4
}

impl SynthConfig {
    pub fn new(n_questions: usize, n_students: usize, answers_per_student: usize, text_signal_strength: f64, seed: u64) -> Self {
        SynthConfig {
            n_questions,
            n_students,
            answers_per_student,
            text_signal_strength,
            seed,
            difficulty_mean: 0.0,
            difficulty_sd: 1.0,
            choices_per_question: 4,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(SynthError::Config(m.to_owned()));
        if self.n_questions == 0 || self.n_students == 0 || self.answers_per_student == 0 {
            return fail("n_questions, n_students and answers_per_student must be positive");
        }
        if self.answers_per_student > self.n_questions {
            return fail("answers_per_student exceeds n_questions");
        }
        if !(0.0..=1.0).contains(&self.text_signal_strength) {
            return fail("text_signal_strength must lie in [0, 1]");
        }
        if !self.difficulty_mean.is_finite() || !(self.difficulty_sd > 0.0 && self.difficulty_sd.is_finite()) {
            return fail("difficulty_mean must be finite and difficulty_sd positive");
        }
        if self.choices_per_question < 2 {
            return fail("choices_per_question must be at least 2");
        }
        Ok(())
    }
}

const CONSONANTS: &[u8] = b"bdfgklmnprstvz";
const VOWELS: &[u8] = b"aiou";
const DISCRIMINATION_MIN: f64 = 0.3;
const DISCRIMINATION_MAX: f64 = 2.0;
const TIERS: usize = 5;

/// Fixed word pools, independent of the generation seed.
struct Lexicon {
    /// Filler words indexed by syllable count minus one (1 to 4 syllables).
    filler: Vec<Vec<String>>,
    difficulty_markers: Vec<Vec<String>>,
    discrimination_markers: Vec<Vec<String>>,
}

impl Lexicon {
    fn build() -> Self {
        let mut rng = seeding::rng(0x1e71c0, &[]);
        let stops = stop_words();
        let mut seen = std::collections::BTreeSet::new();
        let mut word = |rng: &mut ChaCha8Rng, syllables: usize| loop {
            let mut w = String::with_capacity(2 * syllables);
            for _ in 0..syllables {
                w.push(CONSONANTS[rng.random_range(0..CONSONANTS.len())] as char);
                w.push(VOWELS[rng.random_range(0..VOWELS.len())] as char);
            }
            if !stops.contains(w.as_str()) && seen.insert(w.clone()) {
                return w;
            }
        };
        let filler = (1..=4).map(|s| (0..40).map(|_| word(&mut rng, s)).collect()).collect();
        let difficulty_markers = (0..TIERS).map(|_| (0..10).map(|_| word(&mut rng, 3)).collect()).collect();
        let discrimination_markers = (0..TIERS).map(|_| (0..10).map(|_| word(&mut rng, 2)).collect()).collect();
        Lexicon {
            filler,
            difficulty_markers,
            discrimination_markers,
        }
    }
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Quantile tier of a standard-normal score.
fn tier(score: f64) -> usize {
    ((logistic(1.702 * score) * TIERS as f64) as usize).min(TIERS - 1)
}

fn pick<'a>(rng: &mut ChaCha8Rng, pool: &'a [String]) -> &'a str {
    &pool[rng.random_range(0..pool.len())]
}

fn sentence_text(words: &[String], terminators: &[usize], last: char) -> String {
    let mut out = String::new();
    for (i, w) in words.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push_str(w);
        if terminators.contains(&i) {
            out.push('.');
        }
    }
    out.push(last);
    out
}

fn stem(rng: &mut ChaCha8Rng, lex: &Lexicon, score: f64) -> String {
    let n_words = (12.0 + 4.0 * score).round().clamp(3.0, 30.0) as usize;
    let p_long = logistic(1.5 * score);
    let marker_tier = tier(score);
    let words: Vec<String> = (0..n_words)
        .map(|_| {
            if rng.random::<f64>() < 0.3 {
                pick(rng, &lex.difficulty_markers[marker_tier]).to_owned()
            } else {
                let syllables = (0..3).filter(|_| rng.random::<f64>() < p_long).count();
                pick(rng, &lex.filler[syllables]).to_owned()
            }
        })
        .collect();
    // Sentences of seven words, the final one a question.
    let terminators: Vec<usize> = (6..n_words.saturating_sub(1)).step_by(7).collect();
    let mut text = sentence_text(&words, &terminators, '?');
    if let Some(first) = text.get_mut(0..1) {
        first.make_ascii_uppercase();
    }
    text
}

fn choice(rng: &mut ChaCha8Rng, lex: &Lexicon, n_words: usize, marker: Option<&str>) -> String {
    let mut words: Vec<String> = (0..n_words)
        .map(|_| {
            let syllables = rng.random_range(0..2);
            pick(rng, &lex.filler[syllables]).to_owned()
        })
        .collect();
    if let Some(m) = marker {
        words.push(m.to_owned());
    }
    sentence_text(&words, &[], '.')
}

fn choice_length(rng: &mut ChaCha8Rng, centre: f64) -> usize {
    let noise: f64 = rng.sample(StandardNormal);
    (centre + 0.5 * noise).round().clamp(1.0, 20.0) as usize
}

/// Builds the question bank with planted traits.
pub fn generate_questions(config: &SynthConfig) -> Result<(QuestionDataset, BTreeMap<String, LatentTraits>)> {
    config.validate()?;
    let lex = Lexicon::build();
    let mut rng = seeding::rng(config.seed, &[0x9e57]);
    let s = config.text_signal_strength;
    let noise_weight = (1.0 - s * s).sqrt();
    let width = config.n_questions.to_string().len().max(4);
    // Standardized uniform(0.3, 2.0).
    let a_mid = 0.5 * (DISCRIMINATION_MIN + DISCRIMINATION_MAX);
    let a_sd = (DISCRIMINATION_MAX - DISCRIMINATION_MIN) / 12f64.sqrt();

    let mut questions = Vec::with_capacity(config.n_questions);
    let mut planted = BTreeMap::new();
    for i in 0..config.n_questions {
        let z_b: f64 = rng.sample(StandardNormal);
        let a = rng.random_range(DISCRIMINATION_MIN..DISCRIMINATION_MAX);
        let b = config.difficulty_mean + config.difficulty_sd * z_b;
        let e_b: f64 = rng.sample(StandardNormal);
        let e_a: f64 = rng.sample(StandardNormal);
        let t_b = s * z_b + noise_weight * e_b;
        let t_a = s * (a - a_mid) / a_sd + noise_weight * e_a;

        let stem_text = stem(&mut rng, &lex, t_b);
        let correct_at = rng.random_range(0..config.choices_per_question);
        let marker_tier = tier(t_a);
        let choices = (0..config.choices_per_question)
            .map(|c| {
                let correct = c == correct_at;
                let (centre, marker) = if correct {
                    (5.0 + 2.0 * t_a, Some(pick(&mut rng, &lex.discrimination_markers[marker_tier]).to_owned()))
                } else {
                    (5.0 - 1.5 * t_a, None)
                };
                let n = choice_length(&mut rng, centre);
                Choice::new(choice(&mut rng, &lex, n, marker.as_deref()), correct)
            })
            .collect();
        let id = format!("q{i:0width$}");
        questions.push(Question::new(id.clone(), stem_text, choices)?);
        planted.insert(id, LatentTraits::clamped(b, a));
    }
    Ok((QuestionDataset::new(questions)?, planted))
}

/// Simulated answers plus the skills that produced them.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub interactions: InteractionDataset,
    pub skills: BTreeMap<String, f64>,
}

/// Draws skills from a standard normal (clamped to the skill bounds) and
/// simulates `answers_per_student` answers per student.
pub fn simulate_interactions(planted: &BTreeMap<String, LatentTraits>, config: &SynthConfig) -> Result<Simulation> {
    config.validate()?;
    if config.answers_per_student > planted.len() {
        return Err(SynthError::Config("answers_per_student exceeds the number of questions".into()));
    }
    let irt = IrtConfig::default();
    let mut rng = seeding::rng(config.seed, &[0x5a1e]);
    let width = config.n_students.to_string().len().max(4);
    let skills: Vec<(String, f64)> = (0..config.n_students)
        .map(|i| {
            let z: f64 = rng.sample(StandardNormal);
            (format!("s{i:0width$}"), irt.clamp_theta(z))
        })
        .collect();
    let interactions = simulate_answers(planted, &skills, config.answers_per_student, &irt, &mut rng);
    Ok(Simulation {
        interactions,
        skills: skills.into_iter().collect(),
    })
}

/// Each student answers `per_student` distinct questions chosen at random
/// among those answered least so far, which keeps per-question answer
/// counts within one of each other. Timestamps count up per student.
pub fn simulate_answers(
    planted: &BTreeMap<String, LatentTraits>,
    skills: &[(String, f64)],
    per_student: usize,
    config: &IrtConfig,
    rng: &mut ChaCha8Rng,
) -> InteractionDataset {
    let items: Vec<(&String, &LatentTraits)> = planted.iter().collect();
    let mut counts = vec![0usize; items.len()];
    let mut out = Vec::with_capacity(skills.len() * per_student);
    for (student, theta) in skills {
        let mut order: Vec<usize> = (0..items.len()).collect();
        order.shuffle(rng);
        order.sort_by_key(|&k| counts[k]);
        let chosen = &mut order[..per_student.min(items.len())];
        chosen.shuffle(rng);
        for (step, &k) in chosen.iter().enumerate() {
            counts[k] += 1;
            let p = item_response_probability(*theta, items[k].1, config);
            out.push(Interaction {
                student_id: student.clone(),
                question_id: items[k].0.clone(),
                correct: rng.random::<f64>() < p,
                timestamp_ms: 1000 * (step as u64 + 1),
            });
        }
    }
    InteractionDataset::new(out)
}

/// CSV with header `question_id,true_difficulty,true_discrimination`.
pub fn write_planted_traits_csv<W: Write>(writer: W, planted: &BTreeMap<String, LatentTraits>) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["question_id", "true_difficulty", "true_discrimination"])?;
    for (id, t) in planted {
        w.write_record([id.clone(), t.difficulty().to_string(), t.discrimination().to_string()])?;
    }
    w.flush()
}
