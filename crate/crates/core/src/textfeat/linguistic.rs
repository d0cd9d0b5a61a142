use super::tokenize::{split_sentences, tokenize_words};
use super::TextError;
use crate::corpus::{Choice, Question};

pub const LINGUISTIC_NAMES: [&str; 9] = [
    "word_count_question",
    "word_count_correct",
    "word_count_wrong",
    "sentence_count_question",
    "sentence_count_correct",
    "sentence_count_wrong",
    "avg_word_length_question",
    "question_over_correct_length",
    "question_over_wrong_length",
];

fn mean_over<'a>(choices: impl Iterator<Item = &'a Choice>, f: impl Fn(&str) -> usize) -> Option<f64> {
    let (mut sum, mut n) = (0usize, 0usize);
    for c in choices {
        sum += f(&c.text);
        n += 1;
    }
    (n > 0).then(|| sum as f64 / n as f64)
}

fn ratio(num: f64, den: f64, what: &str, qid: &str) -> f64 {
    if den == 0.0 {
        log::warn!("question {qid:?}: zero {what} length, ratio set to 0");
        0.0
    } else {
        num / den
    }
}

/// The nine stem/choice length features. Choice features average over the
/// correct (resp. wrong) choices.
pub fn linguistic_features(question: &Question) -> Result<[f64; 9], TextError> {
    let qid = question.question_id.as_str();
    let stem_words = tokenize_words(&question.stem_text);
    if stem_words.is_empty() {
        return Err(TextError::EmptyText(question.stem_text.clone()));
    }
    let wc = |t: &str| tokenize_words(t).len();
    let sc = |t: &str| split_sentences(t).len();

    let wc_q = stem_words.len() as f64;
    let sc_q = split_sentences(&question.stem_text).len() as f64;
    let awl_q = stem_words.iter().map(|w| w.chars().count()).sum::<usize>() as f64 / wc_q;

    let wc_correct = mean_over(question.correct_choices(), wc);
    let sc_correct = mean_over(question.correct_choices(), sc);
    let wc_wrong = mean_over(question.wrong_choices(), wc);
    let sc_wrong = mean_over(question.wrong_choices(), sc);
    if wc_correct.is_none() {
        log::warn!("question {qid:?} has no correct choice; correct-choice features set to 0");
    }
    if wc_wrong.is_none() {
        log::warn!("question {qid:?} has no wrong choice; wrong-choice features set to 0");
    }
    let wc_correct = wc_correct.unwrap_or(0.0);
    let wc_wrong = wc_wrong.unwrap_or(0.0);
    Ok([
        wc_q,
        wc_correct,
        wc_wrong,
        sc_q,
        sc_correct.unwrap_or(0.0),
        sc_wrong.unwrap_or(0.0),
        awl_q,
        ratio(wc_q, wc_correct, "correct-choice", qid),
        ratio(wc_q, wc_wrong, "wrong-choice", qid),
    ])
}
