//! Text normalization for the TF-IDF block: stop-word removal and stemming.

use std::collections::HashSet;
use std::sync::OnceLock;

use rust_stemmers::{Algorithm, Stemmer};

use super::tokenize::tokenize_words;
use crate::corpus::Question;

/// The embedded stop-word list; see `data/stopwords_en_v1.txt`.
pub const STOP_WORDS_SOURCE: &str = include_str!("../../data/stopwords_en_v1.txt");

pub fn stop_words() -> &'static HashSet<&'static str> {
    static WORDS: OnceLock<HashSet<&'static str>> = OnceLock::new();
    WORDS.get_or_init(|| {
        STOP_WORDS_SOURCE
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .collect()
    })
}

fn stemmer() -> &'static Stemmer {
    static STEMMER: OnceLock<Stemmer> = OnceLock::new();
    STEMMER.get_or_init(|| Stemmer::create(Algorithm::English))
}

/// Tokenizes, drops stop words and stems the remaining tokens. Numeric
/// tokens pass through unchanged.
pub fn preprocess_text(text: &str) -> Vec<String> {
    let stops = stop_words();
    tokenize_words(text)
        .into_iter()
        .filter(|w| !stops.contains(w.as_str()))
        .map(|w| {
            if w.chars().all(|c| c.is_ascii_digit()) {
                w
            } else {
                stemmer().stem(&w).into_owned()
            }
        })
        .collect()
}

/// Stem and every choice, concatenated, as one IR document.
pub fn preprocess_for_ir(question: &Question) -> Vec<String> {
    let mut text = question.stem_text.clone();
    for c in &question.choices {
        text.push(' ');
        text.push_str(&c.text);
    }
    preprocess_text(&text)
}
