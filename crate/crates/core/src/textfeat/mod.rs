//! Text features of a question: readability indexes, linguistic length
//! features and thresholded TF-IDF weights.

mod features;
mod linguistic;
mod preprocess;
mod readability;
mod tfidf;
mod tokenize;

use thiserror::Error;

pub use features::{assemble_features, feature_names, FeatureExtractor, FeatureGroups, FeatureMatrix, FeatureVector, TextCache};
pub use linguistic::{linguistic_features, LINGUISTIC_NAMES};
pub use preprocess::{preprocess_for_ir, preprocess_text, stop_words, STOP_WORDS_SOURCE};
pub use readability::{readability_features, ReadabilityScores, READABILITY_NAMES};
pub use tfidf::{fit_tfidf_vocabulary, tfidf_transform, SparseVector, TfidfVocabulary, VocabTerm};
pub use tokenize::{count_syllables, split_sentences, tokenize_words, TokenizedText};

#[derive(Debug, Error)]
pub enum TextError {
    #[error("text has no words or sentences: {0:?}")]
    EmptyText(String),
    #[error("invalid thresholds: need 0 <= inf < sup <= 1, got inf={inf}, sup={sup}")]
    Threshold { inf: f64, sup: f64 },
    #[error("cannot fit a vocabulary on an empty corpus")]
    EmptyCorpus,
    #[error("IR features requested without a fitted vocabulary")]
    MissingVocabulary,
    #[error("unknown feature group {0:?}")]
    UnknownGroup(String),
    #[error("invalid vocabulary: {0}")]
    Vocabulary(String),
}
