//! The six readability indexes, computed on the question stem.

use super::tokenize::TokenizedText;
use super::TextError;
use crate::corpus::Question;

pub const READABILITY_NAMES: [&str; 6] = ["fre", "fkgl", "ari", "fog", "cli", "smog"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReadabilityScores {
    /// Flesch Reading Ease.
    pub fre: f64,
    /// Flesch-Kincaid Grade Level.
    pub fkgl: f64,
    /// Automated Readability Index.
    pub ari: f64,
    /// Gunning FOG.
    pub fog: f64,
    /// Coleman-Liau Index.
    pub cli: f64,
    pub smog: f64,
}

impl ReadabilityScores {
    pub fn from_text(text: &str) -> Result<Self, TextError> {
        let t = TokenizedText::new(text);
        let (w, s) = (t.word_count() as f64, t.sentence_count() as f64);
        if w == 0.0 || s == 0.0 {
            return Err(TextError::EmptyText(text.to_owned()));
        }
        let y = t.syllable_count() as f64;
        let l = t.letters_count as f64;
        let c = t.complex_word_count() as f64;
        Ok(ReadabilityScores {
            fre: 206.835 - 1.015 * (w / s) - 84.6 * (y / w),
            fkgl: 0.39 * (w / s) + 11.8 * (y / w) - 15.59,
            ari: 4.71 * (l / w) + 0.5 * (w / s) - 21.43,
            fog: 0.4 * ((w / s) + 100.0 * (c / w)),
            cli: 0.0588 * (100.0 * l / w) - 0.296 * (100.0 * s / w) - 15.8,
            smog: 1.0430 * (c * 30.0 / s).sqrt() + 3.1291,
        })
    }

    pub fn to_array(self) -> [f64; 6] {
        [self.fre, self.fkgl, self.ari, self.fog, self.cli, self.smog]
    }
}

pub fn readability_features(question: &Question) -> Result<[f64; 6], TextError> {
    ReadabilityScores::from_text(&question.stem_text).map(ReadabilityScores::to_array)
}
