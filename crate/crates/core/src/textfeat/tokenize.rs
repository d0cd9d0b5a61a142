//! Sentence splitting, word tokenization and syllable counting.

const TERMINATORS: [char; 3] = ['.', '!', '?'];

/// Splits on runs of `.`, `!` and `?`, trimming and dropping empty pieces.
pub fn split_sentences(text: &str) -> Vec<String> {
    text.split(TERMINATORS)
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_owned)
        .collect()
}

/// Lowercases and splits on every non-alphanumeric character.
pub fn tokenize_words(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(str::to_owned)
        .collect()
}

fn is_vowel(c: char) -> bool {
    matches!(c, 'a' | 'e' | 'i' | 'o' | 'u' | 'y')
}

fn is_consonant(c: char) -> bool {
    c.is_alphabetic() && !is_vowel(c)
}

/// Vowel-group syllable heuristic; never returns less than 1.
pub fn count_syllables(word: &str) -> usize {
    let chars: Vec<char> = word.to_lowercase().chars().collect();
    let mut groups = 0usize;
    let mut in_group = false;
    for &c in &chars {
        let v = is_vowel(c);
        if v && !in_group {
            groups += 1;
        }
        in_group = v;
    }
    let n = chars.len();
    if n > 2 && chars[n - 1] == 'e' && !is_vowel(chars[n - 2]) {
        let consonant_le = chars[n - 2] == 'l' && is_consonant(chars[n - 3]);
        if !consonant_le {
            groups = groups.saturating_sub(1);
        }
    }
    groups.max(1)
}

/// Counts needed by the readability formulas.
#[derive(Debug, Clone, PartialEq)]
pub struct TokenizedText {
    pub sentences: Vec<String>,
    pub words: Vec<String>,
    /// Alphanumeric characters over all word tokens.
    pub letters_count: usize,
    pub syllables: Vec<usize>,
}

impl TokenizedText {
    pub fn new(text: &str) -> Self {
        let words = tokenize_words(text);
        let syllables = words.iter().map(|w| count_syllables(w)).collect();
        TokenizedText {
            sentences: split_sentences(text),
            letters_count: words.iter().map(|w| w.chars().count()).sum(),
            words,
            syllables,
        }
    }

    pub fn word_count(&self) -> usize {
        self.words.len()
    }

    pub fn sentence_count(&self) -> usize {
        self.sentences.len()
    }

    pub fn syllable_count(&self) -> usize {
        self.syllables.iter().sum()
    }

    /// Words of three or more syllables.
    pub fn complex_word_count(&self) -> usize {
        self.syllables.iter().filter(|&&s| s >= 3).count()
    }
}
