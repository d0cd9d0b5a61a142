//! Document-frequency thresholded vocabulary and raw TF-IDF weights.
//!
//! The weight of term `w` in document `d` of an `N`-document corpus is
//! `count(w, d) * (ln((N + 1) / (df(w) + 1)) + 1)`, where `df(w)` is the number
//! of documents containing `w`. Vectors are not normalized.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::TextError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VocabTerm {
    pub term: String,
    pub doc_count: usize,
}

/// Retained terms in lexicographic order, with the corpus statistics needed
/// to weight them.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "RawVocabulary")]
pub struct TfidfVocabulary {
    pub inf: f64,
    pub sup: f64,
    pub n_docs: usize,
    pub terms: Vec<VocabTerm>,
    #[serde(skip)]
    index: HashMap<String, usize>,
}

impl PartialEq for TfidfVocabulary {
    fn eq(&self, other: &Self) -> bool {
        self.inf == other.inf && self.sup == other.sup && self.n_docs == other.n_docs && self.terms == other.terms
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawVocabulary {
    inf: f64,
    sup: f64,
    n_docs: usize,
    terms: Vec<VocabTerm>,
}

impl TryFrom<RawVocabulary> for TfidfVocabulary {
    type Error = TextError;
    fn try_from(r: RawVocabulary) -> Result<Self, TextError> {
        check_thresholds(r.inf, r.sup)?;
        if !r.terms.windows(2).all(|w| w[0].term < w[1].term) {
            return Err(TextError::Vocabulary("terms must be strictly increasing".into()));
        }
        Ok(TfidfVocabulary::from_parts(r.inf, r.sup, r.n_docs, r.terms))
    }
}

fn check_thresholds(inf: f64, sup: f64) -> Result<(), TextError> {
    if (0.0..=1.0).contains(&inf) && (0.0..=1.0).contains(&sup) && inf < sup {
        Ok(())
    } else {
        Err(TextError::Threshold { inf, sup })
    }
}

/// Sparse vector with strictly increasing indices and non-zero values.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SparseVector(pub Vec<(usize, f64)>);

impl SparseVector {
    pub fn get(&self, index: usize) -> f64 {
        self.0
            .binary_search_by_key(&index, |&(i, _)| i)
            .map_or(0.0, |k| self.0[k].1)
    }

    pub fn nnz(&self) -> usize {
        self.0.len()
    }
}

impl TfidfVocabulary {
    fn from_parts(inf: f64, sup: f64, n_docs: usize, terms: Vec<VocabTerm>) -> Self {
        let index = terms.iter().enumerate().map(|(i, t)| (t.term.clone(), i)).collect();
        TfidfVocabulary {
            inf,
            sup,
            n_docs,
            terms,
            index,
        }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn index_of(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    /// Document-frequency fraction of each retained term.
    pub fn doc_frequency(&self) -> Vec<f64> {
        self.terms
            .iter()
            .map(|t| t.doc_count as f64 / self.n_docs as f64)
            .collect()
    }

    /// Weights `doc` against this vocabulary; out-of-vocabulary tokens are
    /// ignored.
    pub fn transform(&self, doc: &[String]) -> SparseVector {
        let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
        for tok in doc {
            if let Some(i) = self.index_of(tok) {
                *counts.entry(i).or_default() += 1;
            }
        }
        let n = self.n_docs as f64;
        SparseVector(
            counts
                .into_iter()
                .map(|(i, c)| {
                    let df = self.terms[i].doc_count as f64;
                    (i, c as f64 * (((n + 1.0) / (df + 1.0)).ln() + 1.0))
                })
                .collect(),
        )
    }
}

/// Keeps the terms whose document-frequency fraction lies in `[inf, sup]`.
pub fn fit_tfidf_vocabulary(corpus: &[Vec<String>], inf: f64, sup: f64) -> Result<TfidfVocabulary, TextError> {
    check_thresholds(inf, sup)?;
    if corpus.is_empty() {
        return Err(TextError::EmptyCorpus);
    }
    let mut df: BTreeMap<&str, usize> = BTreeMap::new();
    for doc in corpus {
        let distinct: BTreeSet<&str> = doc.iter().map(String::as_str).collect();
        for t in distinct {
            *df.entry(t).or_default() += 1;
        }
    }
    let n = corpus.len() as f64;
    let terms = df
        .into_iter()
        .filter(|&(_, c)| {
            let f = c as f64 / n;
            inf <= f && f <= sup
        })
        .map(|(t, c)| VocabTerm {
            term: t.to_owned(),
            doc_count: c,
        })
        .collect();
    Ok(TfidfVocabulary::from_parts(inf, sup, corpus.len(), terms))
}

pub fn tfidf_transform(doc: &[String], vocab: &TfidfVocabulary) -> SparseVector {
    vocab.transform(doc)
}
