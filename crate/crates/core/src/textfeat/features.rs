//! Assembly of readability, linguistic and TF-IDF blocks into feature rows.

use std::fmt;
use std::io::Write;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::linguistic::{linguistic_features, LINGUISTIC_NAMES};
use super::preprocess::preprocess_for_ir;
use super::readability::{readability_features, READABILITY_NAMES};
use super::tfidf::{fit_tfidf_vocabulary, SparseVector, TfidfVocabulary};
use super::TextError;
use crate::corpus::Question;

/// Which feature blocks are active. Blocks are laid out in the fixed order
/// readability | linguistic | tfidf.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct FeatureGroups {
    pub ir: bool,
    pub linguistic: bool,
    pub readability: bool,
}

impl FeatureGroups {
    pub const ALL: FeatureGroups = FeatureGroups::new(true, true, true);
    pub const NONE: FeatureGroups = FeatureGroups::new(false, false, false);

    /// The seven non-empty subsets, in ablation-report order.
    pub const ABLATION: [FeatureGroups; 7] = [
        FeatureGroups::new(true, true, true),
        FeatureGroups::new(true, true, false),
        FeatureGroups::new(true, false, true),
        FeatureGroups::new(true, false, false),
        FeatureGroups::new(false, true, true),
        FeatureGroups::new(false, false, true),
        FeatureGroups::new(false, true, false),
    ];

    pub const fn new(ir: bool, linguistic: bool, readability: bool) -> Self {
        FeatureGroups {
            ir,
            linguistic,
            readability,
        }
    }

    pub fn is_empty(&self) -> bool {
        !(self.ir || self.linguistic || self.readability)
    }

    pub fn names(&self) -> Vec<&'static str> {
        let mut v = Vec::new();
        if self.ir {
            v.push("ir");
        }
        if self.linguistic {
            v.push("linguistic");
        }
        if self.readability {
            v.push("readability");
        }
        v
    }

    pub fn from_names<S: AsRef<str>>(names: &[S]) -> Result<Self, TextError> {
        let mut g = FeatureGroups::NONE;
        for n in names {
            match n.as_ref().trim().to_ascii_lowercase().as_str() {
                "ir" | "tfidf" => g.ir = true,
                "linguistic" => g.linguistic = true,
                "readability" => g.readability = true,
                other => return Err(TextError::UnknownGroup(other.to_owned())),
            }
        }
        Ok(g)
    }

    /// Report label such as `IR + Linguistic + Readability`.
    pub fn label(&self) -> String {
        let mut parts = Vec::new();
        if self.ir {
            parts.push("IR");
        }
        if self.linguistic {
            parts.push("Linguistic");
        }
        if self.readability {
            parts.push("Readability");
        }
        if parts.is_empty() {
            "none".to_owned()
        } else {
            parts.join(" + ")
        }
    }
}

impl fmt::Display for FeatureGroups {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl Serialize for FeatureGroups {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.names().serialize(s)
    }
}

impl<'de> Deserialize<'de> for FeatureGroups {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let names = Vec::<String>::deserialize(d)?;
        FeatureGroups::from_names(&names).map_err(serde::de::Error::custom)
    }
}

/// Feature blocks of one question; absent blocks are `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub groups: FeatureGroups,
    pub readability: Option<[f64; 6]>,
    pub linguistic: Option<[f64; 9]>,
    pub tfidf: Option<SparseVector>,
    pub tfidf_dim: usize,
}

impl FeatureVector {
    pub fn dim(&self) -> usize {
        self.readability.map_or(0, |_| 6) + self.linguistic.map_or(0, |_| 9) + self.tfidf.as_ref().map_or(0, |_| self.tfidf_dim)
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.dim());
        if let Some(r) = self.readability {
            out.extend_from_slice(&r);
        }
        if let Some(l) = self.linguistic {
            out.extend_from_slice(&l);
        }
        if let Some(t) = &self.tfidf {
            let start = out.len();
            out.resize(start + self.tfidf_dim, 0.0);
            for &(i, w) in &t.0 {
                out[start + i] = w;
            }
        }
        out
    }
}

pub fn assemble_features(
    question: &Question,
    vocab: Option<&TfidfVocabulary>,
    groups: FeatureGroups,
) -> Result<FeatureVector, TextError> {
    let tfidf = if groups.ir {
        let v = vocab.ok_or(TextError::MissingVocabulary)?;
        Some(v.transform(&preprocess_for_ir(question)))
    } else {
        None
    };
    Ok(FeatureVector {
        groups,
        readability: groups.readability.then(|| readability_features(question)).transpose()?,
        linguistic: groups.linguistic.then(|| linguistic_features(question)).transpose()?,
        tfidf,
        tfidf_dim: if groups.ir { vocab.map_or(0, TfidfVocabulary::len) } else { 0 },
    })
}

/// Column names for the given groups and vocabulary.
pub fn feature_names(groups: FeatureGroups, vocab: Option<&TfidfVocabulary>) -> Vec<String> {
    let mut names: Vec<String> = Vec::new();
    if groups.readability {
        names.extend(READABILITY_NAMES.iter().map(|s| s.to_string()));
    }
    if groups.linguistic {
        names.extend(LINGUISTIC_NAMES.iter().map(|s| s.to_string()));
    }
    if groups.ir {
        if let Some(v) = vocab {
            names.extend(v.terms.iter().map(|t| format!("tfidf:{}", t.term)));
        }
    }
    names
}

/// Dense row-major feature matrix tagged with the groups that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub groups: FeatureGroups,
    pub names: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl FeatureMatrix {
    /// Untagged numeric matrix with generated column names.
    pub fn raw(rows: Vec<Vec<f64>>) -> Self {
        let d = rows.first().map_or(0, Vec::len);
        FeatureMatrix {
            groups: FeatureGroups::NONE,
            names: (0..d).map(|i| format!("x{i}")).collect(),
            rows,
        }
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.names.len()
    }

    pub fn select_rows(&self, idx: &[usize]) -> FeatureMatrix {
        FeatureMatrix {
            groups: self.groups,
            names: self.names.clone(),
            rows: idx.iter().map(|&i| self.rows[i].clone()).collect(),
        }
    }

    /// CSV with a `question_id` column followed by one column per feature.
    pub fn write_csv<W: Write>(&self, writer: W, ids: &[String]) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["question_id".to_owned()];
        header.extend(self.names.iter().cloned());
        w.write_record(&header)?;
        for (id, row) in ids.iter().zip(&self.rows) {
            let mut rec = vec![id.clone()];
            rec.extend(row.iter().map(|v| v.to_string()));
            w.write_record(&rec)?;
        }
        w.flush()
    }
}

/// A fitted feature pipeline: active groups plus the TF-IDF vocabulary when
/// the IR block is active.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureExtractor {
    pub groups: FeatureGroups,
    pub vocabulary: Option<TfidfVocabulary>,
}

impl FeatureExtractor {
    pub fn fit(questions: &[Question], groups: FeatureGroups, inf: f64, sup: f64) -> Result<Self, TextError> {
        let docs: Vec<Vec<String>> = if groups.ir {
            questions.iter().map(preprocess_for_ir).collect()
        } else {
            Vec::new()
        };
        Self::fit_documents(&docs, groups, inf, sup)
    }

    /// Fits from already preprocessed IR documents.
    pub fn fit_documents(docs: &[Vec<String>], groups: FeatureGroups, inf: f64, sup: f64) -> Result<Self, TextError> {
        let vocabulary = if groups.ir {
            Some(fit_tfidf_vocabulary(docs, inf, sup)?)
        } else {
            None
        };
        Ok(FeatureExtractor { groups, vocabulary })
    }

    pub fn names(&self) -> Vec<String> {
        feature_names(self.groups, self.vocabulary.as_ref())
    }

    pub fn transform(&self, questions: &[Question]) -> Result<FeatureMatrix, TextError> {
        let rows = questions
            .iter()
            .map(|q| assemble_features(q, self.vocabulary.as_ref(), self.groups).map(|v| v.to_dense()))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(FeatureMatrix {
            groups: self.groups,
            names: self.names(),
            rows,
        })
    }
}

/// Per-question intermediate results, computed once and reused while
/// searching over vocabularies and folds.
#[derive(Debug, Clone)]
pub struct TextCache {
    readability: Vec<[f64; 6]>,
    linguistic: Vec<[f64; 9]>,
    docs: Vec<Vec<String>>,
}

impl TextCache {
    pub fn new(questions: &[Question], groups: FeatureGroups) -> Result<Self, TextError> {
        Ok(TextCache {
            readability: if groups.readability {
                questions.iter().map(readability_features).collect::<Result<_, _>>()?
            } else {
                Vec::new()
            },
            linguistic: if groups.linguistic {
                questions.iter().map(linguistic_features).collect::<Result<_, _>>()?
            } else {
                Vec::new()
            },
            docs: if groups.ir {
                questions.iter().map(preprocess_for_ir).collect()
            } else {
                Vec::new()
            },
        })
    }

    pub fn docs(&self) -> &[Vec<String>] {
        &self.docs
    }

    /// Fits an extractor on the rows `fit_rows` (vocabulary statistics come
    /// from those documents only).
    pub fn fit_extractor(&self, fit_rows: &[usize], groups: FeatureGroups, inf: f64, sup: f64) -> Result<FeatureExtractor, TextError> {
        let docs: Vec<Vec<String>> = if groups.ir {
            fit_rows.iter().map(|&i| self.docs[i].clone()).collect()
        } else {
            Vec::new()
        };
        FeatureExtractor::fit_documents(&docs, groups, inf, sup)
    }

    /// Builds the matrix for `rows` under a fitted extractor. Produces the
    /// same values as [`FeatureExtractor::transform`].
    pub fn matrix(&self, rows: &[usize], extractor: &FeatureExtractor) -> FeatureMatrix {
        let g = extractor.groups;
        let vocab = extractor.vocabulary.as_ref();
        let data = rows
            .iter()
            .map(|&i| {
                FeatureVector {
                    groups: g,
                    readability: g.readability.then(|| self.readability[i]),
                    linguistic: g.linguistic.then(|| self.linguistic[i]),
                    tfidf: vocab.filter(|_| g.ir).map(|v| v.transform(&self.docs[i])),
                    tfidf_dim: if g.ir { vocab.map_or(0, TfidfVocabulary::len) } else { 0 },
                }
                .to_dense()
            })
            .collect();
        FeatureMatrix {
            groups: g,
            names: extractor.names(),
            rows: data,
        }
    }
}
