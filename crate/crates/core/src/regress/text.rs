//! Joint tuning of TF-IDF thresholds and regressor hyperparameters.

use super::search::{fit_candidate, rmse, search_with, Candidate, SearchResult, SearchSpace};
use super::{RegressError, RegressorKind, Result, TraitRegressor};
use crate::irt::TraitKind;
use crate::textfeat::{FeatureExtractor, FeatureGroups, TextCache};

/// Search keys holding the TF-IDF document-frequency thresholds.
pub const INF_KEY: &str = "inf";
pub const SUP_KEY: &str = "sup";

#[derive(Debug, Clone)]
pub struct TextRegressorFit {
    pub extractor: FeatureExtractor,
    pub model: TraitRegressor,
    pub search: SearchResult,
}

impl TextRegressorFit {
    /// `(inf, sup)` of the fitted vocabulary, when the IR block is active.
    pub fn thresholds(&self) -> Option<(f64, f64)> {
        self.extractor.vocabulary.as_ref().map(|v| (v.inf, v.sup))
    }
}

fn thresholds(c: &Candidate) -> Result<(f64, f64)> {
    let get = |key: &str, default: f64| match c.get(key) {
        None => Ok(default),
        Some(v) => v
            .as_f64()
            .ok_or_else(|| RegressError::InvalidParams(format!("{key} must be a number, got {v}"))),
    };
    Ok((get(INF_KEY, 0.0)?, get(SUP_KEY, 1.0)?))
}

/// Cross-validated search over `space` on the cached questions `rows`,
/// followed by a final fit on all of them. With the IR block active, every
/// fold fits its own vocabulary on its training questions; without it the
/// threshold keys are dropped from the space.
pub fn fit_text_regressor(
    cache: &TextCache,
    rows: &[usize],
    y: &[f64],
    target: TraitKind,
    groups: FeatureGroups,
    kind: RegressorKind,
    space: &SearchSpace,
) -> Result<TextRegressorFit> {
    if groups.is_empty() {
        return Err(RegressError::InvalidParams("no feature groups selected".into()));
    }
    if rows.len() != y.len() {
        return Err(RegressError::DimensionMismatch {
            expected: rows.len(),
            found: y.len(),
        });
    }
    let mut space = space.clone();
    if !groups.ir {
        space.params.remove(INF_KEY);
        space.params.remove(SUP_KEY);
    }
    let seed = space.seed;
    let search = search_with(&space, rows.len(), |candidate, train, val| {
        let (inf, sup) = thresholds(candidate)?;
        let train_rows: Vec<usize> = train.iter().map(|&i| rows[i]).collect();
        let val_rows: Vec<usize> = val.iter().map(|&i| rows[i]).collect();
        let extractor = cache.fit_extractor(&train_rows, groups, inf, sup)?;
        let ty: Vec<f64> = train.iter().map(|&i| y[i]).collect();
        let model = fit_candidate(kind, &cache.matrix(&train_rows, &extractor), &ty, target, candidate, seed)?;
        let pred = model.predict(&cache.matrix(&val_rows, &extractor))?;
        let vy: Vec<f64> = val.iter().map(|&i| y[i]).collect();
        Ok(rmse(&pred, &vy))
    })?;
    let best = search.best();
    let (inf, sup) = thresholds(best)?;
    let extractor = cache.fit_extractor(rows, groups, inf, sup)?;
    let model = fit_candidate(kind, &cache.matrix(rows, &extractor), y, target, best, seed)?;
    Ok(TextRegressorFit {
        extractor,
        model,
        search,
    })
}
