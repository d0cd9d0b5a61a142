//! Regressors mapping question feature vectors to one latent trait, plus
//! randomized cross-validated hyperparameter search.

mod forest;
mod ridge;
mod search;
mod text;
mod tree;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::irt::TraitKind;
use crate::textfeat::{FeatureGroups, FeatureMatrix, TextError};

pub use forest::{FeaturesPerSplit, ForestParams};
pub use ridge::RidgeFit;
pub use search::{
    default_search_space, fit_candidate, kfold_indices, randomized_search_cv, search_candidates, search_with, Candidate, CvRow, Distribution,
    ParamValue, SearchResult, SearchSpace,
};
pub use text::{fit_text_regressor, TextRegressorFit, INF_KEY, SUP_KEY};
pub use tree::{Node, TreeParams};

/// Version written into, and required from, serialized model documents.
pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum RegressError {
    #[error("training set is empty")]
    EmptyTraining,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("feature groups differ: model trained on [{expected}], input has [{found}]")]
    GroupMismatch { expected: FeatureGroups, found: FeatureGroups },
    #[error("normal equations are singular")]
    SingularSystem,
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("{rows} rows cannot be split into {folds} folds")]
    InsufficientData { rows: usize, folds: usize },
    #[error("non-finite value in training data")]
    NonFinite,
    #[error("unsupported model format version {0}")]
    UnsupportedVersion(u64),
    #[error("model document: {0}")]
    Document(#[from] serde_json::Error),
    #[error(transparent)]
    Features(#[from] TextError),
}

pub type Result<T> = std::result::Result<T, RegressError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegressorKind {
    Forest,
    Tree,
    Ridge,
    MeanBaseline,
}

impl RegressorKind {
    pub fn name(self) -> &'static str {
        match self {
            RegressorKind::Forest => "forest",
            RegressorKind::Tree => "tree",
            RegressorKind::Ridge => "ridge",
            RegressorKind::MeanBaseline => "mean_baseline",
        }
    }
}

/// Fitted parameters of each variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum Model {
    Forest { params: ForestParams, trees: Vec<Node> },
    Tree { params: TreeParams, seed: u64, tree: Node },
    Ridge(RidgeFit),
    MeanBaseline { value: f64 },
}

/// A fitted regressor for one latent trait. `groups` and `n_features` are
/// `None` for the mean baseline, which ignores its input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraitRegressor {
    pub format_version: u32,
    pub target: TraitKind,
    pub groups: Option<FeatureGroups>,
    pub n_features: Option<usize>,
    #[serde(flatten)]
    pub model: Model,
}

fn check_training(x: &FeatureMatrix, y: &[f64]) -> Result<usize> {
    if x.rows.is_empty() {
        return Err(RegressError::EmptyTraining);
    }
    if x.rows.len() != y.len() {
        return Err(RegressError::DimensionMismatch {
            expected: x.rows.len(),
            found: y.len(),
        });
    }
    let d = x.rows[0].len();
    for r in &x.rows {
        if r.len() != d {
            return Err(RegressError::DimensionMismatch {
                expected: d,
                found: r.len(),
            });
        }
        if r.iter().any(|v| !v.is_finite()) {
            return Err(RegressError::NonFinite);
        }
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(RegressError::NonFinite);
    }
    Ok(d)
}

fn regressor(x: &FeatureMatrix, d: usize, target: TraitKind, model: Model) -> TraitRegressor {
    TraitRegressor {
        format_version: MODEL_FORMAT_VERSION,
        target,
        groups: Some(x.groups),
        n_features: Some(d),
        model,
    }
}

/// Single CART tree using every feature at every split.
pub fn fit_tree(x: &FeatureMatrix, y: &[f64], target: TraitKind, params: &TreeParams, seed: u64) -> Result<TraitRegressor> {
    let d = check_training(x, y)?;
    let forest = ForestParams {
        n_trees: 1,
        tree: params.clone(),
        features_per_split: FeaturesPerSplit::All,
        bootstrap: false,
        seed,
    };
    let tree = forest::grow_forest(&x.rows, y, &forest)?.remove(0);
    Ok(regressor(
        x,
        d,
        target,
        Model::Tree {
            params: params.clone(),
            seed,
            tree,
        },
    ))
}

pub fn fit_forest(x: &FeatureMatrix, y: &[f64], target: TraitKind, params: &ForestParams) -> Result<TraitRegressor> {
    let d = check_training(x, y)?;
    let trees = forest::grow_forest(&x.rows, y, params)?;
    Ok(regressor(
        x,
        d,
        target,
        Model::Forest {
            params: params.clone(),
            trees,
        },
    ))
}

pub fn fit_ridge(x: &FeatureMatrix, y: &[f64], target: TraitKind, l2: f64) -> Result<TraitRegressor> {
    let d = check_training(x, y)?;
    let fit = RidgeFit::fit(&x.rows, y, l2)?;
    Ok(regressor(x, d, target, Model::Ridge(fit)))
}

pub fn fit_mean_baseline(y: &[f64], target: TraitKind) -> Result<TraitRegressor> {
    if y.is_empty() {
        return Err(RegressError::EmptyTraining);
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(RegressError::NonFinite);
    }
    Ok(TraitRegressor {
        format_version: MODEL_FORMAT_VERSION,
        target,
        groups: None,
        n_features: None,
        model: Model::MeanBaseline {
            value: y.iter().sum::<f64>() / y.len() as f64,
        },
    })
}

impl TraitRegressor {
    pub fn kind(&self) -> RegressorKind {
        match self.model {
            Model::Forest { .. } => RegressorKind::Forest,
            Model::Tree { .. } => RegressorKind::Tree,
            Model::Ridge(_) => RegressorKind::Ridge,
            Model::MeanBaseline { .. } => RegressorKind::MeanBaseline,
        }
    }

    fn raw_row(&self, row: &[f64]) -> f64 {
        match &self.model {
            Model::Forest { trees, .. } => trees.iter().map(|t| t.predict(row)).sum::<f64>() / trees.len() as f64,
            Model::Tree { tree, .. } => tree.predict(row),
            Model::Ridge(fit) => fit.predict_row(row),
            Model::MeanBaseline { value } => *value,
        }
    }

    /// Predictions clamped to the target trait's admissible range.
    pub fn predict(&self, x: &FeatureMatrix) -> Result<Vec<f64>> {
        if let Some(g) = self.groups {
            if g != x.groups {
                return Err(RegressError::GroupMismatch {
                    expected: g,
                    found: x.groups,
                });
            }
        }
        if let Some(d) = self.n_features {
            for r in &x.rows {
                if r.len() != d {
                    return Err(RegressError::DimensionMismatch {
                        expected: d,
                        found: r.len(),
                    });
                }
            }
        }
        Ok(x.rows.iter().map(|r| self.target.clamp(self.raw_row(r))).collect())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Parses a model document, rejecting unknown format versions.
    pub fn from_json(text: &str) -> Result<Self> {
        let mut de = serde_json::Deserializer::from_str(text);
        de.disable_recursion_limit();
        let value = serde_json::Value::deserialize(&mut de)?;
        de.end()?;
        match value.get("format_version").and_then(serde_json::Value::as_u64) {
            Some(v) if v == MODEL_FORMAT_VERSION as u64 => {}
            Some(v) => return Err(RegressError::UnsupportedVersion(v)),
            None => {
                return Err(RegressError::InvalidParams("model document lacks format_version".into()));
            }
        }
        let model: TraitRegressor = serde_json::from_value(value)?;
        if let (Some(d), Model::Forest { trees, .. }) = (model.n_features, &model.model) {
            if trees.iter().filter_map(Node::max_feature).any(|f| f >= d) {
                return Err(RegressError::InvalidParams("tree references a feature beyond n_features".into()));
            }
        }
        if let (Some(d), Model::Tree { tree, .. }) = (model.n_features, &model.model) {
            if tree.max_feature().is_some_and(|f| f >= d) {
                return Err(RegressError::InvalidParams("tree references a feature beyond n_features".into()));
            }
        }
        if let (Some(d), Model::Ridge(fit)) = (model.n_features, &model.model) {
            if fit.means.len() != d || fit.scales.len() != d || fit.weights.len() != d {
                return Err(RegressError::InvalidParams("ridge vectors do not match n_features".into()));
            }
        }
        Ok(model)
    }
}
