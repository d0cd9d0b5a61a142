//! Random forests of bootstrap-resampled CART trees.

use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::tree::{Node, TreeBuilder, TreeParams};
use super::{RegressError, Result};
use crate::seeding;

/// How many features each split considers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FeaturesPerSplit {
    All,
    Sqrt,
    /// Fraction of the feature dimension, rounded down, at least 1.
    Fraction(f64),
    Count(usize),
}

impl FeaturesPerSplit {
    pub fn resolve(self, n_features: usize) -> Result<usize> {
        if n_features == 0 {
            return Ok(0);
        }
        let k = match self {
            FeaturesPerSplit::All => n_features,
            FeaturesPerSplit::Sqrt => ((n_features as f64).sqrt().floor() as usize).max(1),
            FeaturesPerSplit::Fraction(f) => {
                if !(f > 0.0 && f <= 1.0) {
                    return Err(RegressError::InvalidParams(format!("features_per_split fraction {f} outside (0, 1]")));
                }
                ((f * n_features as f64).floor() as usize).clamp(1, n_features)
            }
            FeaturesPerSplit::Count(c) => {
                if c == 0 || c > n_features {
                    return Err(RegressError::InvalidParams(format!(
                        "features_per_split {c} not in 1..={n_features}"
                    )));
                }
                c
            }
        };
        Ok(k)
    }
}

// Serialized as "all", "sqrt", a fraction such as 0.3, or an integer count.
impl Serialize for FeaturesPerSplit {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            FeaturesPerSplit::All => s.serialize_str("all"),
            FeaturesPerSplit::Sqrt => s.serialize_str("sqrt"),
            FeaturesPerSplit::Fraction(f) => s.serialize_f64(*f),
            FeaturesPerSplit::Count(c) => s.serialize_u64(*c as u64),
        }
    }
}

impl<'de> Deserialize<'de> for FeaturesPerSplit {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Count(u64),
            Fraction(f64),
            Name(String),
        }
        match Raw::deserialize(d)? {
            Raw::Count(c) => Ok(FeaturesPerSplit::Count(c as usize)),
            Raw::Fraction(f) => Ok(FeaturesPerSplit::Fraction(f)),
            Raw::Name(n) => match n.as_str() {
                "all" => Ok(FeaturesPerSplit::All),
                "sqrt" => Ok(FeaturesPerSplit::Sqrt),
                other => Err(serde::de::Error::custom(format!("unknown features_per_split {other:?}"))),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForestParams {
    pub n_trees: usize,
    pub tree: TreeParams,
    pub features_per_split: FeaturesPerSplit,
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 100,
            tree: TreeParams::default(),
            features_per_split: FeaturesPerSplit::Sqrt,
            bootstrap: true,
            seed: 0,
        }
    }
}

pub(crate) fn grow_forest(rows: &[Vec<f64>], y: &[f64], params: &ForestParams) -> Result<Vec<Node>> {
    if params.n_trees == 0 {
        return Err(RegressError::InvalidParams("n_trees must be at least 1".into()));
    }
    let n_features = rows.first().map_or(0, Vec::len);
    let builder = TreeBuilder {
        rows,
        y,
        params: &params.tree,
        n_features,
        features_per_split: params.features_per_split.resolve(n_features)?,
    };
    let n = rows.len();
    let mut trees = Vec::with_capacity(params.n_trees);
    for t in 0..params.n_trees {
        let mut rng = seeding::rng(params.seed, &[0x7ee, t as u64]);
        let mut samples: Vec<usize> = if params.bootstrap {
            (0..n).map(|_| rng.random_range(0..n)).collect()
        } else {
            (0..n).collect()
        };
        trees.push(builder.grow(&mut samples, &mut rng));
    }
    Ok(trees)
}
