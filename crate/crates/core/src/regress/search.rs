//! Randomized k-fold cross-validated hyperparameter search.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{
    fit_forest, fit_mean_baseline, fit_ridge, fit_tree, FeaturesPerSplit, ForestParams, RegressError, RegressorKind,
    Result, TraitRegressor, TreeParams,
};
use crate::irt::TraitKind;
use crate::seeding;
use crate::textfeat::FeatureMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Int(i64),
    Real(f64),
    Text(String),
}

impl ParamValue {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            ParamValue::Int(i) => Some(*i as f64),
            ParamValue::Real(r) => Some(*r),
            ParamValue::Text(_) => None,
        }
    }
}

impl std::fmt::Display for ParamValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ParamValue::Int(i) => write!(f, "{i}"),
            ParamValue::Real(r) => write!(f, "{r}"),
            ParamValue::Text(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Distribution {
    /// Uniform over the integers `low..=high`.
    IntRange { low: i64, high: i64 },
    Uniform { low: f64, high: f64 },
    LogUniform { low: f64, high: f64 },
    Categorical { values: Vec<ParamValue> },
}

impl Distribution {
    fn validate(&self, name: &str) -> Result<()> {
        let ok = match self {
            Distribution::IntRange { low, high } => low <= high,
            Distribution::Uniform { low, high } => low.is_finite() && high.is_finite() && low <= high,
            Distribution::LogUniform { low, high } => *low > 0.0 && high.is_finite() && low <= high,
            Distribution::Categorical { values } => !values.is_empty(),
        };
        if ok {
            Ok(())
        } else {
            Err(RegressError::InvalidParams(format!("bad search distribution for {name}")))
        }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> ParamValue {
        match self {
            Distribution::IntRange { low, high } => ParamValue::Int(rng.random_range(*low..=*high)),
            Distribution::Uniform { low, high } => ParamValue::Real(if low == high { *low } else { rng.random_range(*low..*high) }),
            Distribution::LogUniform { low, high } => {
                let (a, b) = (low.ln(), high.ln());
                ParamValue::Real(if a == b { *low } else { rng.random_range(a..b).exp() })
            }
            Distribution::Categorical { values } => values[rng.random_range(0..values.len())].clone(),
        }
    }
}

pub type Candidate = BTreeMap<String, ParamValue>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchSpace {
    pub params: BTreeMap<String, Distribution>,
    pub n_candidates: usize,
    #[serde(default = "default_folds")]
    pub k_folds: usize,
    pub seed: u64,
}

fn default_folds() -> usize {
    10
}

fn categorical(values: Vec<ParamValue>) -> Distribution {
    Distribution::Categorical { values }
}

/// The stock search space for `kind`; `text_thresholds` adds the TF-IDF
/// document-frequency cut-offs `inf` and `sup`.
pub fn default_search_space(kind: RegressorKind, text_thresholds: bool, n_candidates: usize, seed: u64) -> SearchSpace {
    use ParamValue::{Int, Real, Text};
    let mut params = BTreeMap::new();
    let depth = || {
        categorical(vec![Int(4), Int(6), Int(8), Int(12), Int(16), Text("unlimited".into())])
    };
    match kind {
        RegressorKind::Forest => {
            params.insert("n_trees".into(), Distribution::IntRange { low: 50, high: 300 });
            params.insert("max_depth".into(), depth());
            params.insert("min_samples_leaf".into(), Distribution::IntRange { low: 1, high: 10 });
            params.insert(
                "features_per_split".into(),
                categorical(vec![Text("sqrt".into()), Real(0.3), Real(1.0)]),
            );
        }
        RegressorKind::Tree => {
            params.insert("max_depth".into(), depth());
            params.insert("min_samples_leaf".into(), Distribution::IntRange { low: 1, high: 10 });
        }
        RegressorKind::Ridge => {
            params.insert("l2".into(), Distribution::LogUniform { low: 1e-4, high: 10.0 });
        }
        RegressorKind::MeanBaseline => {}
    }
    if text_thresholds {
        params.insert("inf".into(), categorical(vec![Real(0.0), Real(0.02), Real(0.04)]));
        params.insert(
            "sup".into(),
            categorical(vec![Real(0.90), Real(0.92), Real(0.94), Real(0.96), Real(0.98)]),
        );
    }
    SearchSpace {
        params,
        n_candidates,
        k_folds: 10,
        seed,
    }
}

/// Samples the candidate list. Each parameter of candidate `i` draws from
/// its own stream, so adding a parameter leaves the others unchanged.
pub fn search_candidates(space: &SearchSpace) -> Result<Vec<Candidate>> {
    if space.n_candidates == 0 {
        return Err(RegressError::InvalidParams("n_candidates must be at least 1".into()));
    }
    if space.k_folds < 2 {
        return Err(RegressError::InvalidParams("k_folds must be at least 2".into()));
    }
    for (name, dist) in &space.params {
        dist.validate(name)?;
    }
    Ok((0..space.n_candidates)
        .map(|i| {
            space
                .params
                .iter()
                .map(|(name, dist)| {
                    let mut rng = seeding::rng(space.seed, &[0xca9d, i as u64, seeding::name_hash(name)]);
                    (name.clone(), dist.sample(&mut rng))
                })
                .collect()
        })
        .collect())
}

/// Seeded shuffle of `0..n` cut into `k` contiguous folds whose sizes differ
/// by at most one. Each fold is returned sorted.
pub fn kfold_indices(n: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 || n < k {
        return Err(RegressError::InsufficientData { rows: n, folds: k });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut seeding::rng(seed, &[0xf01d]));
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for i in 0..k {
        let size = n / k + usize::from(i < n % k);
        let mut fold = order[start..start + size].to_vec();
        fold.sort_unstable();
        folds.push(fold);
        start += size;
    }
    Ok(folds)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CvRow {
    pub candidate: Candidate,
    pub fold_rmse: Vec<f64>,
    pub mean_rmse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchResult {
    pub best_index: usize,
    pub table: Vec<CvRow>,
}

impl SearchResult {
    pub fn best(&self) -> &Candidate {
        &self.table[self.best_index].candidate
    }

    pub fn best_rmse(&self) -> f64 {
        self.table[self.best_index].mean_rmse
    }
}

/// Cross-validates every candidate with `evaluate(candidate, train, val)`,
/// which returns the validation RMSE. The lowest mean wins; ties go to the
/// earliest candidate.
pub fn search_with<F>(space: &SearchSpace, n_rows: usize, mut evaluate: F) -> Result<SearchResult>
where
    F: FnMut(&Candidate, &[usize], &[usize]) -> Result<f64>,
{
    let candidates = search_candidates(space)?;
    let folds = kfold_indices(n_rows, space.k_folds, space.seed)?;
    let splits: Vec<(Vec<usize>, &Vec<usize>)> = folds
        .iter()
        .enumerate()
        .map(|(i, val)| {
            let train = folds
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .flat_map(|(_, f)| f.iter().copied())
                .collect::<std::collections::BTreeSet<_>>()
                .into_iter()
                .collect();
            (train, val)
        })
        .collect();
    let mut table: Vec<CvRow> = Vec::with_capacity(candidates.len());
    let mut best_index = 0;
    for (i, candidate) in candidates.into_iter().enumerate() {
        let fold_rmse = splits
            .iter()
            .map(|(train, val)| evaluate(&candidate, train, val))
            .collect::<Result<Vec<f64>>>()?;
        let mean = fold_rmse.iter().sum::<f64>() / fold_rmse.len() as f64;
        let mean_rmse = if mean.is_nan() { f64::INFINITY } else { mean };
        if i > 0 && mean_rmse < table[best_index].mean_rmse {
            best_index = i;
        }
        table.push(CvRow {
            candidate,
            fold_rmse,
            mean_rmse,
        });
    }
    Ok(SearchResult { best_index, table })
}

fn int_param(c: &Candidate, name: &str, default: i64) -> Result<i64> {
    match c.get(name) {
        None => Ok(default),
        Some(ParamValue::Int(i)) => Ok(*i),
        Some(ParamValue::Real(r)) if r.fract() == 0.0 => Ok(*r as i64),
        Some(v) => Err(RegressError::InvalidParams(format!("{name} must be an integer, got {v}"))),
    }
}

fn real_param(c: &Candidate, name: &str, default: f64) -> Result<f64> {
    match c.get(name) {
        None => Ok(default),
        Some(v) => v
            .as_f64()
            .ok_or_else(|| RegressError::InvalidParams(format!("{name} must be a number, got {v}"))),
    }
}

fn positive(name: &str, v: i64) -> Result<usize> {
    usize::try_from(v)
        .ok()
        .filter(|&u| u >= 1)
        .ok_or_else(|| RegressError::InvalidParams(format!("{name} must be a positive integer, got {v}")))
}

fn tree_params(c: &Candidate) -> Result<TreeParams> {
    let max_depth = match c.get("max_depth") {
        None => None,
        Some(ParamValue::Text(t)) if t == "unlimited" || t == "none" => None,
        Some(ParamValue::Int(d)) if *d >= 0 => Some(*d as usize),
        Some(v) => return Err(RegressError::InvalidParams(format!("bad max_depth {v}"))),
    };
    let min_split_improvement = real_param(c, "min_split_improvement", 0.0)?;
    if !(min_split_improvement >= 0.0 && min_split_improvement.is_finite()) {
        return Err(RegressError::InvalidParams("min_split_improvement must be non-negative".into()));
    }
    Ok(TreeParams {
        max_depth,
        min_samples_leaf: positive("min_samples_leaf", int_param(c, "min_samples_leaf", 1)?)?,
        min_split_improvement,
    })
}

fn features_per_split(c: &Candidate) -> Result<FeaturesPerSplit> {
    Ok(match c.get("features_per_split") {
        None => FeaturesPerSplit::Sqrt,
        Some(ParamValue::Text(t)) if t == "sqrt" => FeaturesPerSplit::Sqrt,
        Some(ParamValue::Text(t)) if t == "all" => FeaturesPerSplit::All,
        Some(ParamValue::Real(f)) if *f == 1.0 => FeaturesPerSplit::All,
        Some(ParamValue::Real(f)) => FeaturesPerSplit::Fraction(*f),
        Some(ParamValue::Int(k)) => FeaturesPerSplit::Count(positive("features_per_split", *k)?),
        Some(v) => return Err(RegressError::InvalidParams(format!("bad features_per_split {v}"))),
    })
}

/// Fits `kind` with the hyperparameters in `candidate`. Keys that do not
/// belong to `kind` (such as text thresholds) are ignored.
pub fn fit_candidate(
    kind: RegressorKind,
    x: &FeatureMatrix,
    y: &[f64],
    target: TraitKind,
    candidate: &Candidate,
    seed: u64,
) -> Result<TraitRegressor> {
    match kind {
        RegressorKind::Forest => {
            let params = ForestParams {
                n_trees: positive("n_trees", int_param(candidate, "n_trees", 100)?)?,
                tree: tree_params(candidate)?,
                features_per_split: features_per_split(candidate)?,
                bootstrap: true,
                seed,
            };
            fit_forest(x, y, target, &params)
        }
        RegressorKind::Tree => fit_tree(x, y, target, &tree_params(candidate)?, seed),
        RegressorKind::Ridge => fit_ridge(x, y, target, real_param(candidate, "l2", 1.0)?),
        RegressorKind::MeanBaseline => fit_mean_baseline(y, target),
    }
}

pub(crate) fn rmse(pred: &[f64], truth: &[f64]) -> f64 {
    let s: f64 = pred.iter().zip(truth).map(|(p, t)| (p - t).powi(2)).sum();
    (s / pred.len() as f64).sqrt()
}

/// Randomized search over a fixed feature matrix.
pub fn randomized_search_cv(
    x: &FeatureMatrix,
    y: &[f64],
    target: TraitKind,
    kind: RegressorKind,
    space: &SearchSpace,
) -> Result<SearchResult> {
    if x.n_rows() != y.len() {
        return Err(RegressError::DimensionMismatch {
            expected: x.n_rows(),
            found: y.len(),
        });
    }
    search_with(space, x.n_rows(), |candidate, train, val| {
        let ty: Vec<f64> = train.iter().map(|&i| y[i]).collect();
        let model = fit_candidate(kind, &x.select_rows(train), &ty, target, candidate, space.seed)?;
        let pred = model.predict(&x.select_rows(val))?;
        let vy: Vec<f64> = val.iter().map(|&i| y[i]).collect();
        Ok(rmse(&pred, &vy))
    })
}
