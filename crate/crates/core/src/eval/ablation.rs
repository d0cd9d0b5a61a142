//! Feature-group ablation: one tuned regressor per group subset and trait,
//! scored on held-out questions against the mean baseline.

use std::collections::BTreeMap;

use serde::Serialize;

use super::report::{Cell, Table};
use super::{regression_metrics, EvalError, RegressionMetrics, Result};
use crate::corpus::Question;
use crate::irt::{LatentTraits, TraitKind};
use crate::regress::{fit_mean_baseline, fit_text_regressor, RegressorKind, SearchSpace};
use crate::textfeat::{FeatureGroups, FeatureMatrix, TextCache};

/// Row label of the mean baseline.
pub const MAJORITY_LABEL: &str = "Majority";

#[derive(Debug, Clone)]
pub struct AblationSettings {
    pub kind: RegressorKind,
    /// Model hyperparameters plus, optionally, `inf`/`sup` threshold
    /// distributions (used only for subsets with the IR block).
    pub space: SearchSpace,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraitResult {
    pub target: TraitKind,
    pub inf: Option<f64>,
    pub sup: Option<f64>,
    pub metrics: RegressionMetrics,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AblationRow {
    pub label: String,
    /// `None` for the baseline row.
    pub groups: Option<FeatureGroups>,
    /// One entry per trait, in [`TraitKind::ALL`] order.
    pub results: Vec<TraitResult>,
}

impl AblationRow {
    pub fn result(&self, target: TraitKind) -> &TraitResult {
        self.results.iter().find(|r| r.target == target).expect("every row covers both traits")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AblationReport {
    pub rows: Vec<AblationRow>,
}

fn title(t: TraitKind) -> &'static str {
    match t {
        TraitKind::Difficulty => "Difficulty",
        TraitKind::Discrimination => "Discrimination",
    }
}

impl AblationReport {
    pub fn row(&self, groups: Option<FeatureGroups>) -> Option<&AblationRow> {
        self.rows.iter().find(|r| r.groups == groups)
    }

    pub fn table(&self) -> Table {
        let mut headers = vec!["Features".to_owned()];
        for t in TraitKind::ALL {
            for col in ["INF", "SUP", "RMSE", "MAE"] {
                headers.push(format!("{} {col}", title(t)));
            }
        }
        let mut table = Table::new(headers);
        for row in &self.rows {
            let mut cells: Vec<Cell> = vec![row.label.clone().into()];
            for t in TraitKind::ALL {
                let r = row.result(t);
                cells.extend([r.inf.into(), r.sup.into(), r.metrics.rmse.into(), r.metrics.mae.into()]);
            }
            table.push(cells);
        }
        table
    }
}

fn targets(questions: &[Question], traits: &BTreeMap<String, LatentTraits>, t: TraitKind) -> Result<Vec<f64>> {
    questions
        .iter()
        .map(|q| {
            traits
                .get(&q.question_id)
                .map(|tr| t.of(tr))
                .ok_or_else(|| EvalError::MissingTraits(q.question_id.clone()))
        })
        .collect()
}

/// Runs the seven group subsets plus the baseline for both traits. Tuning,
/// vocabulary fitting and final fits see `q_train` only; metrics come from
/// `q_test`.
pub fn run_ablation(
    q_train: &[Question],
    q_test: &[Question],
    traits: &BTreeMap<String, LatentTraits>,
    settings: &AblationSettings,
) -> Result<AblationReport> {
    let all: Vec<Question> = q_train.iter().chain(q_test).cloned().collect();
    let cache = TextCache::new(&all, FeatureGroups::ALL)?;
    let train_rows: Vec<usize> = (0..q_train.len()).collect();
    let test_rows: Vec<usize> = (q_train.len()..all.len()).collect();
    let mut y_train = BTreeMap::new();
    let mut y_test = BTreeMap::new();
    for t in TraitKind::ALL {
        y_train.insert(t, targets(q_train, traits, t)?);
        y_test.insert(t, targets(q_test, traits, t)?);
    }

    let mut rows = Vec::with_capacity(FeatureGroups::ABLATION.len() + 1);
    for groups in FeatureGroups::ABLATION {
        let mut results = Vec::new();
        for t in TraitKind::ALL {
            log::info!("ablation: {} / {}", groups.label(), t.name());
            let fit = fit_text_regressor(&cache, &train_rows, &y_train[&t], t, groups, settings.kind, &settings.space)?;
            let pred = fit.model.predict(&cache.matrix(&test_rows, &fit.extractor))?;
            let thresholds = fit.thresholds();
            results.push(TraitResult {
                target: t,
                inf: thresholds.map(|p| p.0),
                sup: thresholds.map(|p| p.1),
                metrics: regression_metrics(&pred, &y_test[&t], t.range())?,
            });
        }
        rows.push(AblationRow {
            label: groups.label(),
            groups: Some(groups),
            results,
        });
    }

    let mut results = Vec::new();
    for t in TraitKind::ALL {
        let model = fit_mean_baseline(&y_train[&t], t)?;
        let pred = model.predict(&FeatureMatrix::raw(vec![Vec::new(); q_test.len()]))?;
        results.push(TraitResult {
            target: t,
            inf: None,
            sup: None,
            metrics: regression_metrics(&pred, &y_test[&t], t.range())?,
        });
    }
    rows.push(AblationRow {
        label: MAJORITY_LABEL.to_owned(),
        groups: None,
        results,
    });
    Ok(AblationReport { rows })
}
