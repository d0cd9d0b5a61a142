//! Error metrics, the students'-answers-prediction replay, ablation runs and
//! report tables.

mod ablation;
mod report;
mod sap;

use serde::Serialize;
use thiserror::Error;

use crate::irt::IrtError;
use crate::regress::RegressError;
use crate::textfeat::TextError;

pub use ablation::{run_ablation, AblationReport, AblationRow, AblationSettings, TraitResult, MAJORITY_LABEL};
pub use report::{fmt_optional, Cell, Table};
pub use sap::{majority_score, sap_constant, sap_simulate, SapRecord};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("no values to evaluate")]
    EmptyInput,
    #[error("length mismatch: {0} predictions for {1} targets")]
    DimensionMismatch(usize, usize),
    #[error("no latent traits for question {0:?}")]
    MissingTraits(String),
    #[error(transparent)]
    Regress(#[from] RegressError),
    #[error(transparent)]
    Text(#[from] TextError),
    #[error(transparent)]
    Irt(#[from] IrtError),
}

pub type Result<T> = std::result::Result<T, EvalError>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegressionMetrics {
    pub rmse: f64,
    pub mae: f64,
    /// RMSE over the width of the trait range.
    pub relative_rmse: f64,
}

pub fn regression_metrics(predicted: &[f64], truth: &[f64], range: (f64, f64)) -> Result<RegressionMetrics> {
    if predicted.len() != truth.len() {
        return Err(EvalError::DimensionMismatch(predicted.len(), truth.len()));
    }
    if predicted.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    let n = predicted.len() as f64;
    let (mut se, mut ae) = (0.0, 0.0);
    for (p, t) in predicted.iter().zip(truth) {
        se += (p - t) * (p - t);
        ae += (p - t).abs();
    }
    let rmse = (se / n).sqrt();
    Ok(RegressionMetrics {
        rmse,
        mae: ae / n,
        relative_rmse: rmse / (range.1 - range.0),
    })
}

/// Answer-prediction metrics. `None` marks an undefined value (one class
/// absent for AUC, an empty denominator otherwise).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassificationMetrics {
    pub auc: Option<f64>,
    pub accuracy: f64,
    pub precision_correct: Option<f64>,
    pub recall_correct: Option<f64>,
    pub precision_wrong: Option<f64>,
    pub recall_wrong: Option<f64>,
}

/// Default decision threshold; a score must exceed it to predict a correct
/// answer.
pub const DECISION_THRESHOLD: f64 = 0.5;

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

/// Area under the ROC curve from the Mann-Whitney rank statistic, with
/// midranks for tied scores. `None` unless both classes are present.
pub fn auc(scores: &[f64], labels: &[bool]) -> Option<f64> {
    let n_pos = labels.iter().filter(|&&l| l).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return None;
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let midrank = (i + j) as f64 / 2.0 + 1.0;
        rank_sum += midrank * order[i..=j].iter().filter(|&&k| labels[k]).count() as f64;
        i = j + 1;
    }
    let u = rank_sum - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Some(u / (n_pos as f64 * n_neg as f64))
}

pub fn classification_metrics(scores: &[f64], labels: &[bool], threshold: f64) -> Result<ClassificationMetrics> {
    if scores.len() != labels.len() {
        return Err(EvalError::DimensionMismatch(scores.len(), labels.len()));
    }
    if scores.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    let (mut tp, mut fp, mut tn, mut fn_) = (0, 0, 0, 0);
    for (&s, &l) in scores.iter().zip(labels) {
        match (s > threshold, l) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, false) => tn += 1,
            (false, true) => fn_ += 1,
        }
    }
    Ok(ClassificationMetrics {
        auc: auc(scores, labels),
        accuracy: (tp + tn) as f64 / scores.len() as f64,
        precision_correct: ratio(tp, tp + fp),
        recall_correct: ratio(tp, tp + fn_),
        precision_wrong: ratio(tn, tn + fn_),
        recall_wrong: ratio(tn, tn + fp),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn regression_examples() {
        let m = regression_metrics(&[1.0, 2.0], &[1.0, 2.0], (-5.0, 5.0)).unwrap();
        assert_eq!((m.rmse, m.mae, m.relative_rmse), (0.0, 0.0, 0.0));
        let m = regression_metrics(&[0.0, 0.0], &[1.0, -1.0], (-5.0, 5.0)).unwrap();
        assert_eq!((m.rmse, m.mae), (1.0, 1.0));
        assert!(matches!(regression_metrics(&[], &[], (0.0, 1.0)), Err(EvalError::EmptyInput)));
        assert!(matches!(
            regression_metrics(&[1.0], &[], (0.0, 1.0)),
            Err(EvalError::DimensionMismatch(1, 0))
        ));
    }

    #[test]
    fn relative_rmse_over_difficulty_range() {
        let m = regression_metrics(&[0.753], &[0.0], (-5.0, 5.0)).unwrap();
        assert_abs_diff_eq!(m.relative_rmse, 0.0753, epsilon = 1e-12);
    }

    #[test]
    fn auc_examples() {
        assert_eq!(auc(&[0.1, 0.2, 0.8, 0.9], &[false, false, true, true]), Some(1.0));
        assert_eq!(auc(&[0.4; 4], &[false, true, true, false]), Some(0.5));
        assert_eq!(auc(&[0.4, 0.6], &[true, true]), None);
    }

    #[test]
    fn constant_correct_prediction() {
        let labels: Vec<bool> = (0..1000).map(|i| i < 613).collect();
        let m = classification_metrics(&[0.613; 1000], &labels, DECISION_THRESHOLD).unwrap();
        assert_abs_diff_eq!(m.accuracy, 0.613, epsilon = 1e-12);
        assert_eq!(m.recall_correct, Some(1.0));
        assert_eq!(m.recall_wrong, Some(0.0));
        assert_eq!(m.precision_wrong, None);
        assert_eq!(m.auc, Some(0.5));
    }

    #[test]
    fn exact_half_predicts_wrong() {
        let m = classification_metrics(&[0.5], &[false], DECISION_THRESHOLD).unwrap();
        assert_eq!(m.accuracy, 1.0);
    }
}
