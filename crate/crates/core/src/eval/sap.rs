//! Sequential replay predicting each answer from the student's skill as
//! estimated from their earlier answers.

use std::collections::BTreeMap;

use serde::Serialize;

use super::{EvalError, Result, DECISION_THRESHOLD};
use crate::corpus::InteractionDataset;
use crate::irt::{estimate_skill, item_response_probability, IrtConfig, LatentTraits};

/// One replayed interaction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SapRecord {
    pub student_id: String,
    pub question_id: String,
    pub timestamp_ms: u64,
    /// Skill estimate before this answer was revealed.
    pub theta: f64,
    pub score: f64,
    pub predicted: bool,
    pub label: bool,
}

/// Per-student timelines in student-id order; within a student, ascending
/// timestamp with ties kept in input order.
fn timelines(a: &InteractionDataset) -> BTreeMap<&str, Vec<usize>> {
    let mut by_student: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, x) in a.interactions.iter().enumerate() {
        by_student.entry(x.student_id.as_str()).or_default().push(i);
    }
    for idx in by_student.values_mut() {
        idx.sort_by_key(|&i| a.interactions[i].timestamp_ms);
    }
    by_student
}

/// Replays `a_sap`: each answer is scored with the response function at the
/// student's current skill (0 before any answer), then the skill is
/// re-estimated from every answer of that student seen so far.
pub fn sap_simulate(
    a_sap: &InteractionDataset,
    traits: &BTreeMap<String, LatentTraits>,
    config: &IrtConfig,
) -> Result<Vec<SapRecord>> {
    for x in a_sap.iter() {
        if !traits.contains_key(&x.question_id) {
            return Err(EvalError::MissingTraits(x.question_id.clone()));
        }
    }
    let mut out = Vec::with_capacity(a_sap.len());
    for idx in timelines(a_sap).values() {
        let mut answered: Vec<(LatentTraits, bool)> = Vec::with_capacity(idx.len());
        let mut theta = estimate_skill(&answered, config).theta;
        for &i in idx {
            let x = &a_sap.interactions[i];
            let t = traits[&x.question_id];
            let score = item_response_probability(theta, &t, config);
            out.push(SapRecord {
                student_id: x.student_id.clone(),
                question_id: x.question_id.clone(),
                timestamp_ms: x.timestamp_ms,
                theta,
                score,
                predicted: score > DECISION_THRESHOLD,
                label: x.correct,
            });
            answered.push((t, x.correct));
            theta = estimate_skill(&answered, config).theta;
        }
    }
    Ok(out)
}

/// Share of correct answers, used as the constant score of the majority
/// baseline.
pub fn majority_score(training: &InteractionDataset) -> Result<f64> {
    training.correct_rate().ok_or(EvalError::EmptyInput)
}

/// The majority baseline replay: every answer gets the same score.
pub fn sap_constant(a_sap: &InteractionDataset, score: f64) -> Vec<SapRecord> {
    timelines(a_sap)
        .values()
        .flatten()
        .map(|&i| {
            let x = &a_sap.interactions[i];
            SapRecord {
                student_id: x.student_id.clone(),
                question_id: x.question_id.clone(),
                timestamp_ms: x.timestamp_ms,
                theta: 0.0,
                score,
                predicted: score > DECISION_THRESHOLD,
                label: x.correct,
            }
        })
        .collect()
}
