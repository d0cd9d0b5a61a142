//! Two-parameter logistic item response model.
//!
//! The probability that a student with skill `theta` answers an item with
//! difficulty `b` and discrimination `a` correctly is
//! `1 / (1 + exp(-D * a * (theta - b)))`, with scaling constant `D`
//! (1.7 by default). Item calibration is a joint penalized maximum-likelihood
//! fit by alternating block coordinate ascent; skill estimation is a bounded
//! 1-D maximization of the response likelihood.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::InteractionDataset;
use crate::seeding;

#[derive(Debug, Error)]
pub enum IrtError {
    #[error("no {kind} entry for {id:?}")]
    MissingEntity { kind: &'static str, id: String },
    #[error("interaction dataset is empty")]
    EmptyDataset,
    #[error("invalid IRT configuration: {0}")]
    Config(String),
    #[error("non-finite latent trait for {0:?}")]
    NonFinite(String),
    #[error("traits file: {0}")]
    TraitsFile(String),
}

pub type Result<T> = std::result::Result<T, IrtError>;

/// Which latent trait a value or regressor refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TraitKind {
    Difficulty,
    Discrimination,
}

impl TraitKind {
    pub const ALL: [TraitKind; 2] = [TraitKind::Difficulty, TraitKind::Discrimination];

    /// Admissible value range, `(min, max)`.
    pub fn range(self) -> (f64, f64) {
        match self {
            TraitKind::Difficulty => (-5.0, 5.0),
            TraitKind::Discrimination => (-1.0, 2.5),
        }
    }

    pub fn clamp(self, v: f64) -> f64 {
        let (lo, hi) = self.range();
        v.clamp(lo, hi)
    }

    pub fn name(self) -> &'static str {
        match self {
            TraitKind::Difficulty => "difficulty",
            TraitKind::Discrimination => "discrimination",
        }
    }

    pub fn of(self, t: &LatentTraits) -> f64 {
        match self {
            TraitKind::Difficulty => t.difficulty,
            TraitKind::Discrimination => t.discrimination,
        }
    }
}

/// Difficulty `b` and discrimination `a` of one item, always finite and
/// inside [`TraitKind::range`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTraits")]
pub struct LatentTraits {
    difficulty: f64,
    discrimination: f64,
}

#[derive(Deserialize)]
struct RawTraits {
    difficulty: f64,
    discrimination: f64,
}

impl TryFrom<RawTraits> for LatentTraits {
    type Error = IrtError;
    fn try_from(r: RawTraits) -> Result<Self> {
        LatentTraits::try_new(r.difficulty, r.discrimination)
    }
}

impl LatentTraits {
    /// Clamps both values into range. Callers must pass finite values.
    pub fn clamped(difficulty: f64, discrimination: f64) -> Self {
        debug_assert!(difficulty.is_finite() && discrimination.is_finite());
        LatentTraits {
            difficulty: TraitKind::Difficulty.clamp(difficulty),
            discrimination: TraitKind::Discrimination.clamp(discrimination),
        }
    }

    pub fn try_new(difficulty: f64, discrimination: f64) -> Result<Self> {
        if !difficulty.is_finite() || !discrimination.is_finite() {
            return Err(IrtError::NonFinite(format!("b={difficulty}, a={discrimination}")));
        }
        Ok(Self::clamped(difficulty, discrimination))
    }

    pub fn difficulty(&self) -> f64 {
        self.difficulty
    }

    pub fn discrimination(&self) -> f64 {
        self.discrimination
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IrtConfig {
    /// Scaling constant `D` of the response function.
    pub scaling: f64,
    pub max_iterations: usize,
    /// Relative log-likelihood change below which calibration stops.
    pub tolerance: f64,
    /// L2 prior weight: theta and b shrink toward 0, a toward 1.
    pub prior_strength: f64,
    pub theta_bounds: (f64, f64),
}

impl Default for IrtConfig {
    fn default() -> Self {
        IrtConfig {
            scaling: 1.7,
            max_iterations: 500,
            tolerance: 1e-6,
            prior_strength: 0.01,
            theta_bounds: (-5.0, 5.0),
        }
    }
}

impl IrtConfig {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.theta_bounds;
        if !(self.scaling > 0.0 && self.scaling.is_finite()) {
            return Err(IrtError::Config(format!("scaling must be > 0, got {}", self.scaling)));
        }
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(IrtError::Config(format!("tolerance must be > 0, got {}", self.tolerance)));
        }
        if !(self.prior_strength >= 0.0 && self.prior_strength.is_finite()) {
            return Err(IrtError::Config("prior_strength must be >= 0".into()));
        }
        if self.max_iterations == 0 {
            return Err(IrtError::Config("max_iterations must be >= 1".into()));
        }
        if !(lo < hi && lo.is_finite() && hi.is_finite()) {
            return Err(IrtError::Config(format!("invalid theta_bounds ({lo}, {hi})")));
        }
        Ok(())
    }

    pub fn clamp_theta(&self, theta: f64) -> f64 {
        theta.clamp(self.theta_bounds.0, self.theta_bounds.1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SkillEstimate {
    pub theta: f64,
}

const PROB_EPS: f64 = 1e-15;

#[inline]
fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

#[inline]
fn log_sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        -(-z).exp().ln_1p()
    } else {
        z - z.exp().ln_1p()
    }
}

/// Log-probability of the observed outcome given the logit `z`.
#[inline]
fn outcome_log_prob(z: f64, correct: bool) -> f64 {
    if correct {
        log_sigmoid(z)
    } else {
        log_sigmoid(-z)
    }
}

/// Probability of a correct answer, strictly inside (0, 1).
pub fn item_response_probability(theta: f64, traits: &LatentTraits, config: &IrtConfig) -> f64 {
    let z = config.scaling * traits.discrimination * (theta - traits.difficulty);
    sigmoid(z).clamp(PROB_EPS, 1.0 - PROB_EPS)
}

fn lookup<'a, T>(map: &'a BTreeMap<String, T>, id: &str, kind: &'static str) -> Result<&'a T> {
    map.get(id).ok_or_else(|| IrtError::MissingEntity {
        kind,
        id: id.to_owned(),
    })
}

fn prior_penalty(
    thetas: &BTreeMap<String, f64>,
    traits: &BTreeMap<String, LatentTraits>,
    lambda: f64,
) -> f64 {
    let t: f64 = thetas.values().map(|x| x * x).sum();
    let b: f64 = traits.values().map(|x| x.difficulty * x.difficulty).sum();
    let a: f64 = traits
        .values()
        .map(|x| (x.discrimination - 1.0) * (x.discrimination - 1.0))
        .sum();
    lambda * (t + b + a)
}

/// Penalized log-likelihood of the interactions under the given skills and
/// traits. The prior runs over every entry of both maps.
pub fn dataset_log_likelihood(
    interactions: &InteractionDataset,
    thetas: &BTreeMap<String, f64>,
    traits: &BTreeMap<String, LatentTraits>,
    config: &IrtConfig,
) -> Result<f64> {
    let mut ll = 0.0;
    for i in interactions.iter() {
        let theta = *lookup(thetas, &i.student_id, "student")?;
        let t = lookup(traits, &i.question_id, "question")?;
        let z = config.scaling * t.discrimination * (theta - t.difficulty);
        ll += outcome_log_prob(z, i.correct);
    }
    Ok(ll - prior_penalty(thetas, traits, config.prior_strength))
}

/// Partial derivatives of [`dataset_log_likelihood`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LikelihoodGradient {
    pub theta: BTreeMap<String, f64>,
    pub difficulty: BTreeMap<String, f64>,
    pub discrimination: BTreeMap<String, f64>,
}

pub fn log_likelihood_gradient(
    interactions: &InteractionDataset,
    thetas: &BTreeMap<String, f64>,
    traits: &BTreeMap<String, LatentTraits>,
    config: &IrtConfig,
) -> Result<LikelihoodGradient> {
    let d = config.scaling;
    let lambda = config.prior_strength;
    let mut g = LikelihoodGradient {
        theta: thetas.iter().map(|(k, v)| (k.clone(), -2.0 * lambda * v)).collect(),
        difficulty: traits
            .iter()
            .map(|(k, t)| (k.clone(), -2.0 * lambda * t.difficulty))
            .collect(),
        discrimination: traits
            .iter()
            .map(|(k, t)| (k.clone(), -2.0 * lambda * (t.discrimination - 1.0)))
            .collect(),
    };
    for i in interactions.iter() {
        let theta = *lookup(thetas, &i.student_id, "student")?;
        let t = lookup(traits, &i.question_id, "question")?;
        let (a, b) = (t.discrimination, t.difficulty);
        // d(log-lik)/dz = y - p
        let r = f64::from(u8::from(i.correct)) - sigmoid(d * a * (theta - b));
        *g.theta.get_mut(&i.student_id).unwrap() += d * a * r;
        *g.difficulty.get_mut(&i.question_id).unwrap() -= d * a * r;
        *g.discrimination.get_mut(&i.question_id).unwrap() += d * (theta - b) * r;
    }
    Ok(g)
}

/// Output of [`calibrate_items`].
#[derive(Debug, Clone)]
pub struct Calibration {
    pub traits: BTreeMap<String, LatentTraits>,
    pub thetas: BTreeMap<String, f64>,
    pub log_likelihood: f64,
    pub iterations: usize,
    /// False when `max_iterations` was hit; the returned state is still the
    /// best one reached.
    pub converged: bool,
    /// Penalized log-likelihood after initialization and after every outer
    /// iteration.
    pub history: Vec<f64>,
}

struct Problem {
    students: Vec<String>,
    items: Vec<String>,
    by_student: Vec<Vec<(usize, bool)>>,
    by_item: Vec<Vec<(usize, bool)>>,
}

impl Problem {
    fn index(a: &InteractionDataset) -> Problem {
        let mut s_ids: BTreeMap<&str, usize> = BTreeMap::new();
        let mut q_ids: BTreeMap<&str, usize> = BTreeMap::new();
        for i in a.iter() {
            s_ids.insert(&i.student_id, 0);
            q_ids.insert(&i.question_id, 0);
        }
        for (n, v) in s_ids.values_mut().enumerate() {
            *v = n;
        }
        for (n, v) in q_ids.values_mut().enumerate() {
            *v = n;
        }
        let mut by_student = vec![Vec::new(); s_ids.len()];
        let mut by_item = vec![Vec::new(); q_ids.len()];
        for i in a.iter() {
            let s = s_ids[i.student_id.as_str()];
            let q = q_ids[i.question_id.as_str()];
            by_student[s].push((q, i.correct));
            by_item[q].push((s, i.correct));
        }
        Problem {
            students: s_ids.keys().map(|s| s.to_string()).collect(),
            items: q_ids.keys().map(|s| s.to_string()).collect(),
            by_student,
            by_item,
        }
    }
}

/// Per-student objective: log-likelihood of its answers minus its prior term.
fn student_objective(theta: f64, answers: &[(usize, bool)], a: &[f64], b: &[f64], cfg: &IrtConfig) -> f64 {
    let d = cfg.scaling;
    answers
        .iter()
        .map(|&(q, y)| outcome_log_prob(d * a[q] * (theta - b[q]), y))
        .sum::<f64>()
        - cfg.prior_strength * theta * theta
}

fn item_objective(a: f64, b: f64, answers: &[(usize, bool)], thetas: &[f64], cfg: &IrtConfig) -> f64 {
    let d = cfg.scaling;
    answers
        .iter()
        .map(|&(s, y)| outcome_log_prob(d * a * (thetas[s] - b), y))
        .sum::<f64>()
        - cfg.prior_strength * (b * b + (a - 1.0) * (a - 1.0))
}

const INNER_ITERATIONS: usize = 25;
const MAX_HALVINGS: usize = 40;

fn update_student(theta: f64, answers: &[(usize, bool)], a: &[f64], b: &[f64], cfg: &IrtConfig) -> f64 {
    let d = cfg.scaling;
    let lambda = cfg.prior_strength;
    let mut x = theta;
    let mut fx = student_objective(x, answers, a, b, cfg);
    for _ in 0..INNER_ITERATIONS {
        let (mut g, mut h) = (-2.0 * lambda * x, -2.0 * lambda);
        for &(q, y) in answers {
            let k = d * a[q];
            let p = sigmoid(k * (x - b[q]));
            g += k * (f64::from(u8::from(y)) - p);
            h -= k * k * p * (1.0 - p);
        }
        let mut step = if h < -1e-12 { -g / h } else { g.signum() };
        step = step.clamp(-2.0, 2.0);
        let mut accepted = false;
        for _ in 0..MAX_HALVINGS {
            let cand = cfg.clamp_theta(x + step);
            let fc = student_objective(cand, answers, a, b, cfg);
            if fc >= fx {
                accepted = cand != x;
                x = cand;
                fx = fc;
                break;
            }
            step *= 0.5;
        }
        if !accepted || step.abs() < 1e-10 {
            break;
        }
    }
    x
}

fn update_item(a0: f64, b0: f64, answers: &[(usize, bool)], thetas: &[f64], cfg: &IrtConfig) -> (f64, f64) {
    let d = cfg.scaling;
    let lambda = cfg.prior_strength;
    let (mut a, mut b) = (a0, b0);
    let mut fx = item_objective(a, b, answers, thetas, cfg);
    for _ in 0..INNER_ITERATIONS {
        let (mut ga, mut gb) = (-2.0 * lambda * (a - 1.0), -2.0 * lambda * b);
        let (mut haa, mut hbb, mut hab) = (-2.0 * lambda, -2.0 * lambda, 0.0);
        for &(s, y) in answers {
            let u = thetas[s] - b;
            let p = sigmoid(d * a * u);
            let r = f64::from(u8::from(y)) - p;
            let w = p * (1.0 - p);
            ga += d * u * r;
            gb -= d * a * r;
            haa -= d * d * u * u * w;
            hbb -= d * d * a * a * w;
            hab += -d * r + d * d * a * u * w;
        }
        // coordinates pinned at a bound with the gradient pointing outward
        // are held fixed (projected Newton)
        let (a_lo, a_hi) = TraitKind::Discrimination.range();
        let (b_lo, b_hi) = TraitKind::Difficulty.range();
        let a_fixed = (a >= a_hi && ga > 0.0) || (a <= a_lo && ga < 0.0);
        let b_fixed = (b >= b_hi && gb > 0.0) || (b <= b_lo && gb < 0.0);
        let det = haa * hbb - hab * hab;
        let (mut sa, mut sb) = if a_fixed && b_fixed {
            break;
        } else if a_fixed {
            (0.0, if hbb < -1e-12 { -gb / hbb } else { gb.signum() })
        } else if b_fixed {
            (if haa < -1e-12 { -ga / haa } else { ga.signum() }, 0.0)
        } else if haa < 0.0 && det > 1e-12 {
            // Newton step -H^{-1} g
            ((-hbb * ga + hab * gb) / det, (hab * ga - haa * gb) / det)
        } else {
            let scale = (haa.abs() + hbb.abs()).max(1.0);
            (ga / scale, gb / scale)
        };
        let norm = (sa * sa + sb * sb).sqrt();
        if norm > 2.0 {
            sa *= 2.0 / norm;
            sb *= 2.0 / norm;
        }
        let mut moved = false;
        for _ in 0..MAX_HALVINGS {
            let ca = TraitKind::Discrimination.clamp(a + sa);
            let cb = TraitKind::Difficulty.clamp(b + sb);
            let fc = item_objective(ca, cb, answers, thetas, cfg);
            if fc >= fx {
                moved = ca != a || cb != b;
                a = ca;
                b = cb;
                fx = fc;
                break;
            }
            sa *= 0.5;
            sb *= 0.5;
        }
        if !moved || sa.abs().max(sb.abs()) < 1e-10 {
            break;
        }
    }
    (a, b)
}

fn total_objective(p: &Problem, thetas: &[f64], a: &[f64], b: &[f64], cfg: &IrtConfig) -> f64 {
    let d = cfg.scaling;
    let mut ll = 0.0;
    for (s, answers) in p.by_student.iter().enumerate() {
        for &(q, y) in answers {
            ll += outcome_log_prob(d * a[q] * (thetas[s] - b[q]), y);
        }
    }
    let prior: f64 = thetas.iter().map(|t| t * t).sum::<f64>()
        + b.iter().map(|x| x * x).sum::<f64>()
        + a.iter().map(|x| (x - 1.0) * (x - 1.0)).sum::<f64>();
    ll - cfg.prior_strength * prior
}

/// Calibrates item traits (and student skills) from an interaction log by
/// alternating block coordinate ascent on the penalized log-likelihood.
///
/// Every block update only accepts moves that do not lower its own objective,
/// so the total objective is non-decreasing across iterations.
pub fn calibrate_items(a_gte: &InteractionDataset, config: &IrtConfig, seed: u64) -> Result<Calibration> {
    config.validate()?;
    if a_gte.is_empty() {
        return Err(IrtError::EmptyDataset);
    }
    let p = Problem::index(a_gte);
    let mut rng = seeding::rng(seed, &[0x1e7]);
    let mut noise = || rng.random_range(-0.1..=0.1);
    let mut b: Vec<f64> = Vec::with_capacity(p.items.len());
    let mut a: Vec<f64> = Vec::with_capacity(p.items.len());
    for _ in &p.items {
        b.push(noise());
        a.push(1.0 + noise());
    }
    let mut thetas: Vec<f64> = p.students.iter().map(|_| noise()).collect();

    let mut ll = total_objective(&p, &thetas, &a, &b, config);
    let mut history = vec![ll];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < config.max_iterations {
        iterations += 1;
        for (s, answers) in p.by_student.iter().enumerate() {
            thetas[s] = update_student(thetas[s], answers, &a, &b, config);
        }
        for (q, answers) in p.by_item.iter().enumerate() {
            let (na, nb) = update_item(a[q], b[q], answers, &thetas, config);
            a[q] = na;
            b[q] = nb;
        }
        let next = total_objective(&p, &thetas, &a, &b, config);
        history.push(next);
        let rel = (next - ll).abs() / ll.abs().max(1.0);
        ll = next;
        if rel < config.tolerance {
            converged = true;
            break;
        }
    }
    if !converged {
        log::warn!(
            "calibration did not converge after {} iterations; returning best state",
            config.max_iterations
        );
    }
    let traits = p
        .items
        .iter()
        .enumerate()
        .map(|(q, id)| (id.clone(), LatentTraits::clamped(b[q], a[q])))
        .collect();
    let thetas = p.students.iter().cloned().zip(thetas).collect();
    Ok(Calibration {
        traits,
        thetas,
        log_likelihood: ll,
        iterations,
        converged,
        history,
    })
}

const SKILL_GRID_POINTS: usize = 64;
const SKILL_TOLERANCE: f64 = 1e-4;

fn skill_log_likelihood(theta: f64, answered: &[(LatentTraits, bool)], cfg: &IrtConfig) -> f64 {
    answered
        .iter()
        .map(|(t, y)| outcome_log_prob(cfg.scaling * t.discrimination * (theta - t.difficulty), *y))
        .sum()
}

/// Maximum-likelihood skill from previously answered, calibrated items.
///
/// A 64-point grid scan over `theta_bounds` locates the best cell, then
/// golden-section search refines it to 1e-4. Equal maxima resolve to the
/// lowest theta. With no answers the prior mean 0 is returned.
pub fn estimate_skill(answered: &[(LatentTraits, bool)], config: &IrtConfig) -> SkillEstimate {
    if answered.is_empty() {
        return SkillEstimate {
            theta: config.clamp_theta(0.0),
        };
    }
    let (lo, hi) = config.theta_bounds;
    let f = |x: f64| skill_log_likelihood(x, answered, config);
    let step = (hi - lo) / (SKILL_GRID_POINTS - 1) as f64;
    let grid = |k: usize| if k == SKILL_GRID_POINTS - 1 { hi } else { lo + k as f64 * step };

    let (mut best_k, mut best_f) = (0, f(lo));
    for k in 1..SKILL_GRID_POINTS {
        let v = f(grid(k));
        if v > best_f {
            best_k = k;
            best_f = v;
        }
    }
    let left = grid(best_k.saturating_sub(1));
    let right = grid((best_k + 1).min(SKILL_GRID_POINTS - 1));

    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut x0, mut x1) = (left, right);
    let mut c = x1 - inv_phi * (x1 - x0);
    let mut d = x0 + inv_phi * (x1 - x0);
    let (mut fc, mut fd) = (f(c), f(d));
    while x1 - x0 > SKILL_TOLERANCE {
        if fc >= fd {
            x1 = d;
            d = c;
            fd = fc;
            c = x1 - inv_phi * (x1 - x0);
            fc = f(c);
        } else {
            x0 = c;
            c = d;
            fc = fd;
            d = x0 + inv_phi * (x1 - x0);
            fd = f(d);
        }
    }
    let refined = 0.5 * (x0 + x1);

    let mut candidates = [left, grid(best_k), refined, right];
    candidates.sort_by(f64::total_cmp);
    let mut theta = candidates[0];
    let mut ftheta = f(theta);
    for &x in &candidates[1..] {
        let v = f(x);
        if v > ftheta {
            theta = x;
            ftheta = v;
        }
    }
    SkillEstimate { theta }
}

/// Writes `question_id,difficulty,discrimination` with six decimals.
pub fn write_traits_csv<W: Write>(writer: W, traits: &BTreeMap<String, LatentTraits>) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["question_id", "difficulty", "discrimination"])?;
    for (id, t) in traits {
        w.write_record([
            id.as_str(),
            &format!("{:.6}", t.difficulty),
            &format!("{:.6}", t.discrimination),
        ])?;
    }
    w.flush()
}

pub fn read_traits_csv<R: Read>(reader: R) -> Result<BTreeMap<String, LatentTraits>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let mut out = BTreeMap::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| IrtError::TraitsFile(e.to_string()))?;
        let field = |i: usize| -> Result<f64> {
            rec.get(i)
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| IrtError::TraitsFile(format!("bad numeric field {i} in {rec:?}")))
        };
        let id = rec
            .get(0)
            .ok_or_else(|| IrtError::TraitsFile("missing question_id".into()))?;
        out.insert(id.to_owned(), LatentTraits::try_new(field(1)?, field(2)?)?);
    }
    Ok(out)
}
