//! End-to-end commands: calibrate and train, predict, evaluate, ablate and
//! generate synthetic data. Every command is a pure function of its config
//! file and input files.

mod config;

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{
    filter_min_interactions, load_interactions, load_questions, load_questions_with, split_questions,
    stratified_split_interactions, write_interactions_csv, write_questions_csv, write_questions_json, CorpusError,
    DataFormat, InteractionDataset, LoadOptions, Question, QuestionDataset,
};
use crate::eval::{
    classification_metrics, majority_score, regression_metrics, run_ablation, sap_constant, sap_simulate,
    AblationSettings, Cell, EvalError, SapRecord, Table, DECISION_THRESHOLD, MAJORITY_LABEL,
};
use crate::irt::{calibrate_items, read_traits_csv, write_traits_csv, Calibration, IrtError, LatentTraits, TraitKind};
use crate::regress::{fit_mean_baseline, fit_text_regressor, RegressError, RegressorKind, SearchResult, TraitRegressor};
use crate::synth::{generate_questions, simulate_interactions, write_planted_traits_csv, SynthError};
use crate::textfeat::{FeatureExtractor, FeatureGroups, FeatureMatrix, TextCache, TextError};

pub use config::{EvaluationMode, LoadedConfig, PipelineConfig, SearchSettings};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("no trained bundle at {0}")]
    MissingBundle(PathBuf),
    #[error("{path}: {message}")]
    Artifact { path: PathBuf, message: String },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Irt(#[from] IrtError),
    #[error(transparent)]
    Text(#[from] TextError),
    #[error(transparent)]
    Regress(#[from] RegressError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Synth(#[from] SynthError),
}

pub type Result<T> = std::result::Result<T, PipelineError>;

/// How a failure is reported: the `ErrorKind:` prefix and the exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ErrorClass {
    pub kind: &'static str,
    pub exit_code: i32,
}

const CONFIG: ErrorClass = ErrorClass { kind: "ConfigError", exit_code: 1 };
const DATA: ErrorClass = ErrorClass { kind: "DataError", exit_code: 1 };
const GROUPS: ErrorClass = ErrorClass { kind: "GroupMismatch", exit_code: 1 };
const IO: ErrorClass = ErrorClass { kind: "IoError", exit_code: 2 };
const BUNDLE: ErrorClass = ErrorClass { kind: "MissingBundle", exit_code: 2 };
const COMPUTE: ErrorClass = ErrorClass { kind: "ComputationError", exit_code: 3 };

fn corpus_class(e: &CorpusError) -> ErrorClass {
    match e {
        CorpusError::Io { .. } => IO,
        _ => DATA,
    }
}

fn text_class(e: &TextError) -> ErrorClass {
    match e {
        TextError::Threshold { .. } => CONFIG,
        _ => DATA,
    }
}

fn regress_class(e: &RegressError) -> ErrorClass {
    match e {
        RegressError::GroupMismatch { .. } => GROUPS,
        RegressError::InvalidParams(_) => CONFIG,
        RegressError::InsufficientData { .. }
        | RegressError::EmptyTraining
        | RegressError::DimensionMismatch { .. }
        | RegressError::UnsupportedVersion(_)
        | RegressError::Document(_) => DATA,
        RegressError::Features(t) => text_class(t),
        RegressError::SingularSystem | RegressError::NonFinite => COMPUTE,
    }
}

impl PipelineError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        PipelineError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn class(&self) -> ErrorClass {
        match self {
            PipelineError::Config(_) => CONFIG,
            PipelineError::Io { .. } => IO,
            PipelineError::MissingBundle(_) => BUNDLE,
            PipelineError::Artifact { .. } => DATA,
            PipelineError::Corpus(e) => corpus_class(e),
            PipelineError::Irt(IrtError::Config(_)) => CONFIG,
            PipelineError::Irt(IrtError::TraitsFile(_)) => DATA,
            PipelineError::Irt(_) => COMPUTE,
            PipelineError::Text(e) => text_class(e),
            PipelineError::Regress(e) => regress_class(e),
            PipelineError::Eval(EvalError::Regress(e)) => regress_class(e),
            PipelineError::Eval(EvalError::Text(e)) => text_class(e),
            PipelineError::Eval(EvalError::Irt(IrtError::Config(_))) => CONFIG,
            PipelineError::Eval(EvalError::Irt(_)) => COMPUTE,
            PipelineError::Eval(_) => DATA,
            PipelineError::Synth(SynthError::Config(_)) => CONFIG,
            PipelineError::Synth(SynthError::Corpus(e)) => corpus_class(e),
        }
    }
}

/// Fixed file names inside a bundle or report directory.
pub mod files {
    pub const MANIFEST: &str = "manifest.json";
    pub const TRAITS: &str = "traits.csv";
    pub const A_GTE: &str = "interactions_gte.csv";
    pub const A_SAP: &str = "interactions_sap.csv";
    pub const Q_TRAIN: &str = "questions_train.json";
    pub const Q_TEST: &str = "questions_test.json";
    pub const PREDICTIONS: &str = "predictions.csv";
    pub const REPORT_LTE: &str = "report_lte";
    pub const REPORT_SAP: &str = "report_sap";
    pub const REPORT_ABLATION: &str = "report_ablation";
    pub const SYNTH_QUESTIONS: &str = "questions.csv";
    pub const SYNTH_INTERACTIONS: &str = "interactions.csv";
    pub const SYNTH_TRAITS: &str = "planted_traits.csv";

    pub fn model(trait_name: &str) -> String {
        format!("model_{trait_name}.json")
    }

    pub fn features(trait_name: &str) -> String {
        format!("features_{trait_name}.json")
    }

    pub fn cv_table(trait_name: &str) -> String {
        format!("cv_{trait_name}.csv")
    }
}

/// Writes files into one directory and remembers their digests.
struct OutputDir {
    dir: PathBuf,
    digests: BTreeMap<String, String>,
}

impl OutputDir {
    fn create(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir).map_err(|e| PipelineError::io(dir, e))?;
        Ok(OutputDir {
            dir: dir.to_path_buf(),
            digests: BTreeMap::new(),
        })
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.dir.join(name);
        std::fs::write(&path, bytes).map_err(|e| PipelineError::io(&path, e))?;
        self.digests.insert(name.to_owned(), config::sha256_hex(bytes));
        Ok(())
    }

    fn write_with(&mut self, name: &str, f: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> Result<()> {
        let mut buf = Vec::new();
        f(&mut buf).map_err(|e| PipelineError::io(&self.dir.join(name), e))?;
        self.write(name, &buf)
    }

    fn write_table(&mut self, stem: &str, table: &Table) -> Result<()> {
        self.write(&format!("{stem}.csv"), table.to_csv().as_bytes())?;
        self.write(&format!("{stem}.txt"), table.to_text().as_bytes())
    }
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| PipelineError::io(path, e))
}

fn artifact_error(path: &Path, message: impl ToString) -> PipelineError {
    PipelineError::Artifact {
        path: path.to_path_buf(),
        message: message.to_string(),
    }
}

/// Data after filtering, splitting and calibration: everything training,
/// evaluation and ablation share.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub a_gte: InteractionDataset,
    pub a_sap: InteractionDataset,
    pub calibration: Calibration,
    pub q_train: QuestionDataset,
    pub q_test: QuestionDataset,
}

/// Loads the corpus, filters and splits the answers, calibrates on the
/// calibration part and splits the calibrated questions.
pub fn prepare(cfg: &LoadedConfig) -> Result<Prepared> {
    let c = &cfg.config;
    let split_seed = cfg.seed(c.split_seed, "split_seed")?;
    let calibration_seed = cfg.seed(c.calibration_seed, "calibration_seed")?;
    let q_path = cfg.questions_path()?;
    let a_path = cfg.interactions_path()?;
    let opts = LoadOptions {
        allow_empty_choice_text: c.allow_empty_choice_text,
    };
    let questions = load_questions_with(&q_path, config::format_of(&q_path)?, &opts)?;
    let answers = load_interactions(&a_path, config::format_of(&a_path)?)?;
    let known: BTreeSet<&str> = questions.questions.iter().map(|q| q.question_id.as_str()).collect();
    let answers_known = answers.retain_questions(|id| known.contains(id));
    if answers_known.len() < answers.len() {
        log::warn!(
            "dropping {} interactions on questions absent from the question file",
            answers.len() - answers_known.len()
        );
    }
    let answers = filter_min_interactions(&answers_known, c.min_interactions);
    log::info!("{} interactions after filtering", answers.len());
    if answers.is_empty() {
        return Err(PipelineError::Corpus(CorpusError::Split(
            "no interactions left after filtering".into(),
        )));
    }
    let (a_gte, a_sap) = stratified_split_interactions(&answers, c.gte_fraction, split_seed)?;
    log::info!("calibrating on {} interactions", a_gte.len());
    let calibration = calibrate_items(&a_gte, &c.irt, calibration_seed)?;
    if !calibration.converged {
        log::warn!("calibration stopped after {} iterations without converging", calibration.iterations);
    }
    let mut questions = questions;
    questions.store_traits(&calibration.traits);
    let (q_train, q_test) = split_questions(&questions.with_traits_only(), c.train_fraction, split_seed)?;
    Ok(Prepared {
        a_gte,
        a_sap,
        calibration,
        q_train,
        q_test,
    })
}

fn trait_targets(q: &QuestionDataset, t: TraitKind) -> Vec<f64> {
    q.questions.iter().map(|x| t.of(&q.traits[&x.question_id])).collect()
}

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    tool: String,
    version: String,
    config_sha256: String,
    split_seed: u64,
    calibration_seed: u64,
    search_seed: u64,
    feature_groups: FeatureGroups,
    regressor: RegressorKind,
    calibration: CalibrationSummary,
    files: BTreeMap<String, String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct CalibrationSummary {
    iterations: usize,
    converged: bool,
    log_likelihood: f64,
    n_questions: usize,
    n_students: usize,
}

fn cv_table(search: &SearchResult) -> Table {
    let params: Vec<String> = search.table.first().map(|r| r.candidate.keys().cloned().collect()).unwrap_or_default();
    let n_folds = search.table.first().map_or(0, |r| r.fold_rmse.len());
    let mut headers: Vec<String> = vec!["candidate".into()];
    headers.extend(params.iter().cloned());
    headers.push("mean_rmse".into());
    headers.extend((1..=n_folds).map(|k| format!("fold_{k}")));
    let mut table = Table::new(headers);
    for (i, row) in search.table.iter().enumerate() {
        let mut cells: Vec<Cell> = vec![if i == search.best_index { format!("{i}*") } else { i.to_string() }.into()];
        cells.extend(params.iter().map(|p| Cell::from(row.candidate[p].to_string())));
        cells.push(row.mean_rmse.into());
        cells.extend(row.fold_rmse.iter().map(|&v| Cell::from(v)));
        table.push(cells);
    }
    table
}

/// Result of a training run, as written to the bundle.
#[derive(Debug, Clone)]
pub struct Trained {
    pub prepared: Prepared,
    pub extractors: BTreeMap<TraitKind, FeatureExtractor>,
    pub models: BTreeMap<TraitKind, TraitRegressor>,
    pub searches: BTreeMap<TraitKind, SearchResult>,
}

pub fn train(cfg: &LoadedConfig) -> Result<Trained> {
    let c = &cfg.config;
    let search_seed = cfg.seed(c.search_seed, "search_seed")?;
    if c.feature_groups.is_empty() {
        return Err(PipelineError::Config("feature_groups must not be empty".into()));
    }
    let prepared = prepare(cfg)?;
    let q_train = &prepared.q_train.questions;
    let cache = TextCache::new(q_train, c.feature_groups)?;
    let rows: Vec<usize> = (0..q_train.len()).collect();
    let space = c.search.space(c.regressor, c.feature_groups.ir, search_seed);
    let (mut extractors, mut models, mut searches) = (BTreeMap::new(), BTreeMap::new(), BTreeMap::new());
    for t in TraitKind::ALL {
        log::info!("tuning the {} regressor", t.name());
        let y = trait_targets(&prepared.q_train, t);
        let fit = fit_text_regressor(&cache, &rows, &y, t, c.feature_groups, c.regressor, &space)?;
        extractors.insert(t, fit.extractor);
        models.insert(t, fit.model);
        searches.insert(t, fit.search);
    }
    Ok(Trained {
        prepared,
        extractors,
        models,
        searches,
    })
}

fn json_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(value).expect("serializable value");
    s.push('\n');
    s.into_bytes()
}

/// Trains and writes the bundle into `out`.
pub fn cmd_train(cfg: &LoadedConfig, out: &Path) -> Result<Trained> {
    let trained = train(cfg)?;
    let c = &cfg.config;
    let p = &trained.prepared;
    let mut dir = OutputDir::create(out)?;
    dir.write_with(files::TRAITS, |w| write_traits_csv(w, &p.calibration.traits))?;
    dir.write_with(files::A_GTE, |w| write_interactions_csv(w, &p.a_gte))?;
    dir.write_with(files::A_SAP, |w| write_interactions_csv(w, &p.a_sap))?;
    dir.write_with(files::Q_TRAIN, |w| write_questions_json(w, &p.q_train.questions))?;
    dir.write_with(files::Q_TEST, |w| write_questions_json(w, &p.q_test.questions))?;
    for t in TraitKind::ALL {
        dir.write(&files::model(t.name()), (trained.models[&t].to_json()? + "\n").as_bytes())?;
        dir.write(&files::features(t.name()), &json_bytes(&trained.extractors[&t]))?;
        dir.write(&files::cv_table(t.name()), cv_table(&trained.searches[&t]).to_csv().as_bytes())?;
    }
    let manifest = Manifest {
        tool: "quizcal".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        config_sha256: cfg.sha256.clone(),
        split_seed: cfg.seed(c.split_seed, "split_seed")?,
        calibration_seed: cfg.seed(c.calibration_seed, "calibration_seed")?,
        search_seed: cfg.seed(c.search_seed, "search_seed")?,
        feature_groups: c.feature_groups,
        regressor: c.regressor,
        calibration: CalibrationSummary {
            iterations: p.calibration.iterations,
            converged: p.calibration.converged,
            log_likelihood: p.calibration.log_likelihood,
            n_questions: p.calibration.traits.len(),
            n_students: p.calibration.thetas.len(),
        },
        files: dir.digests.clone(),
    };
    dir.write(files::MANIFEST, &json_bytes(&manifest))?;
    Ok(trained)
}

/// Calibrates item traits only: filter, split the answers, calibrate on
/// A_GTE, then write the traits and both answer splits.
pub fn cmd_calibrate(cfg: &LoadedConfig, out: &Path) -> Result<Prepared> {
    let p = prepare(cfg)?;
    let mut dir = OutputDir::create(out)?;
    dir.write_with(files::TRAITS, |w| write_traits_csv(w, &p.calibration.traits))?;
    dir.write_with(files::A_GTE, |w| write_interactions_csv(w, &p.a_gte))?;
    dir.write_with(files::A_SAP, |w| write_interactions_csv(w, &p.a_sap))?;
    Ok(p)
}

/// A trained bundle read back from disk.
#[derive(Debug, Clone)]
pub struct Bundle {
    pub traits: BTreeMap<String, LatentTraits>,
    pub models: BTreeMap<TraitKind, TraitRegressor>,
    pub extractors: BTreeMap<TraitKind, FeatureExtractor>,
    pub q_train: Vec<Question>,
    pub q_test: Vec<Question>,
    pub a_gte: InteractionDataset,
    pub a_sap: InteractionDataset,
}

pub fn load_bundle(dir: &Path) -> Result<Bundle> {
    let manifest_path = dir.join(files::MANIFEST);
    if !manifest_path.is_file() {
        return Err(PipelineError::MissingBundle(dir.to_path_buf()));
    }
    let _manifest: Manifest =
        serde_json::from_str(&read_text(&manifest_path)?).map_err(|e| artifact_error(&manifest_path, e))?;
    let traits_path = dir.join(files::TRAITS);
    let traits = read_traits_csv(std::fs::File::open(&traits_path).map_err(|e| PipelineError::io(&traits_path, e))?)?;
    let (mut models, mut extractors) = (BTreeMap::new(), BTreeMap::new());
    for t in TraitKind::ALL {
        let path = dir.join(files::model(t.name()));
        let model = TraitRegressor::from_json(&read_text(&path)?)?;
        if model.target != t {
            return Err(artifact_error(&path, format!("model targets {}", model.target.name())));
        }
        models.insert(t, model);
        let path = dir.join(files::features(t.name()));
        let extractor: FeatureExtractor = serde_json::from_str(&read_text(&path)?).map_err(|e| artifact_error(&path, e))?;
        extractors.insert(t, extractor);
    }
    Ok(Bundle {
        traits,
        models,
        extractors,
        q_train: load_questions(&dir.join(files::Q_TRAIN), DataFormat::Json)?.questions,
        q_test: load_questions(&dir.join(files::Q_TEST), DataFormat::Json)?.questions,
        a_gte: load_interactions(&dir.join(files::A_GTE), DataFormat::Csv)?,
        a_sap: load_interactions(&dir.join(files::A_SAP), DataFormat::Csv)?,
    })
}

impl Bundle {
    /// Estimated traits for `questions`, per trait in question order.
    /// `groups` relabels the extracted features, so a request that differs
    /// from the training groups is rejected by the model.
    pub fn estimate(&self, questions: &[Question], groups: Option<FeatureGroups>) -> Result<BTreeMap<TraitKind, Vec<f64>>> {
        let mut out = BTreeMap::new();
        for t in TraitKind::ALL {
            let mut x = self.extractors[&t].transform(questions)?;
            if let Some(g) = groups {
                x.groups = g;
            }
            out.insert(t, self.models[&t].predict(&x)?);
        }
        Ok(out)
    }
}

/// Writes `predictions.csv` for the questions in `predict_questions_path`.
pub fn cmd_predict(cfg: &LoadedConfig, out: &Path) -> Result<Vec<(String, [f64; 2])>> {
    let bundle = load_bundle(&cfg.bundle_dir(Some(out))?)?;
    let path = cfg.predict_questions_path()?;
    let opts = LoadOptions {
        allow_empty_choice_text: cfg.config.allow_empty_choice_text,
    };
    let questions = load_questions_with(&path, config::format_of(&path)?, &opts)?.questions;
    let est = bundle.estimate(&questions, None)?;
    let rows: Vec<(String, [f64; 2])> = questions
        .iter()
        .enumerate()
        .map(|(i, q)| {
            (
                q.question_id.clone(),
                [est[&TraitKind::Difficulty][i], est[&TraitKind::Discrimination][i]],
            )
        })
        .collect();
    let mut dir = OutputDir::create(out)?;
    dir.write_with(files::PREDICTIONS, |w| {
        let mut c = csv::Writer::from_writer(w);
        c.write_record(["question_id", "estimated_difficulty", "estimated_discrimination"])?;
        for (id, v) in &rows {
            c.write_record([id.clone(), format!("{:.6}", v[0]), format!("{:.6}", v[1])])?;
        }
        c.flush()
    })?;
    Ok(rows)
}

fn model_label(kind: RegressorKind) -> &'static str {
    match kind {
        RegressorKind::Forest => "RF",
        RegressorKind::Tree => "DT",
        RegressorKind::Ridge => "LR",
        RegressorKind::MeanBaseline => MAJORITY_LABEL,
    }
}

fn trait_title(t: TraitKind) -> &'static str {
    match t {
        TraitKind::Difficulty => "Difficulty",
        TraitKind::Discrimination => "Discrimination",
    }
}

fn targets_of(questions: &[Question], traits: &BTreeMap<String, LatentTraits>, t: TraitKind) -> Result<Vec<f64>> {
    questions
        .iter()
        .map(|q| {
            traits
                .get(&q.question_id)
                .map(|x| t.of(x))
                .ok_or_else(|| EvalError::MissingTraits(q.question_id.clone()).into())
        })
        .collect()
}

/// Latent-trait estimation report on the test questions: the trained model
/// against the mean of the training traits.
pub fn lte_report(bundle: &Bundle, groups: Option<FeatureGroups>) -> Result<Table> {
    let est = bundle.estimate(&bundle.q_test, groups)?;
    let mut headers = vec!["Model".to_owned()];
    for t in TraitKind::ALL {
        for col in ["RMSE", "MAE", "Relative RMSE"] {
            headers.push(format!("{} {col}", trait_title(t)));
        }
    }
    let mut table = Table::new(headers);
    let mut model_row: Vec<Cell> = vec![model_label(bundle.models[&TraitKind::Difficulty].kind()).into()];
    let mut base_row: Vec<Cell> = vec![MAJORITY_LABEL.into()];
    for t in TraitKind::ALL {
        let truth = targets_of(&bundle.q_test, &bundle.traits, t)?;
        let m = regression_metrics(&est[&t], &truth, t.range())?;
        let baseline = fit_mean_baseline(&targets_of(&bundle.q_train, &bundle.traits, t)?, t)?;
        let b = regression_metrics(
            &baseline.predict(&FeatureMatrix::raw(vec![Vec::new(); truth.len()]))?,
            &truth,
            t.range(),
        )?;
        model_row.extend([m.rmse.into(), m.mae.into(), m.relative_rmse.into()]);
        base_row.extend([b.rmse.into(), b.mae.into(), b.relative_rmse.into()]);
    }
    table.push(model_row);
    table.push(base_row);
    Ok(table)
}

/// Row labels of the answer-prediction report.
pub const SAP_IRT_LABEL: &str = "IRT traits";
pub const SAP_TEXT_LABEL: &str = "Text-estimated traits";

/// Replays of the answer-prediction stream on the test questions for the
/// three trait sources, in report order.
pub fn sap_runs(bundle: &Bundle, groups: Option<FeatureGroups>, cfg: &PipelineConfig) -> Result<Vec<(String, Vec<SapRecord>)>> {
    let test_ids: BTreeSet<&str> = bundle.q_test.iter().map(|q| q.question_id.as_str()).collect();
    let stream = bundle.a_sap.retain_questions(|id| test_ids.contains(id));
    let est = bundle.estimate(&bundle.q_test, groups)?;
    let text_traits: BTreeMap<String, LatentTraits> = bundle
        .q_test
        .iter()
        .enumerate()
        .map(|(i, q)| {
            (
                q.question_id.clone(),
                LatentTraits::clamped(est[&TraitKind::Difficulty][i], est[&TraitKind::Discrimination][i]),
            )
        })
        .collect();
    Ok(vec![
        (SAP_IRT_LABEL.to_owned(), sap_simulate(&stream, &bundle.traits, &cfg.irt)?),
        (SAP_TEXT_LABEL.to_owned(), sap_simulate(&stream, &text_traits, &cfg.irt)?),
        (MAJORITY_LABEL.to_owned(), sap_constant(&stream, majority_score(&bundle.a_gte)?)),
    ])
}

pub fn sap_report(runs: &[(String, Vec<SapRecord>)]) -> Result<Table> {
    let mut table = Table::new([
        "Model",
        "AUC",
        "Accuracy",
        "Correct precision",
        "Correct recall",
        "Wrong precision",
        "Wrong recall",
    ]);
    for (label, records) in runs {
        let scores: Vec<f64> = records.iter().map(|r| r.score).collect();
        let labels: Vec<bool> = records.iter().map(|r| r.label).collect();
        let m = classification_metrics(&scores, &labels, DECISION_THRESHOLD)?;
        table.push(vec![
            label.clone().into(),
            m.auc.into(),
            m.accuracy.into(),
            m.precision_correct.into(),
            m.recall_correct.into(),
            m.precision_wrong.into(),
            m.recall_wrong.into(),
        ]);
    }
    Ok(table)
}

/// Writes the reports selected by `evaluation_mode`.
pub fn cmd_evaluate(cfg: &LoadedConfig, out: &Path) -> Result<Vec<Table>> {
    let bundle = load_bundle(&cfg.bundle_dir(Some(out))?)?;
    let c = &cfg.config;
    let mut dir = OutputDir::create(out)?;
    let mut tables = Vec::new();
    if matches!(c.evaluation_mode, EvaluationMode::Lte | EvaluationMode::Both) {
        let t = lte_report(&bundle, c.evaluation_groups)?;
        dir.write_table(files::REPORT_LTE, &t)?;
        tables.push(t);
    }
    if matches!(c.evaluation_mode, EvaluationMode::Sap | EvaluationMode::Both) {
        let t = sap_report(&sap_runs(&bundle, c.evaluation_groups, c)?)?;
        dir.write_table(files::REPORT_SAP, &t)?;
        tables.push(t);
    }
    Ok(tables)
}

/// Runs the feature-group ablation on a fresh preparation of the data.
pub fn cmd_ablate(cfg: &LoadedConfig, out: &Path) -> Result<Table> {
    let c = &cfg.config;
    let search_seed = cfg.seed(c.search_seed, "search_seed")?;
    let prepared = prepare(cfg)?;
    let settings = AblationSettings {
        kind: c.regressor,
        space: c.search.space(c.regressor, true, search_seed),
    };
    let report = run_ablation(
        &prepared.q_train.questions,
        &prepared.q_test.questions,
        &prepared.calibration.traits,
        &settings,
    )?;
    let table = report.table();
    OutputDir::create(out)?.write_table(files::REPORT_ABLATION, &table)?;
    Ok(table)
}

/// Writes a synthetic question bank, answer log and planted traits.
pub fn cmd_gen_synth(cfg: &LoadedConfig, out: &Path) -> Result<()> {
    let synth = cfg.synth()?;
    let (questions, planted) = generate_questions(synth)?;
    let sim = simulate_interactions(&planted, synth)?;
    let mut dir = OutputDir::create(out)?;
    dir.write_with(files::SYNTH_QUESTIONS, |w| write_questions_csv(w, &questions.questions))?;
    dir.write_with(files::SYNTH_INTERACTIONS, |w| write_interactions_csv(w, &sim.interactions))?;
    dir.write_with(files::SYNTH_TRAITS, |w| write_planted_traits_csv(w, &planted))?;
    Ok(())
}
