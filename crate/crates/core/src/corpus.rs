//! Question and answer datasets: data model, file ingestion, filtering and
//! the two dataset splits used by the training pipeline.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::File;
use std::io::{BufReader, Read, Write};
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::irt::LatentTraits;
use crate::seeding;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("record {record}: {message}")]
    Parse { record: u64, message: String },
    #[error("{0}")]
    Schema(String),
    #[error("duplicate question id {0:?}")]
    DuplicateId(String),
    #[error("{0}")]
    Split(String),
}

impl CorpusError {
    fn io(path: &Path, source: std::io::Error) -> Self {
        CorpusError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    fn parse(record: u64, message: impl Into<String>) -> Self {
        CorpusError::Parse {
            record,
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, CorpusError>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Choice {
    pub text: String,
    pub is_correct: bool,
}

impl Choice {
    pub fn new(text: impl Into<String>, is_correct: bool) -> Self {
        Choice {
            text: text.into(),
            is_correct,
        }
    }
}

/// A multiple-choice question. One or more choices may be correct.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Question {
    pub question_id: String,
    pub stem_text: String,
    pub choices: Vec<Choice>,
}

impl Question {
    /// Builds a question, checking the choice-count and correctness invariants.
    pub fn new(
        question_id: impl Into<String>,
        stem_text: impl Into<String>,
        choices: Vec<Choice>,
    ) -> Result<Self> {
        let q = Question {
            question_id: question_id.into(),
            stem_text: stem_text.into(),
            choices,
        };
        q.validate(&LoadOptions::default())?;
        Ok(q)
    }

    fn validate(&self, opts: &LoadOptions) -> Result<()> {
        if self.choices.len() < 2 {
            return Err(CorpusError::Schema(format!(
                "question {:?} has {} choices, at least 2 required",
                self.question_id,
                self.choices.len()
            )));
        }
        if !self.choices.iter().any(|c| c.is_correct) {
            return Err(CorpusError::Schema(format!(
                "question {:?} has no correct choice",
                self.question_id
            )));
        }
        if !opts.allow_empty_choice_text && self.choices.iter().any(|c| c.text.trim().is_empty()) {
            return Err(CorpusError::Schema(format!(
                "question {:?} has a choice with empty text",
                self.question_id
            )));
        }
        Ok(())
    }

    pub fn correct_choices(&self) -> impl Iterator<Item = &Choice> {
        self.choices.iter().filter(|c| c.is_correct)
    }

    pub fn wrong_choices(&self) -> impl Iterator<Item = &Choice> {
        self.choices.iter().filter(|c| !c.is_correct)
    }
}

/// One student's answer to one question.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interaction {
    pub student_id: String,
    pub question_id: String,
    pub correct: bool,
    pub timestamp_ms: u64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct QuestionDataset {
    pub questions: Vec<Question>,
    /// Ground-truth traits written back after calibration; empty until then.
    pub traits: BTreeMap<String, LatentTraits>,
}

impl QuestionDataset {
    /// Builds a dataset, rejecting duplicate question ids.
    pub fn new(questions: Vec<Question>) -> Result<Self> {
        let mut seen = HashSet::new();
        for q in &questions {
            if !seen.insert(q.question_id.as_str()) {
                return Err(CorpusError::DuplicateId(q.question_id.clone()));
            }
        }
        Ok(QuestionDataset {
            questions,
            traits: BTreeMap::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.questions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.questions.is_empty()
    }

    pub fn get(&self, question_id: &str) -> Option<&Question> {
        self.questions.iter().find(|q| q.question_id == question_id)
    }

    /// Stores traits for the questions present in this dataset; traits for
    /// unknown ids are ignored.
    pub fn store_traits(&mut self, traits: &BTreeMap<String, LatentTraits>) {
        for q in &self.questions {
            if let Some(t) = traits.get(&q.question_id) {
                self.traits.insert(q.question_id.clone(), *t);
            }
        }
    }

    /// Keeps only the questions that have stored traits.
    pub fn with_traits_only(&self) -> QuestionDataset {
        QuestionDataset {
            questions: self
                .questions
                .iter()
                .filter(|q| self.traits.contains_key(&q.question_id))
                .cloned()
                .collect(),
            traits: self.traits.clone(),
        }
    }

    fn subset(&self, idx: &[usize]) -> QuestionDataset {
        let questions: Vec<Question> = idx.iter().map(|&i| self.questions[i].clone()).collect();
        let traits = questions
            .iter()
            .filter_map(|q| {
                self.traits
                    .get(&q.question_id)
                    .map(|t| (q.question_id.clone(), *t))
            })
            .collect();
        QuestionDataset { questions, traits }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct InteractionDataset {
    pub interactions: Vec<Interaction>,
}

impl InteractionDataset {
    pub fn new(interactions: Vec<Interaction>) -> Self {
        InteractionDataset { interactions }
    }

    pub fn len(&self) -> usize {
        self.interactions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.interactions.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Interaction> {
        self.interactions.iter()
    }

    /// Distinct question ids, sorted.
    pub fn question_ids(&self) -> Vec<String> {
        let set: std::collections::BTreeSet<&str> =
            self.interactions.iter().map(|i| i.question_id.as_str()).collect();
        set.into_iter().map(str::to_owned).collect()
    }

    /// Fraction of correct answers; `None` on an empty dataset.
    pub fn correct_rate(&self) -> Option<f64> {
        if self.interactions.is_empty() {
            return None;
        }
        let c = self.interactions.iter().filter(|i| i.correct).count();
        Some(c as f64 / self.interactions.len() as f64)
    }

    /// Keeps interactions whose question id satisfies `keep`.
    pub fn retain_questions(&self, keep: impl Fn(&str) -> bool) -> InteractionDataset {
        InteractionDataset {
            interactions: self
                .interactions
                .iter()
                .filter(|i| keep(&i.question_id))
                .cloned()
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DataFormat {
    Csv,
    Json,
}

impl DataFormat {
    /// Infers the format from a `.csv` / `.json` extension.
    pub fn from_path(path: &Path) -> Option<DataFormat> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "csv" => Some(DataFormat::Csv),
            "json" => Some(DataFormat::Json),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LoadOptions {
    pub allow_empty_choice_text: bool,
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CorpusError::io(path, e))
}

pub fn load_questions(path: &Path, format: DataFormat) -> Result<QuestionDataset> {
    load_questions_with(path, format, &LoadOptions::default())
}

pub fn load_questions_with(
    path: &Path,
    format: DataFormat,
    opts: &LoadOptions,
) -> Result<QuestionDataset> {
    let reader = open(path)?;
    let questions = match format {
        DataFormat::Csv => read_questions_csv(reader)?,
        DataFormat::Json => read_questions_json(reader, path)?,
    };
    for q in &questions {
        q.validate(opts)?;
    }
    QuestionDataset::new(questions)
}

fn parse_flag(raw: &str, record: u64, field: &str) -> Result<bool> {
    match raw.trim() {
        "1" => Ok(true),
        "0" => Ok(false),
        other => Err(CorpusError::parse(
            record,
            format!("{field} must be 0 or 1, got {other:?}"),
        )),
    }
}

fn header_index(headers: &csv::StringRecord, name: &str) -> Result<usize> {
    headers
        .iter()
        .position(|h| h.trim() == name)
        .ok_or_else(|| CorpusError::Schema(format!("missing column {name:?}")))
}

fn csv_error(e: csv::Error) -> CorpusError {
    let record = e.position().map_or(0, |p| p.line());
    CorpusError::parse(record, e.to_string())
}

fn read_questions_csv<R: Read>(reader: R) -> Result<Vec<Question>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let headers = rdr.headers().map_err(csv_error)?.clone();
    if headers.is_empty() {
        return Ok(Vec::new());
    }
    let id_col = header_index(&headers, "question_id")?;
    let stem_col = header_index(&headers, "stem_text")?;

    // choice index -> (text column, correct column)
    let mut choice_cols: BTreeMap<usize, (Option<usize>, Option<usize>)> = BTreeMap::new();
    for (col, h) in headers.iter().enumerate() {
        let h = h.trim();
        let Some(rest) = h.strip_prefix("choice_") else {
            continue;
        };
        if let Some(n) = rest.strip_suffix("_text").and_then(|n| n.parse().ok()) {
            choice_cols.entry(n).or_default().0 = Some(col);
        } else if let Some(n) = rest.strip_suffix("_correct").and_then(|n| n.parse().ok()) {
            choice_cols.entry(n).or_default().1 = Some(col);
        }
    }
    let mut pairs = Vec::with_capacity(choice_cols.len());
    for (n, cols) in choice_cols {
        match cols {
            (Some(t), Some(c)) => pairs.push((t, c)),
            (None, _) => return Err(CorpusError::Schema(format!("missing column \"choice_{n}_text\""))),
            (_, None) => {
                return Err(CorpusError::Schema(format!(
                    "missing column \"choice_{n}_correct\""
                )))
            }
        }
    }

    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_error)?;
        let line = rec.position().map_or(0, |p| p.line());
        let cell = |i: usize| rec.get(i).unwrap_or("");
        let question_id = cell(id_col).trim().to_owned();
        if question_id.is_empty() {
            return Err(CorpusError::parse(line, "empty question_id"));
        }
        let mut choices = Vec::new();
        for &(tc, cc) in &pairs {
            let text = cell(tc);
            let flag = cell(cc).trim();
            if flag.is_empty() {
                if !text.trim().is_empty() {
                    return Err(CorpusError::Schema(format!(
                        "record {line}: choice text without correctness flag"
                    )));
                }
                continue;
            }
            choices.push(Choice::new(text, parse_flag(flag, line, "choice correctness")?));
        }
        out.push(Question {
            question_id,
            stem_text: cell(stem_col).to_owned(),
            choices,
        });
    }
    Ok(out)
}

fn json_error(e: serde_json::Error) -> CorpusError {
    CorpusError::parse(e.line() as u64, e.to_string())
}

fn json_array<R: Read>(reader: R, path: &Path) -> Result<Vec<Value>> {
    let value: Value = serde_json::from_reader(reader).map_err(json_error)?;
    match value {
        Value::Array(items) => Ok(items),
        _ => Err(CorpusError::Schema(format!(
            "{}: expected a JSON array at top level",
            path.display()
        ))),
    }
}

fn json_field<'a>(obj: &'a Value, name: &str, record: usize) -> Result<&'a Value> {
    obj.get(name)
        .ok_or_else(|| CorpusError::Schema(format!("record {record}: missing field {name:?}")))
}

fn json_str(obj: &Value, name: &str, record: usize) -> Result<String> {
    match json_field(obj, name, record)? {
        Value::String(s) => Ok(s.clone()),
        // numeric ids are accepted and kept in their JSON spelling
        Value::Number(n) => Ok(n.to_string()),
        other => Err(CorpusError::parse(
            record as u64,
            format!("field {name:?} must be a string, got {other}"),
        )),
    }
}

fn json_bool(obj: &Value, name: &str, record: usize) -> Result<bool> {
    match json_field(obj, name, record)? {
        Value::Bool(b) => Ok(*b),
        Value::Number(n) if n.as_u64() == Some(1) => Ok(true),
        Value::Number(n) if n.as_u64() == Some(0) => Ok(false),
        other => Err(CorpusError::parse(
            record as u64,
            format!("field {name:?} must be a boolean or 0/1, got {other}"),
        )),
    }
}

fn read_questions_json<R: Read>(reader: R, path: &Path) -> Result<Vec<Question>> {
    let mut out = Vec::new();
    for (record, item) in json_array(reader, path)?.iter().enumerate() {
        let question_id = json_str(item, "id", record)?;
        let stem_text = json_str(item, "stem", record)?;
        let raw_choices = match json_field(item, "choices", record)? {
            Value::Array(c) => c,
            _ => {
                return Err(CorpusError::parse(
                    record as u64,
                    "field \"choices\" must be an array",
                ))
            }
        };
        let choices = raw_choices
            .iter()
            .map(|c| Ok(Choice::new(json_str(c, "text", record)?, json_bool(c, "correct", record)?)))
            .collect::<Result<Vec<_>>>()?;
        out.push(Question {
            question_id,
            stem_text,
            choices,
        });
    }
    Ok(out)
}

pub fn load_interactions(path: &Path, format: DataFormat) -> Result<InteractionDataset> {
    let reader = open(path)?;
    let interactions = match format {
        DataFormat::Csv => read_interactions_csv(reader)?,
        DataFormat::Json => read_interactions_json(reader, path)?,
    };
    warn_duplicates(&interactions);
    Ok(InteractionDataset { interactions })
}

fn parse_timestamp(raw: &str, record: u64) -> Result<u64> {
    let raw = raw.trim();
    if raw.is_empty() {
        return Err(CorpusError::parse(record, "missing timestamp"));
    }
    let ts: i64 = raw
        .parse()
        .map_err(|_| CorpusError::parse(record, format!("invalid timestamp {raw:?}")))?;
    u64::try_from(ts).map_err(|_| CorpusError::parse(record, format!("negative timestamp {ts}")))
}

fn read_interactions_csv<R: Read>(reader: R) -> Result<Vec<Interaction>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let headers = rdr.headers().map_err(csv_error)?.clone();
    let s_col = header_index(&headers, "student_id")?;
    let q_col = header_index(&headers, "question_id")?;
    let c_col = header_index(&headers, "correct")?;
    let t_col = header_index(&headers, "timestamp_ms")?;

    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_error)?;
        let line = rec.position().map_or(0, |p| p.line());
        let cell = |i: usize| rec.get(i).unwrap_or("");
        let student_id = cell(s_col).trim();
        let question_id = cell(q_col).trim();
        if student_id.is_empty() || question_id.is_empty() {
            return Err(CorpusError::parse(line, "empty student_id or question_id"));
        }
        out.push(Interaction {
            student_id: student_id.to_owned(),
            question_id: question_id.to_owned(),
            correct: parse_flag(cell(c_col), line, "correct")?,
            timestamp_ms: parse_timestamp(cell(t_col), line)?,
        });
    }
    Ok(out)
}

fn read_interactions_json<R: Read>(reader: R, path: &Path) -> Result<Vec<Interaction>> {
    let mut out = Vec::new();
    for (record, item) in json_array(reader, path)?.iter().enumerate() {
        let ts = match json_field(item, "timestamp_ms", record)? {
            Value::Number(n) => parse_timestamp(&n.to_string(), record as u64)?,
            other => {
                return Err(CorpusError::parse(
                    record as u64,
                    format!("invalid timestamp {other}"),
                ))
            }
        };
        out.push(Interaction {
            student_id: json_str(item, "student_id", record)?,
            question_id: json_str(item, "question_id", record)?,
            correct: json_bool(item, "correct", record)?,
            timestamp_ms: ts,
        });
    }
    Ok(out)
}

fn warn_duplicates(interactions: &[Interaction]) {
    let mut seen = HashSet::new();
    let mut dups = 0usize;
    for i in interactions {
        if !seen.insert((&i.student_id, &i.question_id, i.timestamp_ms)) {
            dups += 1;
        }
    }
    if dups > 0 {
        log::warn!("{dups} duplicate (student, question, timestamp) interactions kept");
    }
}

/// Writes questions in the CSV layout accepted by [`load_questions`].
pub fn write_questions_csv<W: Write>(writer: W, questions: &[Question]) -> std::io::Result<()> {
    let k = questions.iter().map(|q| q.choices.len()).max().unwrap_or(0);
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["question_id".to_owned(), "stem_text".to_owned()];
    header.extend((0..k).map(|i| format!("choice_{i}_text")));
    header.extend((0..k).map(|i| format!("choice_{i}_correct")));
    w.write_record(&header)?;
    for q in questions {
        let mut row = vec![q.question_id.clone(), q.stem_text.clone()];
        row.extend((0..k).map(|i| q.choices.get(i).map_or(String::new(), |c| c.text.clone())));
        row.extend((0..k).map(|i| {
            q.choices
                .get(i)
                .map_or(String::new(), |c| if c.is_correct { "1" } else { "0" }.to_owned())
        }));
        w.write_record(&row)?;
    }
    w.flush()
}

#[derive(Serialize)]
struct JsonChoice<'a> {
    text: &'a str,
    correct: bool,
}

#[derive(Serialize)]
struct JsonQuestion<'a> {
    id: &'a str,
    stem: &'a str,
    choices: Vec<JsonChoice<'a>>,
}

/// Writes questions in the JSON layout accepted by [`load_questions`].
pub fn write_questions_json<W: Write>(writer: W, questions: &[Question]) -> std::io::Result<()> {
    let docs: Vec<JsonQuestion<'_>> = questions
        .iter()
        .map(|q| JsonQuestion {
            id: &q.question_id,
            stem: &q.stem_text,
            choices: q
                .choices
                .iter()
                .map(|c| JsonChoice {
                    text: &c.text,
                    correct: c.is_correct,
                })
                .collect(),
        })
        .collect();
    serde_json::to_writer_pretty(writer, &docs).map_err(std::io::Error::other)
}

pub fn write_interactions_csv<W: Write>(
    writer: W,
    interactions: &InteractionDataset,
) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["student_id", "question_id", "correct", "timestamp_ms"])?;
    for i in interactions.iter() {
        w.write_record([
            i.student_id.as_str(),
            i.question_id.as_str(),
            if i.correct { "1" } else { "0" },
            &i.timestamp_ms.to_string(),
        ])?;
    }
    w.flush()
}

/// Removes interactions until every remaining student and question appears
/// in at least `min_count` interactions. Iterates to a fixed point.
pub fn filter_min_interactions(a: &InteractionDataset, min_count: usize) -> InteractionDataset {
    let mut keep: Vec<&Interaction> = a.interactions.iter().collect();
    loop {
        let mut by_student: HashMap<&str, usize> = HashMap::new();
        let mut by_question: HashMap<&str, usize> = HashMap::new();
        for i in &keep {
            *by_student.entry(&i.student_id).or_default() += 1;
            *by_question.entry(&i.question_id).or_default() += 1;
        }
        let before = keep.len();
        keep.retain(|i| {
            by_student[i.student_id.as_str()] >= min_count
                && by_question[i.question_id.as_str()] >= min_count
        });
        if keep.len() == before {
            break;
        }
    }
    InteractionDataset {
        interactions: keep.into_iter().cloned().collect(),
    }
}

fn check_fraction(f: f64, name: &str) -> Result<()> {
    if f > 0.0 && f < 1.0 {
        Ok(())
    } else {
        Err(CorpusError::Split(format!("{name} must lie in (0, 1), got {f}")))
    }
}

/// `round(n * f)` clamped to `[1, n - 1]`; requires `n >= 2`.
fn part_size(n: usize, f: f64) -> usize {
    ((n as f64 * f).round() as usize).clamp(1, n - 1)
}

/// Splits the interactions per question so that every question keeps at
/// least one interaction on each side. Both parts preserve input order.
pub fn stratified_split_interactions(
    a: &InteractionDataset,
    gte_fraction: f64,
    seed: u64,
) -> Result<(InteractionDataset, InteractionDataset)> {
    check_fraction(gte_fraction, "gte_fraction")?;
    let mut groups: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (idx, i) in a.interactions.iter().enumerate() {
        groups.entry(&i.question_id).or_default().push(idx);
    }
    let mut to_gte = vec![false; a.len()];
    let mut rng = seeding::rng(seed, &[0x5717]);
    for (qid, mut idx) in groups {
        if idx.len() < 2 {
            return Err(CorpusError::Split(format!(
                "question {qid:?} has {} interaction(s), at least 2 required",
                idx.len()
            )));
        }
        idx.shuffle(&mut rng);
        for &i in &idx[..part_size(idx.len(), gte_fraction)] {
            to_gte[i] = true;
        }
    }
    let (mut gte, mut sap) = (Vec::new(), Vec::new());
    for (i, inter) in a.interactions.iter().enumerate() {
        if to_gte[i] { &mut gte } else { &mut sap }.push(inter.clone());
    }
    Ok((InteractionDataset::new(gte), InteractionDataset::new(sap)))
}

/// Seeded split of the questions into training and test parts; both parts
/// keep input order and carry their stored traits along.
pub fn split_questions(
    q: &QuestionDataset,
    train_fraction: f64,
    seed: u64,
) -> Result<(QuestionDataset, QuestionDataset)> {
    check_fraction(train_fraction, "train_fraction")?;
    let n = q.len();
    if n < 2 {
        return Err(CorpusError::Split(format!(
            "need at least 2 questions to split, got {n}"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut seeding::rng(seed, &[0x9e57]));
    let n_train = part_size(n, train_fraction);
    let mut train: Vec<usize> = order[..n_train].to_vec();
    let mut test: Vec<usize> = order[n_train..].to_vec();
    train.sort_unstable();
    test.sort_unstable();
    Ok((q.subset(&train), q.subset(&test)))
}
