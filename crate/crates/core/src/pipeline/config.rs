//! Run configuration, read from a flat JSON document.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{PipelineError, Result};
use crate::corpus::DataFormat;
use crate::irt::IrtConfig;
use crate::regress::{default_search_space, Distribution, RegressorKind, SearchSpace};
use crate::synth::SynthConfig;
use crate::textfeat::FeatureGroups;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvaluationMode {
    Lte,
    Sap,
    #[default]
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchSettings {
    pub n_candidates: usize,
    pub k_folds: usize,
    /// Replaces the stock distributions when present.
    pub params: Option<BTreeMap<String, Distribution>>,
}

impl Default for SearchSettings {
    fn default() -> Self {
        SearchSettings {
            n_candidates: 10,
            k_folds: 10,
            params: None,
        }
    }
}

impl SearchSettings {
    /// Search space for `kind`, with threshold keys when `text_thresholds`.
    pub fn space(&self, kind: RegressorKind, text_thresholds: bool, seed: u64) -> SearchSpace {
        let mut space = default_search_space(kind, text_thresholds, self.n_candidates, seed);
        space.k_folds = self.k_folds;
        if let Some(params) = &self.params {
            space.params = params.clone();
        }
        space
    }
}

fn default_min_interactions() -> usize {
    2
}

fn default_gte_fraction() -> f64 {
    0.5
}

fn default_train_fraction() -> f64 {
    0.8
}

fn default_groups() -> FeatureGroups {
    FeatureGroups::ALL
}

fn default_regressor() -> RegressorKind {
    RegressorKind::Forest
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub questions_path: Option<PathBuf>,
    pub interactions_path: Option<PathBuf>,
    #[serde(default)]
    pub allow_empty_choice_text: bool,
    /// Every kept student and question needs at least this many answers.
    #[serde(default = "default_min_interactions")]
    pub min_interactions: usize,
    /// Share of each question's answers used for calibration.
    #[serde(default = "default_gte_fraction")]
    pub gte_fraction: f64,
    #[serde(default = "default_train_fraction")]
    pub train_fraction: f64,
    pub split_seed: Option<u64>,
    pub calibration_seed: Option<u64>,
    pub search_seed: Option<u64>,
    #[serde(default)]
    pub irt: IrtConfig,
    #[serde(default = "default_groups")]
    pub feature_groups: FeatureGroups,
    #[serde(default = "default_regressor")]
    pub regressor: RegressorKind,
    #[serde(default)]
    pub search: SearchSettings,
    pub bundle_dir: Option<PathBuf>,
    pub predict_questions_path: Option<PathBuf>,
    #[serde(default)]
    pub evaluation_mode: EvaluationMode,
    /// Feature groups requested at evaluation; must match the bundle.
    pub evaluation_groups: Option<FeatureGroups>,
    pub synth: Option<SynthConfig>,
    pub output_dir: Option<PathBuf>,
}

/// A parsed configuration plus where it came from.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: PipelineConfig,
    /// Directory that relative paths resolve against.
    pub base_dir: PathBuf,
    pub sha256: String,
}

pub(crate) fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

impl LoadedConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| PipelineError::io(path, e))?;
        let config: PipelineConfig =
            serde_json::from_slice(&bytes).map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))?;
        config.irt.validate()?;
        Ok(LoadedConfig {
            config,
            base_dir: path.parent().map(Path::to_path_buf).unwrap_or_default(),
            sha256: sha256_hex(&bytes),
        })
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    fn required_path(&self, value: &Option<PathBuf>, name: &str) -> Result<PathBuf> {
        value
            .as_deref()
            .map(|p| self.resolve(p))
            .ok_or_else(|| PipelineError::Config(format!("missing field {name}")))
    }

    pub fn questions_path(&self) -> Result<PathBuf> {
        self.required_path(&self.config.questions_path, "questions_path")
    }

    pub fn interactions_path(&self) -> Result<PathBuf> {
        self.required_path(&self.config.interactions_path, "interactions_path")
    }

    pub fn predict_questions_path(&self) -> Result<PathBuf> {
        self.required_path(&self.config.predict_questions_path, "predict_questions_path")
    }

    /// `--out` wins over `output_dir`.
    pub fn output_dir(&self, cli_out: Option<&Path>) -> Result<PathBuf> {
        match cli_out {
            Some(p) => Ok(p.to_path_buf()),
            None => self.required_path(&self.config.output_dir, "output_dir (or --out)"),
        }
    }

    /// The bundle to read: `bundle_dir`, else the output directory.
    pub fn bundle_dir(&self, cli_out: Option<&Path>) -> Result<PathBuf> {
        match &self.config.bundle_dir {
            Some(p) => Ok(self.resolve(p)),
            None => self.output_dir(cli_out),
        }
    }

    pub fn seed(&self, value: Option<u64>, name: &str) -> Result<u64> {
        value.ok_or_else(|| PipelineError::Config(format!("missing mandatory seed {name}")))
    }

    pub fn synth(&self) -> Result<&SynthConfig> {
        self.config
            .synth
            .as_ref()
            .ok_or_else(|| PipelineError::Config("missing field synth".into()))
    }
}

pub(crate) fn format_of(path: &Path) -> Result<DataFormat> {
    DataFormat::from_path(path)
        .ok_or_else(|| PipelineError::Config(format!("{}: expected a .csv or .json file", path.display())))
}
