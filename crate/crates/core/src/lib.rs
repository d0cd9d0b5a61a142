//! Estimating the latent traits of multiple-choice questions from their
//! text.
//!
//! Items are calibrated with a two-parameter logistic IRT model on past
//! answers; regressors then learn to map readability, linguistic and TF-IDF
//! features of the question text to the calibrated difficulty and
//! discrimination, so that new questions get trait estimates before anyone
//! has answered them.

pub mod corpus;
pub mod eval;
pub mod irt;
pub mod pipeline;
pub mod regress;
mod seeding;
pub mod synth;
pub mod textfeat;

pub use corpus::{Choice, Interaction, InteractionDataset, Question, QuestionDataset};
pub use eval::{ClassificationMetrics, RegressionMetrics};
pub use irt::{IrtConfig, LatentTraits, SkillEstimate, TraitKind};
pub use pipeline::{PipelineConfig, PipelineError};
pub use regress::{ForestParams, RegressorKind, SearchSpace, TraitRegressor, TreeParams};
pub use synth::SynthConfig;
pub use textfeat::{FeatureGroups, FeatureMatrix, FeatureVector, TfidfVocabulary, TokenizedText};
