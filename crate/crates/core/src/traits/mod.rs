//! Trait prediction from play: episode features, a small regressor from
//! features to agency/competence/communion, and scripted synthetic humans
//! with fixed trait labels.

mod dataset;
mod predictor;
mod synthetic;

pub use dataset::{featurize_episode, EpisodeFeatures, TraitDataset, TraitRecord, FEATURE_DIM};
pub use predictor::{
    predict_traits, train_trait_predictor, PredictorConfig, PredictorReport, TraitPredictor,
};
pub use synthetic::{assess_agent, synthetic_human, Archetype, SyntheticHuman};

use thiserror::Error;

use crate::agents::AgentError;

#[derive(Debug, Error)]
pub enum TraitError {
    #[error("episode has no moves")]
    EmptyEpisode,
    #[error("all labels are identical")]
    DegenerateDataset,
    #[error("dataset has no records")]
    EmptyDataset,
    #[error("unknown archetype {0:?}")]
    UnknownArchetype(String),
    #[error("feature vector has {0} entries, expected 228")]
    FeatureWidth(usize),
    #[error("dataset line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Agent(#[from] AgentError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
