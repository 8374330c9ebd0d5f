//! Experiment orchestration: training curricula, tournaments, the two
//! experimental scenarios and trace export.

pub mod config;
pub mod scenarios;
pub mod table;
pub mod train;

pub use config::{ExperimentConfig, SeatKind, SCHEMA_VERSION};
pub use scenarios::{
    archetype_dataset, export_traces, load_opponent, load_opponents, load_predictor,
    nearest_label_accuracy, ols_slope, scenario1_run, scenario2, scenario2_run, sign_test_p, tournament,
    GameRivalry, KindStats, Scenario1Run, Scenario2Report, Scenario2Run, SignTest, TournamentReport,
};
pub use table::{Adaptation, MatchOutcome, Opponent, Table, TableSetup, HUMAN_SEAT};
pub use train::{evaluate_vs_random, new_agent, play_seated, train_agent, CurriculumConfig, CurvePoint, TrainOutcome};

use thiserror::Error;

use crate::agents::AgentError;
use crate::game::GameError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Agent(#[from] AgentError),
    #[error("trait predictor unavailable: {0}")]
    MissingPredictor(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
