//! Live sessions for one human against three agents: lifecycle,
//! questionnaires, turn handling, an append-only event log, deterministic
//! replay and the HTTP front end.

mod events;
pub mod http;
mod replay;
mod service;

pub use events::{read_log, EventLog, EventPayload, SessionEvent, WIRE_SCHEMA_VERSION};
pub use replay::{replay, Replayed};
pub use service::{
    BoardView, CreateRequest, CreatedSession, HumanView, Phase, QuestionItem, QuestionnaireAnswers,
    QuestionnaireSchema, SeatView, ServiceConfig, Session, SessionManager, TraitAnswers,
    INACTIVITY_LIMIT,
};

use thiserror::Error;

use crate::game::GameError;
use crate::harness::HarnessError;

#[derive(Debug, Error)]
pub enum SessionError {
    #[error("session {0} not found")]
    NotFound(String),
    #[error("checkpoint not found: {0}")]
    MissingCheckpoint(String),
    #[error("{action} is not allowed while the session is {phase}")]
    WrongPhase { action: &'static str, phase: String },
    #[error("not your turn (seat {turn} is to move)")]
    NotYourTurn { turn: usize },
    #[error("illegal move: {0}")]
    IllegalMove(String),
    #[error("answer {name} = {value} is outside [0, 5]")]
    OutOfRange { name: String, value: f64 },
    #[error("bad request: {0}")]
    BadRequest(String),
    #[error("event log is empty")]
    EmptyLog,
    #[error("corrupt event log at sequence {seq}: {reason}")]
    CorruptLog { seq: u64, reason: String },
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Harness(#[from] HarnessError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
