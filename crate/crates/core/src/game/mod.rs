//! Rules engine: deck, deal, exchange, discards, match and game scoring.

mod action;
mod card;
mod exchange;
mod game;
mod scoring;
mod state;

pub use action::{
    action_catalog, move_at, ActionMask, MoveSpec, JOKER_ONLY_FACE, JOKER_ONLY_INDEX, NUM_ACTIONS,
    PASS_INDEX,
};
pub use card::{build_deck, full_deck, Card, Hand, DECK_SIZE, HAND_SIZE, MAX_FACE, NUM_PLAYERS};
pub use exchange::{exchange_cards, CardTransfer, Exchange};
pub use game::{GameState, MATCH_PLY_LIMIT};
pub use scoring::{settle_match, MatchSettlement, ScoreBoard, MATCH_POINTS, WINNING_POINTS};
pub use state::{BoardState, MatchState, Role, StepOutcome, EMPTY_FACE};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GameError {
    #[error("invalid card value {0}")]
    InvalidCard(u8),
    #[error("hand does not hold the required cards")]
    MissingCards,
    #[error("no player {0}")]
    BadPlayer(usize),
    #[error("action index {0} is outside the catalog")]
    BadActionIndex(usize),
    #[error("malformed move notation {0:?}")]
    BadNotation(String),
    #[error("player {player} acted out of turn (turn is {turn})")]
    OutOfTurn { player: usize, turn: usize },
    #[error("player {0} has already finished")]
    PlayerFinished(usize),
    #[error("illegal move {notation} by player {player}")]
    IllegalMove { player: usize, notation: String },
    #[error("the match is already over")]
    MatchOver,
    #[error("the match is not finished")]
    MatchNotFinished,
    #[error("the game is already over")]
    GameOver,
    #[error("match exceeded {0} plies")]
    PlyLimit(u32),
}
