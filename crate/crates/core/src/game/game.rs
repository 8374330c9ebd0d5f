use serde::{Deserialize, Serialize};

use super::exchange::Exchange;
use super::scoring::{settle_match, MatchSettlement, ScoreBoard};
use super::state::MatchState;
use super::GameError;
use crate::seed::derive_seed;

/// Plies after which a runner gives up on a match. Random play finishes well
/// below this.
pub const MATCH_PLY_LIMIT: u32 = 5_000;

/// A sequence of matches played until someone reaches the winning total.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameState {
    pub seed: u64,
    pub scores: ScoreBoard,
    /// Zero-based index of the current match.
    pub match_index: u32,
    pub current: MatchState,
    pub last_exchange: Exchange,
}

impl GameState {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            scores: ScoreBoard::default(),
            match_index: 0,
            current: MatchState::deal(Self::match_seed(seed, 0), None),
            last_exchange: Exchange::default(),
        }
    }

    /// Deal seed of match `index` within the game seeded by `seed`.
    pub fn match_seed(seed: u64, index: u32) -> u64 {
        derive_seed(seed, index as u64)
    }

    /// Settles the current match and, unless the game is over, deals the next
    /// one (with the role exchange).
    pub fn finish_match(&mut self) -> Result<MatchSettlement, GameError> {
        let settlement = settle_match(&self.current)?;
        self.scores.record(&settlement)?;
        if !self.scores.is_over() {
            self.match_index += 1;
            let dealt = MatchState::deal(
                Self::match_seed(self.seed, self.match_index),
                Some(settlement.next_roles),
            );
            let (exchanged, exchange) = Exchange::perform(&dealt);
            self.current = exchanged;
            self.last_exchange = exchange;
        }
        Ok(settlement)
    }

    pub fn is_over(&self) -> bool {
        self.scores.is_over()
    }
}
