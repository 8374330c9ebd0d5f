use serde::{Deserialize, Serialize};

use super::card::NUM_PLAYERS;
use super::state::{MatchState, Role};
use super::GameError;

/// Points by finishing position.
pub const MATCH_POINTS: [u32; NUM_PLAYERS] = [3, 2, 1, 0];
/// A game ends once somebody reaches this many points.
pub const WINNING_POINTS: u32 = 15;

/// Result of one finished match.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchSettlement {
    /// All four seats in finishing order (the last one is implied by the state).
    pub finish: [usize; NUM_PLAYERS],
    pub awarded: [u32; NUM_PLAYERS],
    pub next_roles: [Role; NUM_PLAYERS],
}

pub fn settle_match(state: &MatchState) -> Result<MatchSettlement, GameError> {
    if !state.is_over() {
        return Err(GameError::MatchNotFinished);
    }
    let mut finish = [0usize; NUM_PLAYERS];
    finish[..NUM_PLAYERS - 1].copy_from_slice(&state.finish_order[..NUM_PLAYERS - 1]);
    finish[NUM_PLAYERS - 1] = (0..NUM_PLAYERS)
        .find(|p| !finish[..NUM_PLAYERS - 1].contains(p))
        .expect("three distinct finishers leave exactly one seat");
    let mut awarded = [0u32; NUM_PLAYERS];
    let mut next_roles = [Role::Dishwasher; NUM_PLAYERS];
    for (pos, &player) in finish.iter().enumerate() {
        awarded[player] = MATCH_POINTS[pos];
        next_roles[player] = Role::BY_FINISH[pos];
    }
    Ok(MatchSettlement {
        finish,
        awarded,
        next_roles,
    })
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoreBoard {
    pub points: [u32; NUM_PLAYERS],
    pub matches_played: u32,
    pub game_winner: Option<usize>,
}

impl ScoreBoard {
    /// Adds a match result. When several players cross the threshold in the
    /// same match the higher total wins, then the better finisher.
    pub fn record(&mut self, settlement: &MatchSettlement) -> Result<(), GameError> {
        if self.game_winner.is_some() {
            return Err(GameError::GameOver);
        }
        for (total, add) in self.points.iter_mut().zip(settlement.awarded) {
            *total += add;
        }
        self.matches_played += 1;
        self.game_winner = settlement
            .finish
            .iter()
            .copied()
            .filter(|&p| self.points[p] >= WINNING_POINTS)
            .max_by_key(|&p| {
                let pos = settlement.finish.iter().position(|&q| q == p).unwrap();
                (self.points[p], NUM_PLAYERS - pos)
            });
        Ok(())
    }

    pub fn is_over(&self) -> bool {
        self.game_winner.is_some()
    }
}
