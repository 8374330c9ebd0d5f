use serde::{Deserialize, Serialize};

use super::observation::{encode_observation, Observation};
use super::policy::{Choice, Decision, Policy};
use super::reward::base_reward;
use crate::game::{
    move_at, ActionMask, GameError, GameState, MatchSettlement, MatchState, MATCH_PLY_LIMIT,
    NUM_PLAYERS,
};

/// One move as seen by the seat that made it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlyRecord {
    pub player: usize,
    pub obs: Observation,
    pub mask: ActionMask,
    pub action: usize,
    pub reward: f32,
    pub log_prob: f32,
    pub value: Option<f32>,
    pub trace: Option<f32>,
    /// The actor emptied its hand with this move.
    pub finished: bool,
}

/// A state-action-reward record from one seat's perspective.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub obs: Observation,
    pub action: usize,
    pub mask: ActionMask,
    pub reward: f32,
    pub next_obs: Observation,
    /// Legal moves at `next_obs`; empty when `done`.
    pub next_mask: ActionMask,
    pub done: bool,
    pub log_prob: f32,
    pub value: Option<f32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchRecord {
    pub plies: Vec<PlyRecord>,
    pub final_state: MatchState,
}

impl MatchRecord {
    pub fn seat_plies(&self, seat: usize) -> impl Iterator<Item = &PlyRecord> + '_ {
        self.plies.iter().filter(move |p| p.player == seat)
    }

    /// Chains one seat's consecutive decisions into transitions; the last one
    /// is terminal.
    pub fn transitions(&self, seat: usize) -> Vec<Transition> {
        let mine: Vec<&PlyRecord> = self.seat_plies(seat).collect();
        mine.iter()
            .enumerate()
            .map(|(i, ply)| {
                let next = mine.get(i + 1);
                Transition {
                    obs: ply.obs,
                    action: ply.action,
                    mask: ply.mask.clone(),
                    reward: ply.reward,
                    next_obs: next.map_or(ply.obs, |n| n.obs),
                    next_mask: next.map_or_else(ActionMask::none, |n| n.mask.clone()),
                    done: next.is_none(),
                    log_prob: ply.log_prob,
                    value: ply.value,
                }
            })
            .collect()
    }
}

/// Makes the current seat's decision and applies it.
pub fn play_turn(state: &mut MatchState, policy: &mut dyn Policy) -> Result<PlyRecord, GameError> {
    if state.plies >= MATCH_PLY_LIMIT {
        return Err(GameError::PlyLimit(MATCH_PLY_LIMIT));
    }
    let player = state.turn;
    let mask = state.legal_actions(player)?;
    let obs = encode_observation(state, player);
    let Choice {
        action,
        log_prob,
        value,
        trace,
    } = policy.act(&Decision {
        player,
        obs: &obs,
        mask: &mask,
        hand: &state.hands[player],
        board: &state.board,
    });
    let outcome = state.step(player, move_at(action)?)?;
    Ok(PlyRecord {
        player,
        obs,
        mask,
        action,
        reward: base_reward(&outcome),
        log_prob,
        value,
        trace,
        finished: outcome.finished,
    })
}

/// Plays the game's current match to the end without settling it.
pub fn play_match(
    game: &GameState,
    seats: &mut [&mut dyn Policy; NUM_PLAYERS],
) -> Result<MatchRecord, GameError> {
    let mut state = game.current.clone();
    let mut plies = Vec::new();
    while !state.is_over() {
        let seat = state.turn;
        plies.push(play_turn(&mut state, seats[seat])?);
    }
    Ok(MatchRecord {
        plies,
        final_state: state,
    })
}

/// Plays and settles the current match, dealing the next one.
pub fn play_and_settle(
    game: &mut GameState,
    seats: &mut [&mut dyn Policy; NUM_PLAYERS],
) -> Result<(MatchRecord, MatchSettlement), GameError> {
    let record = play_match(game, seats)?;
    game.current = record.final_state.clone();
    let settlement = game.finish_match()?;
    Ok((record, settlement))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::policy::RandomPolicy;
    use crate::env::reward::{STEP_REWARD, WIN_REWARD};

    fn randoms(seed: u64) -> [RandomPolicy; 4] {
        std::array::from_fn(|i| RandomPolicy::new(seed * 10 + i as u64))
    }

    #[test]
    fn random_match_has_exactly_one_win_reward() {
        for seed in 0..200 {
            let game = GameState::new(seed);
            let mut pols = randoms(seed);
            let [a, b, c, d] = &mut pols;
            let rec = play_match(&game, &mut [a, b, c, d]).unwrap();
            let wins = rec.plies.iter().filter(|p| p.reward == WIN_REWARD).count();
            assert_eq!(wins, 1);
            assert!(rec
                .plies
                .iter()
                .all(|p| p.reward == WIN_REWARD || p.reward == STEP_REWARD));
        }
    }

    #[test]
    fn transitions_chain_and_terminate() {
        let game = GameState::new(4);
        let mut pols = randoms(4);
        let [a, b, c, d] = &mut pols;
        let rec = play_match(&game, &mut [a, b, c, d]).unwrap();
        for seat in 0..4 {
            let ts = rec.transitions(seat);
            assert_eq!(ts.len(), rec.seat_plies(seat).count());
            assert!(ts.last().unwrap().done);
            assert!(ts[..ts.len() - 1].iter().all(|t| !t.done));
            for w in ts.windows(2) {
                assert_eq!(w[0].next_obs, w[1].obs);
            }
            assert!(ts.iter().all(|t| t.mask.is_legal(t.action)));
        }
    }
}
