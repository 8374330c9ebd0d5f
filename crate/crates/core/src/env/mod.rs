//! Single-seat learning environment over the rules engine, plus the
//! multi-seat match runner every other component drives games with.

mod observation;
mod policy;
mod reward;
mod runner;

pub use observation::{encode_observation, Observation, BOARD_SLOTS, HAND_SLOTS, OBS_DIM, VALUE_SCALE};
pub use policy::{Choice, Decision, Policy, RandomPolicy};
pub use reward::{base_reward, STEP_REWARD, WIN_REWARD};
pub use runner::{play_and_settle, play_match, play_turn, MatchRecord, PlyRecord, Transition};

use thiserror::Error;

use crate::game::{move_at, ActionMask, GameError, GameState, MatchSettlement, NUM_PLAYERS};

#[derive(Debug, Error)]
pub enum EnvError {
    #[error(transparent)]
    Game(#[from] GameError),
    #[error("step called on a finished episode")]
    StepAfterDone,
    #[error("step called before reset")]
    NotReset,
}

/// One learning seat among four; the other seats are driven by the supplied
/// policies inside [`ChefsHatEnv::step`]. An episode is one match.
pub struct ChefsHatEnv {
    learner: usize,
    opponents: Vec<Box<dyn Policy>>,
    game: Option<GameState>,
    current_obs: Observation,
    current_mask: ActionMask,
    done: bool,
    last_settlement: Option<MatchSettlement>,
}

impl ChefsHatEnv {
    /// `opponents` fill the non-learner seats in increasing seat order.
    pub fn new(learner: usize, opponents: Vec<Box<dyn Policy>>) -> Self {
        assert!(learner < NUM_PLAYERS);
        assert_eq!(opponents.len(), NUM_PLAYERS - 1, "three opponent policies");
        Self {
            learner,
            opponents,
            game: None,
            current_obs: Observation::zeros(),
            current_mask: ActionMask::none(),
            done: true,
            last_settlement: None,
        }
    }

    pub fn learner(&self) -> usize {
        self.learner
    }

    pub fn game(&self) -> Option<&GameState> {
        self.game.as_ref()
    }

    pub fn last_settlement(&self) -> Option<&MatchSettlement> {
        self.last_settlement.as_ref()
    }

    /// Starts a new game and returns the learner's first observation.
    pub fn reset(&mut self, seed: u64) -> Result<(Observation, ActionMask), EnvError> {
        self.game = Some(GameState::new(seed));
        self.last_settlement = None;
        self.begin_episode()
    }

    /// Continues with the next match of the running game, or starts a new
    /// game from `seed` when the previous one is over.
    pub fn next_match(&mut self, seed: u64) -> Result<(Observation, ActionMask), EnvError> {
        match &self.game {
            Some(game) if !game.is_over() && self.done => self.begin_episode(),
            Some(_) if !self.done => Err(EnvError::NotReset),
            _ => self.reset(seed),
        }
    }

    fn begin_episode(&mut self) -> Result<(Observation, ActionMask), EnvError> {
        self.done = false;
        self.advance_opponents()?;
        let game = self.game.as_ref().ok_or(EnvError::NotReset)?;
        self.current_obs = encode_observation(&game.current, self.learner);
        self.current_mask = game.current.legal_actions(self.learner)?;
        Ok((self.current_obs, self.current_mask.clone()))
    }

    /// Runs opponent seats until the learner must act or the match ends.
    /// Returns whether the match was settled.
    fn advance_opponents(&mut self) -> Result<bool, EnvError> {
        let learner = self.learner;
        let game = self.game.as_mut().ok_or(EnvError::NotReset)?;
        loop {
            let state = &mut game.current;
            if state.is_over() {
                self.last_settlement = Some(game.finish_match()?);
                return Ok(true);
            }
            if state.turn == learner {
                return Ok(false);
            }
            let idx = if state.turn < learner {
                state.turn
            } else {
                state.turn - 1
            };
            play_turn(state, self.opponents[idx].as_mut())?;
        }
    }

    pub fn step(&mut self, action: usize) -> Result<Transition, EnvError> {
        if self.done {
            return Err(EnvError::StepAfterDone);
        }
        let learner = self.learner;
        let game = self.game.as_mut().ok_or(EnvError::NotReset)?;
        let outcome = game.current.step(learner, move_at(action)?)?;
        let reward = base_reward(&outcome);
        // A learner that emptied its hand never gets the turn back, so this
        // plays the match out and settles it.
        let done = self.advance_opponents()?;
        let obs = std::mem::replace(&mut self.current_obs, Observation::zeros());
        let mask = std::mem::replace(&mut self.current_mask, ActionMask::none());
        let (next_obs, next_mask) = if done {
            self.done = true;
            (obs, ActionMask::none())
        } else {
            let state = &self.game.as_ref().ok_or(EnvError::NotReset)?.current;
            self.current_obs = encode_observation(state, learner);
            self.current_mask = state.legal_actions(learner)?;
            (self.current_obs, self.current_mask.clone())
        };
        Ok(Transition {
            obs,
            action,
            mask,
            reward,
            next_obs,
            next_mask,
            done,
            log_prob: 0.0,
            value: None,
        })
    }

    pub fn is_done(&self) -> bool {
        self.done
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::seq::IteratorRandom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn env(seed: u64) -> ChefsHatEnv {
        let opps: Vec<Box<dyn Policy>> = (0..3)
            .map(|i| Box::new(RandomPolicy::new(seed + i)) as Box<dyn Policy>)
            .collect();
        ChefsHatEnv::new(1, opps)
    }

    #[test]
    fn reset_is_deterministic() {
        let a = env(3).reset(7).unwrap();
        let b = env(3).reset(7).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn step_after_done_errors() {
        let mut e = env(1);
        assert!(matches!(e.step(199), Err(EnvError::StepAfterDone)));
        let (_, mut mask) = e.reset(2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        loop {
            let a = mask.legal_indices().choose(&mut rng).unwrap();
            let t = e.step(a).unwrap();
            assert!(t.mask.is_legal(t.action));
            if t.done {
                break;
            }
            mask = t.next_mask;
        }
        assert!(matches!(e.step(199), Err(EnvError::StepAfterDone)));
        assert!(e.last_settlement().is_some());
    }

    #[test]
    fn illegal_action_propagates() {
        let mut e = env(5);
        let (_, mask) = e.reset(5).unwrap();
        let bad = (0..199).find(|&i| !mask.is_legal(i)).unwrap();
        assert!(matches!(
            e.step(bad),
            Err(EnvError::Game(GameError::IllegalMove { .. }))
        ));
    }

    #[test]
    fn episode_rewards_follow_scheme() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut e = env(9);
        for ep in 0..100u64 {
            let (_, mut mask) = e.next_match(ep).unwrap();
            let mut rewards = Vec::new();
            loop {
                let a = mask.legal_indices().choose(&mut rng).unwrap();
                let t = e.step(a).unwrap();
                rewards.push(t.reward);
                if t.done {
                    break;
                }
                mask = t.next_mask;
            }
            let n = rewards.len() as f32;
            let total: f32 = rewards.iter().sum();
            let won = e.last_settlement().unwrap().finish[0] == 1;
            let expected = if won { 1.0 - 0.01 * (n - 1.0) } else { -0.01 * n };
            assert!((total - expected).abs() < 1e-4, "{total} vs {expected}");
        }
    }
}
