use rand::seq::IteratorRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::observation::Observation;
use crate::game::{ActionMask, BoardState, Hand};

/// Everything a seat may look at when choosing a move.
#[derive(Clone, Copy, Debug)]
pub struct Decision<'a> {
    pub player: usize,
    pub obs: &'a Observation,
    pub mask: &'a ActionMask,
    pub hand: &'a Hand,
    pub board: &'a BoardState,
}

/// A chosen action plus whatever the chooser knows about it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Choice {
    pub action: usize,
    /// Log-probability under a stochastic policy (0 for deterministic ones).
    pub log_prob: f32,
    /// Value estimate feeding introspective confidence: Q of the chosen
    /// action for value learners, the critic value for actor-critics.
    pub value: Option<f32>,
    /// Highest masked Q-value, or the best action's probability times the
    /// state value for policy learners.
    pub trace: Option<f32>,
}

impl Choice {
    pub fn plain(action: usize) -> Self {
        Self {
            action,
            log_prob: 0.0,
            value: None,
            trace: None,
        }
    }
}

pub trait Policy: Send {
    fn act(&mut self, decision: &Decision<'_>) -> Choice;

    fn name(&self) -> &str;
}

/// Uniform over legal actions.
#[derive(Clone, Debug)]
pub struct RandomPolicy {
    rng: ChaCha8Rng,
}

impl RandomPolicy {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

impl Policy for RandomPolicy {
    fn act(&mut self, decision: &Decision<'_>) -> Choice {
        let action = decision
            .mask
            .legal_indices()
            .choose(&mut self.rng)
            .expect("pass is always legal");
        Choice::plain(action)
    }

    fn name(&self) -> &str {
        "random"
    }
}
