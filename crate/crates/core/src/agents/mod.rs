//! Deep Q-learning and PPO learners, introspective confidence, value traces
//! and checkpoint files.

pub mod checkpoint;
mod confidence;
mod dqn;
mod ppo;
mod replay;
mod trace;

pub use confidence::{introspective_confidence, ConfidenceTrace};
pub use dqn::{dqn_select, dqn_targets, dqn_update, masked_argmax, DqnAgent, DqnConfig};
pub use ppo::{
    clipped_surrogate, compute_gae, masked_log_softmax, masked_softmax, normalize_advantages,
    ppo_select, prepare_samples, surrogate_grad_logp, PpoAgent, PpoConfig, PpoLosses, PpoSample,
    ADV_STD_FLOOR,
};
pub use replay::ReplayBuffer;
pub use trace::{qvalue_trace, TracePoint, TraceSet};

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::env::{Choice, Decision, Policy, Transition};
use crate::nn::NnError;
use checkpoint::{hidden_sizes, load_nets, save_nets, CheckpointKind};

#[derive(Debug, Error)]
pub enum AgentError {
    #[error("no legal action in mask")]
    EmptyMask,
    #[error("empty training batch")]
    EmptyBatch,
    #[error("rollout transition lacks a value estimate")]
    MissingValue,
    #[error(transparent)]
    Nn(#[from] NnError),
    #[error("checkpoint not found: {0}")]
    MissingCheckpoint(String),
    #[error("malformed checkpoint: {0}")]
    BadCheckpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AgentKind {
    Dql,
    Ppo,
    Random,
}

impl fmt::Display for AgentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AgentKind::Dql => "dql",
            AgentKind::Ppo => "ppo",
            AgentKind::Random => "random",
        })
    }
}

impl FromStr for AgentKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dql" => Ok(AgentKind::Dql),
            "ppo" => Ok(AgentKind::Ppo),
            "random" => Ok(AgentKind::Random),
            other => Err(format!("unknown agent kind {other:?}")),
        }
    }
}

/// A trainable agent of either learner type.
#[derive(Clone, Debug)]
pub enum Agent {
    Dql(DqnAgent),
    Ppo(PpoAgent),
}

impl Agent {
    pub fn kind(&self) -> AgentKind {
        match self {
            Agent::Dql(_) => AgentKind::Dql,
            Agent::Ppo(_) => AgentKind::Ppo,
        }
    }

    pub fn save(&self, path: &Path) -> Result<(), AgentError> {
        match self {
            Agent::Dql(a) => save_nets(path, CheckpointKind::Dql, &[&a.online]),
            Agent::Ppo(a) => save_nets(path, CheckpointKind::Ppo, &[&a.policy, &a.value]),
        }
    }

    /// Loads a checkpoint; hidden sizes come from the file, the remaining
    /// hyperparameters from the given configs.
    pub fn load(
        path: &Path,
        dqn: &DqnConfig,
        ppo: &PpoConfig,
        seed: u64,
    ) -> Result<Self, AgentError> {
        let (kind, mut nets) = load_nets(path)?;
        match (kind, nets.len()) {
            (CheckpointKind::Dql, 1) => {
                let net = nets.remove(0);
                let config = DqnConfig {
                    hidden: hidden_sizes(&net),
                    ..dqn.clone()
                };
                let mut agent = DqnAgent::from_net(config, net, seed);
                agent.epsilon = 0.0;
                Ok(Agent::Dql(agent))
            }
            (CheckpointKind::Ppo, 2) => {
                let value = nets.remove(1);
                let policy = nets.remove(0);
                let config = PpoConfig {
                    hidden: hidden_sizes(&policy),
                    ..ppo.clone()
                };
                Ok(Agent::Ppo(PpoAgent::from_nets(config, policy, value, seed)))
            }
            (kind, n) => Err(AgentError::BadCheckpoint(format!(
                "{kind:?} checkpoint with {n} networks is not an agent"
            ))),
        }
    }

    pub fn reseed(&mut self, seed: u64) {
        match self {
            Agent::Dql(a) => a.reseed(seed),
            Agent::Ppo(a) => a.reseed(seed),
        }
    }

    pub fn set_learning_rate(&mut self, lr: f32) {
        match self {
            Agent::Dql(a) => a.set_learning_rate(lr),
            Agent::Ppo(a) => a.set_learning_rate(lr),
        }
    }

    /// One adaptation pass over a finished match's transitions: `passes`
    /// sweeps of full-batch TD updates for DQL, one PPO update (its configured
    /// epochs) for PPO. Returns the mean loss.
    pub fn adapt(&mut self, episode: &[Transition], passes: usize) -> Result<f32, AgentError> {
        if episode.is_empty() {
            return Err(AgentError::EmptyBatch);
        }
        match self {
            Agent::Dql(a) => {
                let batch: Vec<&Transition> = episode.iter().collect();
                let mut total = 0.0;
                for _ in 0..passes.max(1) {
                    total += a.update(&batch)?;
                }
                a.sync_target();
                Ok(total / passes.max(1) as f32)
            }
            Agent::Ppo(a) => {
                let mut total = 0.0;
                for _ in 0..passes.max(1) {
                    let l = a.update(&[episode.to_vec()])?;
                    total += l.policy + l.value;
                }
                Ok(total / passes.max(1) as f32)
            }
        }
    }
}

impl Policy for Agent {
    fn act(&mut self, d: &Decision<'_>) -> Choice {
        match self {
            Agent::Dql(a) => a.act(d),
            Agent::Ppo(a) => a.act(d),
        }
    }

    fn name(&self) -> &str {
        match self {
            Agent::Dql(a) => a.name(),
            Agent::Ppo(a) => a.name(),
        }
    }
}
