//! Curriculum training: a phase against random opponents followed by
//! self-play against rotating frozen snapshots.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::agents::{Agent, AgentKind, DqnAgent, DqnConfig, PpoAgent, PpoConfig, ReplayBuffer};
use crate::env::{play_match, MatchRecord, Policy, RandomPolicy, Transition};
use crate::game::{GameState, NUM_PLAYERS};
use crate::seed::derive_seed;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CurriculumConfig {
    /// Training matches against three random opponents.
    pub vs_random_episodes: usize,
    /// Training matches against frozen snapshots of the learner.
    pub self_play_episodes: usize,
    pub eval_every: usize,
    pub eval_matches: usize,
    /// Matches between snapshots added to the self-play pool.
    pub snapshot_every: usize,
    /// Largest number of snapshots kept in the pool.
    pub pool_size: usize,
    /// Chance that a self-play opponent seat is random instead of a snapshot.
    pub random_opponent_rate: f64,
    /// Exploration used by frozen DQL snapshots.
    pub snapshot_epsilon: f32,
    /// Return the evaluation-best agent instead of the last one.
    pub keep_best: bool,
}

impl Default for CurriculumConfig {
    fn default() -> Self {
        Self {
            vs_random_episodes: 30_000,
            self_play_episodes: 20_000,
            eval_every: 500,
            eval_matches: 200,
            snapshot_every: 2_000,
            pool_size: 5,
            random_opponent_rate: 0.5,
            snapshot_epsilon: 0.05,
            keep_best: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub episodes: usize,
    pub phase: String,
    pub win_rate: f64,
    pub mean_loss: f64,
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub agent: Agent,
    pub curve: Vec<CurvePoint>,
    /// Episodes completed when the returned agent was taken.
    pub episodes: usize,
}

fn random_opponents(seed: u64) -> Vec<Box<dyn Policy>> {
    (0..NUM_PLAYERS - 1)
        .map(|i| Box::new(RandomPolicy::new(derive_seed(seed, i as u64))) as Box<dyn Policy>)
        .collect()
}

/// Plays the game's current match with `learner` at `seat` and `others` in
/// the remaining seats (in order).
pub fn play_seated(
    game: &GameState,
    learner: &mut dyn Policy,
    seat: usize,
    others: &mut [Box<dyn Policy>],
) -> Result<MatchRecord, HarnessError> {
    let mut it = others.iter_mut();
    let mut learner = Some(learner);
    let slots: Vec<&mut dyn Policy> = (0..NUM_PLAYERS)
        .map(|s| {
            if s == seat {
                learner.take().expect("one learner seat")
            } else {
                it.next().expect("three opponents").as_mut()
            }
        })
        .collect();
    let mut seats: [&mut dyn Policy; NUM_PLAYERS] = slots
        .try_into()
        .unwrap_or_else(|_| unreachable!("four seats"));
    Ok(play_match(game, &mut seats)?)
}

fn won(record: &MatchRecord, seat: usize) -> bool {
    record.final_state.finish_order.first() == Some(&seat)
}

/// Win rate of `agent` (acting greedily for DQL) against three random
/// opponents over single-match episodes with rotating seats.
pub fn evaluate_vs_random(agent: &Agent, matches: usize, seed: u64) -> Result<f64, HarnessError> {
    if matches == 0 {
        return Ok(0.0);
    }
    let mut player = agent.clone();
    if let Agent::Dql(a) = &mut player {
        a.epsilon = 0.0;
    }
    player.reseed(derive_seed(seed, 0xE7A1));
    let mut wins = 0usize;
    for m in 0..matches {
        let game = GameState::new(derive_seed(seed, m as u64));
        let mut opps = random_opponents(derive_seed(seed ^ 0xABCD, m as u64));
        let seat = m % NUM_PLAYERS;
        let record = play_seated(&game, &mut player, seat, &mut opps)?;
        wins += won(&record, seat) as usize;
    }
    Ok(wins as f64 / matches as f64)
}

/// Training-only state shared by both learner kinds.
struct Learner {
    agent: Agent,
    replay: Option<ReplayBuffer>,
    rollout: Vec<Vec<Transition>>,
}

impl Learner {
    fn observe(&mut self, episode: Vec<Transition>) -> Result<Option<f32>, HarnessError> {
        match &mut self.agent {
            Agent::Dql(a) => {
                let replay = self.replay.as_mut().expect("DQL learner has a replay buffer");
                let steps = episode.len() as u64;
                for t in episode {
                    replay.push(t);
                }
                let before = a.env_steps;
                a.env_steps += steps;
                a.epsilon = a.config.epsilon_at(a.env_steps);
                if replay.len() < a.config.warmup {
                    return Ok(None);
                }
                let n_updates = a.env_steps / a.config.train_every - before / a.config.train_every;
                let mut total = 0.0;
                for _ in 0..n_updates {
                    let batch = replay.sample(a.config.batch_size);
                    total += a.update(&batch)?;
                }
                Ok((n_updates > 0).then(|| total / n_updates as f32))
            }
            Agent::Ppo(a) => {
                self.rollout.push(episode);
                if self.rollout.len() < a.config.episodes_per_update {
                    return Ok(None);
                }
                let losses = a.update(&self.rollout)?;
                self.rollout.clear();
                Ok(Some(losses.policy + losses.value))
            }
        }
    }
}

fn snapshot_policy(agent: &Agent, epsilon: f32, seed: u64) -> Box<dyn Policy> {
    let mut snap = agent.clone();
    snap.reseed(seed);
    if let Agent::Dql(a) = &mut snap {
        a.epsilon = epsilon;
    }
    Box::new(snap)
}

pub fn new_agent(
    kind: AgentKind,
    dqn: &DqnConfig,
    ppo: &PpoConfig,
    seed: u64,
) -> Result<Agent, HarnessError> {
    Ok(match kind {
        AgentKind::Dql => Agent::Dql(DqnAgent::new(dqn.clone(), seed)?),
        AgentKind::Ppo => Agent::Ppo(PpoAgent::new(ppo.clone(), seed)?),
        AgentKind::Random => return Err(HarnessError::Config("random agents are not trained".into())),
    })
}

/// Runs the full curriculum for one learner. `progress` receives every
/// learning-curve point as it is produced.
pub fn train_agent(
    kind: AgentKind,
    dqn: &DqnConfig,
    ppo: &PpoConfig,
    curriculum: &CurriculumConfig,
    seed: u64,
    mut progress: impl FnMut(&CurvePoint),
) -> Result<TrainOutcome, HarnessError> {
    let agent = new_agent(kind, dqn, ppo, derive_seed(seed, 1))?;
    let replay = matches!(kind, AgentKind::Dql)
        .then(|| ReplayBuffer::new(dqn.buffer_capacity, derive_seed(seed, 2)));
    let mut learner = Learner {
        agent,
        replay,
        rollout: Vec::new(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 3));
    let mut pool: Vec<Agent> = Vec::new();
    let mut curve = Vec::new();
    let total = curriculum.vs_random_episodes + curriculum.self_play_episodes;
    let (mut loss_sum, mut loss_n) = (0.0f64, 0usize);
    let mut game = GameState::new(derive_seed(seed, 4));
    let mut game_count = 0u64;
    let mut best: Option<(f64, usize, Agent)> = None;

    for ep in 0..total {
        let self_play = ep >= curriculum.vs_random_episodes;
        if self_play && (pool.is_empty() || (ep - curriculum.vs_random_episodes).is_multiple_of(curriculum.snapshot_every)) {
            pool.push(learner.agent.clone());
            if pool.len() > curriculum.pool_size {
                pool.remove(0);
            }
        }
        let ep_seed = derive_seed(seed, 1_000 + ep as u64);
        let mut opponents: Vec<Box<dyn Policy>> = if self_play {
            (0..NUM_PLAYERS - 1)
                .map(|i| {
                    let s = derive_seed(ep_seed, i as u64);
                    if rng.gen_bool(curriculum.random_opponent_rate) {
                        Box::new(RandomPolicy::new(s)) as Box<dyn Policy>
                    } else {
                        let snap = pool.choose(&mut rng).expect("pool is non-empty");
                        snapshot_policy(snap, curriculum.snapshot_epsilon, s)
                    }
                })
                .collect()
        } else {
            random_opponents(ep_seed)
        };
        // Matches follow each other inside 15-point games so roles and the
        // card exchange are part of training.
        if game.is_over() {
            game_count += 1;
            game = GameState::new(derive_seed(seed, 1u64 << 40 | game_count));
        }
        let seat = rng.gen_range(0..NUM_PLAYERS);
        let record = play_seated(&game, &mut learner.agent, seat, &mut opponents)?;
        let episode = record.transitions(seat);
        game.current = record.final_state;
        game.finish_match()?;
        if let Some(loss) = learner.observe(episode)? {
            loss_sum += loss as f64;
            loss_n += 1;
        }
        let done = ep + 1;
        if curriculum.eval_every > 0 && (done % curriculum.eval_every == 0 || done == total) {
            let win_rate = evaluate_vs_random(
                &learner.agent,
                curriculum.eval_matches,
                derive_seed(seed, 0xE0A1),
            )?;
            let point = CurvePoint {
                episodes: done,
                phase: if self_play { "self_play" } else { "vs_random" }.to_string(),
                win_rate,
                mean_loss: if loss_n > 0 { loss_sum / loss_n as f64 } else { f64::NAN },
            };
            if curriculum.keep_best && best.as_ref().is_none_or(|b| win_rate > b.0) {
                best = Some((win_rate, done, learner.agent.clone()));
            }
            progress(&point);
            curve.push(point);
            loss_sum = 0.0;
            loss_n = 0;
        }
    }
    let (agent, episodes) = match best {
        Some((_, episodes, agent)) => (agent, episodes),
        None => (learner.agent, total),
    };
    Ok(TrainOutcome {
        agent,
        curve,
        episodes,
    })
}
