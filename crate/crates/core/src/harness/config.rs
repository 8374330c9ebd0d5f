//! Experiment configuration, stored as TOML with a schema version.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::train::CurriculumConfig;
use super::HarnessError;
use crate::agents::{AgentKind, DqnConfig, PpoConfig};
use crate::game::NUM_PLAYERS;
use crate::rivalry::{RivalryScale, ShapingCondition, TraitVector, DEFAULT_LAMBDA};
use crate::traits::{Archetype, PredictorConfig};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeatKind {
    Human,
    Dql,
    Ppo,
    Random,
}

impl SeatKind {
    pub fn agent_kind(self) -> Option<AgentKind> {
        match self {
            SeatKind::Human => None,
            SeatKind::Dql => Some(AgentKind::Dql),
            SeatKind::Ppo => Some(AgentKind::Ppo),
            SeatKind::Random => Some(AgentKind::Random),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CheckpointPaths {
    pub dql: PathBuf,
    pub ppo: PathBuf,
    pub predictor: PathBuf,
}

impl Default for CheckpointPaths {
    fn default() -> Self {
        Self {
            dql: "checkpoints/dql.ckpt".into(),
            ppo: "checkpoints/ppo.ckpt".into(),
            predictor: "checkpoints/traits.ckpt".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ShapingConfig {
    pub condition: ShapingCondition,
    pub lambda: f64,
    /// Learning rate of the per-match updates.
    pub adapt_learning_rate: f32,
    /// Update sweeps over each finished match.
    pub adapt_passes: usize,
    pub rivalry_scale: RivalryScale,
}

impl Default for ShapingConfig {
    fn default() -> Self {
        Self {
            condition: ShapingCondition::Increase,
            lambda: DEFAULT_LAMBDA,
            adapt_learning_rate: 1e-4,
            adapt_passes: 1,
            rivalry_scale: RivalryScale::Verbatim,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Scenario1Config {
    pub games: usize,
    pub archetype: Archetype,
}

impl Default for Scenario1Config {
    fn default() -> Self {
        Self {
            games: 20,
            archetype: Archetype::Aggressive,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Scenario2Config {
    pub seeds: usize,
    pub matches: usize,
    pub archetype: Archetype,
}

impl Default for Scenario2Config {
    fn default() -> Self {
        Self {
            seeds: 10,
            matches: 30,
            archetype: Archetype::Aggressive,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TournamentConfig {
    pub games: usize,
    /// Seat kinds; seating rotates every game.
    pub lineup: [SeatKind; NUM_PLAYERS],
}

impl Default for TournamentConfig {
    fn default() -> Self {
        Self {
            games: 100,
            lineup: [SeatKind::Dql, SeatKind::Ppo, SeatKind::Random, SeatKind::Random],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TracesConfig {
    pub games: usize,
}

impl Default for TracesConfig {
    fn default() -> Self {
        Self { games: 7 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DatasetConfig {
    /// Synthetic-human matches recorded per archetype.
    pub matches_per_archetype: usize,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        Self {
            matches_per_archetype: 150,
        }
    }
}

/// Trait vectors attached to each agent kind. Placeholders until real
/// questionnaire data exists; the defaults are mean scripted assessments
/// from a scenario1 run against the shipped checkpoints.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AgentTraits {
    pub dql: TraitVector,
    pub ppo: TraitVector,
    pub random: TraitVector,
}

impl AgentTraits {
    pub fn get(&self, kind: AgentKind) -> TraitVector {
        match kind {
            AgentKind::Dql => self.dql,
            AgentKind::Ppo => self.ppo,
            AgentKind::Random => self.random,
        }
    }
}

impl Default for AgentTraits {
    fn default() -> Self {
        let t = |a, b, c| TraitVector::new(a, b, c).expect("on the scale");
        Self {
            dql: t(1.93, 2.83, 3.28),
            ppo: t(2.24, 4.07, 3.11),
            random: t(1.99, 1.09, 3.98),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub seats: [SeatKind; NUM_PLAYERS],
    pub checkpoints: CheckpointPaths,
    pub curriculum: CurriculumConfig,
    pub dqn: DqnConfig,
    pub ppo: PpoConfig,
    pub shaping: ShapingConfig,
    pub scenario1: Scenario1Config,
    pub scenario2: Scenario2Config,
    pub tournament: TournamentConfig,
    pub traces: TracesConfig,
    pub dataset: DatasetConfig,
    pub predictor: PredictorConfig,
    pub agent_traits: AgentTraits,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            seed: 7,
            out_dir: "runs".into(),
            seats: [SeatKind::Human, SeatKind::Dql, SeatKind::Ppo, SeatKind::Random],
            checkpoints: CheckpointPaths::default(),
            curriculum: CurriculumConfig::default(),
            dqn: DqnConfig::default(),
            ppo: PpoConfig::default(),
            shaping: ShapingConfig::default(),
            scenario1: Scenario1Config::default(),
            scenario2: Scenario2Config::default(),
            tournament: TournamentConfig::default(),
            traces: TracesConfig::default(),
            dataset: DatasetConfig::default(),
            predictor: PredictorConfig::default(),
            agent_traits: AgentTraits::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::Config(m));
        if self.schema_version != SCHEMA_VERSION {
            return bad(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            ));
        }
        if self.seats[0] != SeatKind::Human {
            return bad("seat 0 must be the human".into());
        }
        if self.seats[1..].contains(&SeatKind::Human) {
            return bad("only seat 0 may be human".into());
        }
        if self.tournament.lineup.contains(&SeatKind::Human) {
            return bad("tournament lineup cannot contain a human".into());
        }
        if !(self.shaping.lambda >= 0.0) {
            return bad(format!("lambda must be non-negative, got {}", self.shaping.lambda));
        }
        if self.curriculum.self_play_episodes > 0 && self.curriculum.pool_size == 0 {
            return bad("self-play needs a snapshot pool of at least one".into());
        }
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        let config: Self = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    /// Resolves a relative path against `base` (typically the config's directory).
    pub fn rebase(&mut self, base: &Path) {
        for p in [
            &mut self.out_dir,
            &mut self.checkpoints.dql,
            &mut self.checkpoints.ppo,
            &mut self.checkpoints.predictor,
        ] {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
    }
}

impl FromStr for ExperimentConfig {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::from_toml(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_toml() {
        let config = ExperimentConfig::default();
        let text = config.to_toml();
        assert!(text.contains("schema_version = 1"));
        assert_eq!(ExperimentConfig::from_toml(&text).unwrap(), config);
    }

    #[test]
    fn partial_files_take_defaults() {
        let c = ExperimentConfig::from_toml("seed = 3\n[shaping]\ncondition = \"decrease\"\n").unwrap();
        assert_eq!(c.seed, 3);
        assert_eq!(c.shaping.condition, ShapingCondition::Decrease);
        assert_eq!(c.shaping.lambda, DEFAULT_LAMBDA);
    }

    #[test]
    fn invalid_configs_rejected() {
        assert!(ExperimentConfig::from_toml("schema_version = 2").is_err());
        assert!(ExperimentConfig::from_toml("seats = [\"dql\", \"human\", \"ppo\", \"random\"]").is_err());
        assert!(ExperimentConfig::from_toml("seats = [\"human\", \"dql\", \"ppo\"]").is_err());
        assert!(ExperimentConfig::from_toml("[shaping]\ncondition = \"more\"").is_err());
        assert!(ExperimentConfig::from_toml("[shaping]\nlambda = -1.0").is_err());
        assert!(ExperimentConfig::from_toml("[agent_traits]\ndql = [6.0, 1.0, 1.0]").is_err());
    }
}
