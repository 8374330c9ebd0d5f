//! Rivalry between a human and an agent, scored from the human's
//! questionnaire answers and from the agent's own prediction, plus the
//! rivalry-shaped reward used for online adaptation.
//!
//! Human side: `S_a` is the Euclidean distance between self-assessed and
//! agent-assessed traits, `P_a = (points_h - points_a) / 15` and
//! `R_a = (S_a + C_h + P_a) / 3`. Agent side: `S_h` uses predicted human
//! traits, `C_a` is the mean introspective confidence of the agent's actions
//! and `P_h` swaps the points; `R_h` is again the three-term mean.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agents::{AgentKind, ConfidenceTrace};
use crate::game::WINNING_POINTS;

/// Upper end of every questionnaire scale.
pub const SCALE_MAX: f64 = 5.0;
/// Largest possible trait distance, `sqrt(3 * 5^2)`.
pub const MAX_SIMILARITY: f64 = 8.660_254_037_844_386;
pub const DEFAULT_LAMBDA: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RivalryError {
    #[error("{name} = {value} is outside [0, 5]")]
    OutOfRange { name: &'static str, value: f64 },
    #[error("confidence trace is empty")]
    EmptyTrace,
}

fn check(name: &'static str, value: f64) -> Result<f64, RivalryError> {
    if (0.0..=SCALE_MAX).contains(&value) {
        Ok(value)
    } else {
        Err(RivalryError::OutOfRange { name, value })
    }
}

/// Agency, competence and communion on the 0-5 questionnaire scale.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct TraitVector {
    agency: f64,
    competence: f64,
    communion: f64,
}

impl TraitVector {
    pub fn new(agency: f64, competence: f64, communion: f64) -> Result<Self, RivalryError> {
        Ok(Self {
            agency: check("agency", agency)?,
            competence: check("competence", competence)?,
            communion: check("communion", communion)?,
        })
    }

    /// Clamps each component into the scale (NaN becomes 0).
    pub fn clamped(raw: [f64; 3]) -> Self {
        let c = |x: f64| if x.is_nan() { 0.0 } else { x.clamp(0.0, SCALE_MAX) };
        Self {
            agency: c(raw[0]),
            competence: c(raw[1]),
            communion: c(raw[2]),
        }
    }

    pub fn agency(&self) -> f64 {
        self.agency
    }

    pub fn competence(&self) -> f64 {
        self.competence
    }

    pub fn communion(&self) -> f64 {
        self.communion
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.agency, self.competence, self.communion]
    }
}

impl TryFrom<[f64; 3]> for TraitVector {
    type Error = RivalryError;

    fn try_from(v: [f64; 3]) -> Result<Self, Self::Error> {
        Self::new(v[0], v[1], v[2])
    }
}

impl From<TraitVector> for [f64; 3] {
    fn from(t: TraitVector) -> Self {
        t.to_array()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HumanProfile {
    pub traits: TraitVector,
    competitiveness: f64,
}

impl HumanProfile {
    pub fn new(traits: TraitVector, competitiveness: f64) -> Result<Self, RivalryError> {
        Ok(Self {
            traits,
            competitiveness: check("competitiveness", competitiveness)?,
        })
    }

    pub fn competitiveness(&self) -> f64 {
        self.competitiveness
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgentProfile {
    pub kind: AgentKind,
    pub traits: TraitVector,
}

/// Euclidean distance between two trait vectors. Larger means less alike.
pub fn similarity(human: &TraitVector, agent: &TraitVector) -> f64 {
    let d = [
        human.agency - agent.agency,
        human.competence - agent.competence,
        human.communion - agent.communion,
    ];
    (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
}

/// Trait distance from the agent's side; the prediction is clamped first.
pub fn predicted_similarity(predicted: [f64; 3], agent: &TraitVector) -> f64 {
    similarity(&TraitVector::clamped(predicted), agent)
}

/// `(points_self - points_other) / 15`, clamped to `[-1, 1]` since a final
/// match can push a total past 15.
pub fn relative_performance(points_self: u32, points_other: u32) -> f64 {
    ((points_self as f64 - points_other as f64) / WINNING_POINTS as f64).clamp(-1.0, 1.0)
}

/// The three-term mean.
pub fn rivalry_score(similarity: f64, competitiveness: f64, performance: f64) -> f64 {
    (similarity + competitiveness + performance) / 3.0
}

/// Mean introspective confidence over the agent's actions.
pub fn aggregate_confidence(trace: &ConfidenceTrace) -> Result<f64, RivalryError> {
    if trace.is_empty() {
        return Err(RivalryError::EmptyTrace);
    }
    Ok(trace.values().iter().sum::<f64>() / trace.total_actions() as f64)
}

pub fn predicted_rivalry(similarity: f64, confidence: f64, performance: f64) -> f64 {
    rivalry_score(similarity, confidence, performance)
}

/// How the three components are put on a common footing before averaging.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RivalryScale {
    /// Components averaged as they are.
    #[default]
    Verbatim,
    /// Similarity over its maximum, competitiveness over 5 and performance
    /// mapped from `[-1, 1]` to `[0, 1]` before averaging.
    Normalized,
}

/// Human-perspective rivalry toward one agent.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RivalryReport {
    pub similarity: f64,
    pub competitiveness: f64,
    pub relative_performance: f64,
    pub rivalry: f64,
}

impl RivalryReport {
    pub fn compute(
        human: &HumanProfile,
        assessed_agent: &TraitVector,
        points_human: u32,
        points_agent: u32,
        scale: RivalryScale,
    ) -> Self {
        let s = similarity(&human.traits, assessed_agent);
        let c = human.competitiveness;
        let p = relative_performance(points_human, points_agent);
        let rivalry = match scale {
            RivalryScale::Verbatim => rivalry_score(s, c, p),
            RivalryScale::Normalized => {
                rivalry_score(s / MAX_SIMILARITY, c / SCALE_MAX, (p + 1.0) / 2.0)
            }
        };
        Self {
            similarity: s,
            competitiveness: c,
            relative_performance: p,
            rivalry,
        }
    }
}

/// Agent-perspective rivalry toward the human.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictedRivalryReport {
    pub predicted_similarity: f64,
    pub confidence: f64,
    pub relative_performance: f64,
    pub rivalry: f64,
}

impl PredictedRivalryReport {
    pub fn compute(
        predicted_human: [f64; 3],
        agent: &TraitVector,
        trace: &ConfidenceTrace,
        points_agent: u32,
        points_human: u32,
    ) -> Result<Self, RivalryError> {
        let s = predicted_similarity(predicted_human, agent);
        let c = aggregate_confidence(trace)?;
        let p = relative_performance(points_agent, points_human);
        Ok(Self {
            predicted_similarity: s,
            confidence: c,
            relative_performance: p,
            rivalry: predicted_rivalry(s, c, p),
        })
    }
}

/// Reward-shaping condition of the online-adaptation experiment.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShapingCondition {
    Increase,
    Decrease,
    Maintain,
    #[default]
    None,
}

impl ShapingCondition {
    pub const ACTIVE: [ShapingCondition; 3] = [
        ShapingCondition::Increase,
        ShapingCondition::Decrease,
        ShapingCondition::Maintain,
    ];
}

impl fmt::Display for ShapingCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ShapingCondition::Increase => "increase",
            ShapingCondition::Decrease => "decrease",
            ShapingCondition::Maintain => "maintain",
            ShapingCondition::None => "none",
        })
    }
}

impl FromStr for ShapingCondition {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "increase" => Ok(Self::Increase),
            "decrease" => Ok(Self::Decrease),
            "maintain" => Ok(Self::Maintain),
            "none" => Ok(Self::None),
            other => Err(format!("unknown condition {other:?}")),
        }
    }
}

/// Reward of a match's final action under a shaping condition:
/// `base + lambda * R`, `base - lambda * R` or `base - lambda * |R - target|`.
/// Intermediate actions keep their base reward.
pub fn shaped_reward(
    base: f64,
    condition: ShapingCondition,
    predicted_rivalry: f64,
    lambda: f64,
    target: f64,
) -> f64 {
    match condition {
        ShapingCondition::Increase => base + lambda * predicted_rivalry,
        ShapingCondition::Decrease => base - lambda * predicted_rivalry,
        ShapingCondition::Maintain => base - lambda * (predicted_rivalry - target).abs(),
        ShapingCondition::None => base,
    }
}
