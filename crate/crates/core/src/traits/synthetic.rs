use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::TraitError;
use crate::env::{Choice, Decision, PlyRecord, Policy};
use crate::game::{move_at, MATCH_POINTS, PASS_INDEX};
use crate::rivalry::{HumanProfile, TraitVector, SCALE_MAX};

/// Scripted stand-ins for study participants. Their trait labels are
/// configuration constants, not measurements.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Archetype {
    /// Dumps the largest legal set.
    Aggressive,
    /// Plays the smallest legal set without jokers, holding jokers back.
    Conservative,
    /// Uniform over legal moves.
    Erratic,
}

impl Archetype {
    pub const ALL: [Archetype; 3] = [Archetype::Aggressive, Archetype::Conservative, Archetype::Erratic];

    pub fn label(self) -> TraitVector {
        let [a, c, m] = match self {
            Archetype::Aggressive => [4.5, 4.0, 1.5],
            Archetype::Conservative => [2.0, 3.5, 4.0],
            Archetype::Erratic => [2.5, 2.0, 2.5],
        };
        TraitVector::new(a, c, m).expect("labels are on the scale")
    }

    pub fn competitiveness(self) -> f64 {
        match self {
            Archetype::Aggressive => 4.5,
            Archetype::Conservative => 2.0,
            Archetype::Erratic => 3.0,
        }
    }

    /// What the archetype answers on the pre-game questionnaire.
    pub fn profile(self) -> HumanProfile {
        HumanProfile::new(self.label(), self.competitiveness()).expect("on the scale")
    }
}

impl fmt::Display for Archetype {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Archetype::Aggressive => "aggressive",
            Archetype::Conservative => "conservative",
            Archetype::Erratic => "erratic",
        })
    }
}

impl FromStr for Archetype {
    type Err = TraitError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "aggressive" => Ok(Archetype::Aggressive),
            "conservative" => Ok(Archetype::Conservative),
            "erratic" => Ok(Archetype::Erratic),
            other => Err(TraitError::UnknownArchetype(other.to_string())),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SyntheticHuman {
    pub archetype: Archetype,
    rng: ChaCha8Rng,
}

impl SyntheticHuman {
    pub fn new(archetype: Archetype, seed: u64) -> Self {
        Self {
            archetype,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// The chosen catalog index for a legal mask. Ties break at random.
    pub fn choose(&mut self, decision: &Decision<'_>) -> usize {
        let discards: Vec<(usize, u8, u8)> = decision
            .mask
            .legal_indices()
            .filter(|&i| i != PASS_INDEX)
            .map(|i| {
                let mv = move_at(i).expect("catalog index");
                (i, mv.set_size(), mv.jokers())
            })
            .collect();
        let pick = |cands: Vec<usize>, rng: &mut ChaCha8Rng| {
            cands.choose(rng).copied().unwrap_or(PASS_INDEX)
        };
        match self.archetype {
            Archetype::Erratic => {
                let all: Vec<usize> = decision.mask.legal_indices().collect();
                pick(all, &mut self.rng)
            }
            Archetype::Aggressive => {
                let best = discards.iter().map(|d| d.1).max();
                let cands = discards.iter().filter(|d| Some(d.1) == best).map(|d| d.0).collect();
                pick(cands, &mut self.rng)
            }
            Archetype::Conservative => {
                let plain: Vec<_> = discards.iter().filter(|d| d.2 == 0).collect();
                // With nothing but jokers left they have to go eventually.
                let only_jokers = decision.hand.len() == decision.hand.jokers() as usize;
                let pool: Vec<_> = if plain.is_empty() && only_jokers {
                    discards.iter().collect()
                } else {
                    plain
                };
                let least = pool.iter().map(|d| d.1).min();
                let cands = pool.iter().filter(|d| Some(d.1) == least).map(|d| d.0).collect();
                pick(cands, &mut self.rng)
            }
        }
    }
}

impl Policy for SyntheticHuman {
    fn act(&mut self, decision: &Decision<'_>) -> Choice {
        Choice::plain(self.choose(decision))
    }

    fn name(&self) -> &str {
        match self.archetype {
            Archetype::Aggressive => "aggressive",
            Archetype::Conservative => "conservative",
            Archetype::Erratic => "erratic",
        }
    }
}

/// A seeded synthetic human and its trait label.
pub fn synthetic_human(archetype: &str, seed: u64) -> Result<(SyntheticHuman, TraitVector), TraitError> {
    let a: Archetype = archetype.parse()?;
    Ok((SyntheticHuman::new(a, seed), a.label()))
}

/// Scripted post-game assessment of one opponent from its observed moves:
/// agency is the share of turns it discarded, competence its points per
/// match relative to the maximum, communion how small its sets were.
pub fn assess_agent(plies: &[&PlyRecord], points: u32, matches: u32) -> TraitVector {
    if plies.is_empty() || matches == 0 {
        return TraitVector::clamped([SCALE_MAX / 2.0; 3]);
    }
    let n = plies.len() as f64;
    let discards: Vec<u8> = plies
        .iter()
        .filter(|p| p.action != PASS_INDEX)
        .map(|p| move_at(p.action).map_or(0, |m| m.set_size()))
        .collect();
    let agency = SCALE_MAX * discards.len() as f64 / n;
    let competence = SCALE_MAX * points as f64 / (matches as f64 * MATCH_POINTS[0] as f64);
    let mean_size = if discards.is_empty() {
        0.0
    } else {
        discards.iter().map(|&s| s as f64).sum::<f64>() / discards.len() as f64
    };
    let communion = SCALE_MAX * (1.0 - (mean_size - 1.0).max(0.0) / 3.0);
    TraitVector::clamped([agency, competence, communion])
}
