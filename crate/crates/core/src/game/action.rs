//! The fixed 200-entry action space and the canonical move notation.
//!
//! Ordering: for face `1..=11`, quantity `1..=face`, jokers `0..=2`
//! (innermost) come the 198 face discards, then the lone-joker discard at
//! index 198 and `Pass` at index 199.

use std::fmt;
use std::str::FromStr;
use std::sync::LazyLock;

use serde::{Deserialize, Serialize};

use super::card::{Card, Hand, JOKERS_IN_DECK, MAX_FACE};
use super::GameError;

pub const NUM_ACTIONS: usize = 200;
pub const JOKER_ONLY_INDEX: usize = 198;
pub const PASS_INDEX: usize = 199;

/// Face a lone joker plays as. It only opens a fresh round.
pub const JOKER_ONLY_FACE: u8 = MAX_FACE;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MoveSpec {
    Discard { face: u8, quantity: u8, jokers: u8 },
    JokerOnly { jokers: u8 },
    Pass,
}

impl MoveSpec {
    /// Number of cards put on the board.
    pub fn set_size(&self) -> u8 {
        match *self {
            MoveSpec::Discard {
                quantity, jokers, ..
            } => quantity + jokers,
            MoveSpec::JokerOnly { jokers } => jokers,
            MoveSpec::Pass => 0,
        }
    }

    /// The face the board takes after this move, `None` for `Pass`.
    pub fn face(&self) -> Option<u8> {
        match *self {
            MoveSpec::Discard { face, .. } => Some(face),
            MoveSpec::JokerOnly { .. } => Some(JOKER_ONLY_FACE),
            MoveSpec::Pass => None,
        }
    }

    pub fn jokers(&self) -> u8 {
        match *self {
            MoveSpec::Discard { jokers, .. } | MoveSpec::JokerOnly { jokers } => jokers,
            MoveSpec::Pass => 0,
        }
    }

    pub fn is_pass(&self) -> bool {
        matches!(self, MoveSpec::Pass)
    }

    /// The cards this move removes from the hand, face cards first.
    pub fn cards(&self) -> Vec<Card> {
        let mut out = Vec::with_capacity(self.set_size() as usize);
        if let MoveSpec::Discard { face, quantity, .. } = *self {
            out.extend(std::iter::repeat_n(Card::Face(face), quantity as usize));
        }
        out.extend(std::iter::repeat_n(Card::Joker, self.jokers() as usize));
        out
    }

    /// Whether `hand` holds every card the move needs.
    pub fn held_by(&self, hand: &Hand) -> bool {
        match *self {
            MoveSpec::Discard {
                face,
                quantity,
                jokers,
            } => hand.count(Card::Face(face)) >= quantity && hand.jokers() >= jokers,
            MoveSpec::JokerOnly { jokers } => hand.jokers() >= jokers,
            MoveSpec::Pass => true,
        }
    }

    pub fn index(&self) -> Option<usize> {
        match *self {
            MoveSpec::Pass => Some(PASS_INDEX),
            MoveSpec::JokerOnly { jokers: 1 } => Some(JOKER_ONLY_INDEX),
            MoveSpec::JokerOnly { .. } => None,
            MoveSpec::Discard {
                face,
                quantity,
                jokers,
            } => {
                if !(1..=MAX_FACE).contains(&face)
                    || !(1..=face).contains(&quantity)
                    || jokers > JOKERS_IN_DECK
                {
                    return None;
                }
                // Entries before `face` number 3 * (1 + 2 + ... + (face - 1)).
                let before = 3 * (face as usize - 1) * face as usize / 2;
                Some(before + 3 * (quantity as usize - 1) + jokers as usize)
            }
        }
    }
}

impl fmt::Display for MoveSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            MoveSpec::Discard {
                face,
                quantity,
                jokers,
            } => write!(f, "C{face};Q{quantity};J{jokers}"),
            MoveSpec::JokerOnly { jokers } => write!(f, "C12;Q0;J{jokers}"),
            MoveSpec::Pass => f.write_str("pass"),
        }
    }
}

impl FromStr for MoveSpec {
    type Err = GameError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || GameError::BadNotation(s.to_string());
        if s == "pass" {
            return Ok(MoveSpec::Pass);
        }
        let mut parts = s.split(';');
        let mut field = |prefix: char| -> Result<u8, GameError> {
            parts
                .next()
                .and_then(|p| p.strip_prefix(prefix))
                .and_then(|p| p.parse().ok())
                .ok_or_else(bad)
        };
        let face = field('C')?;
        let quantity = field('Q')?;
        let jokers = field('J')?;
        if parts.next().is_some() {
            return Err(bad());
        }
        let mv = if face == 12 && quantity == 0 {
            MoveSpec::JokerOnly { jokers }
        } else {
            MoveSpec::Discard {
                face,
                quantity,
                jokers,
            }
        };
        // Only catalog moves have a notation.
        mv.index().map(|_| mv).ok_or_else(bad)
    }
}

static CATALOG: LazyLock<Vec<MoveSpec>> = LazyLock::new(|| {
    let mut moves = Vec::with_capacity(NUM_ACTIONS);
    for face in 1..=MAX_FACE {
        for quantity in 1..=face {
            for jokers in 0..=JOKERS_IN_DECK {
                moves.push(MoveSpec::Discard {
                    face,
                    quantity,
                    jokers,
                });
            }
        }
    }
    moves.push(MoveSpec::JokerOnly { jokers: 1 });
    moves.push(MoveSpec::Pass);
    moves
});

/// The ordered action space. Index 199 is `Pass`.
pub fn action_catalog() -> &'static [MoveSpec] {
    &CATALOG
}

pub fn move_at(index: usize) -> Result<MoveSpec, GameError> {
    CATALOG
        .get(index)
        .copied()
        .ok_or(GameError::BadActionIndex(index))
}

/// Legality over the action catalog.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ActionMask([bool; NUM_ACTIONS]);

impl ActionMask {
    pub fn none() -> Self {
        Self([false; NUM_ACTIONS])
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(indices: I) -> Self {
        let mut mask = Self::none();
        for i in indices {
            mask.0[i] = true;
        }
        mask
    }

    pub fn set(&mut self, index: usize, legal: bool) {
        self.0[index] = legal;
    }

    pub fn is_legal(&self, index: usize) -> bool {
        self.0.get(index).copied().unwrap_or(false)
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.0
    }

    pub fn count(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.0.iter().any(|&b| b)
    }

    pub fn legal_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i)
    }
}

impl fmt::Debug for ActionMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.legal_indices()).finish()
    }
}

impl Serialize for ActionMask {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_seq(self.0.iter())
    }
}

impl<'de> Deserialize<'de> for ActionMask {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let bits = Vec::<bool>::deserialize(deserializer)?;
        let arr: [bool; NUM_ACTIONS] = bits.try_into().map_err(|v: Vec<bool>| {
            serde::de::Error::invalid_length(v.len(), &"200 mask entries")
        })?;
        Ok(Self(arr))
    }
}
