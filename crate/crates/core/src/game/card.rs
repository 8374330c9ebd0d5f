use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::GameError;

/// Highest face value in the deck.
pub const MAX_FACE: u8 = 11;
/// Number of jokers in the deck.
pub const JOKERS_IN_DECK: u8 = 2;
/// Cards dealt to every player at the start of a match.
pub const HAND_SIZE: usize = 17;
pub const NUM_PLAYERS: usize = 4;
pub const DECK_SIZE: usize = HAND_SIZE * NUM_PLAYERS;

/// Slot used for jokers in [`Hand`] counts.
const JOKER_SLOT: usize = MAX_FACE as usize;

/// A single ingredient card. Face `v` appears `v` times in the deck.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Card {
    Face(u8),
    Joker,
}

impl Card {
    /// Numeric value used for ordering and encoding. Jokers rank as 12.
    pub fn value(self) -> u8 {
        match self {
            Card::Face(v) => v,
            Card::Joker => MAX_FACE + 1,
        }
    }

    fn slot(self) -> usize {
        match self {
            Card::Face(v) => (v - 1) as usize,
            Card::Joker => JOKER_SLOT,
        }
    }
}

impl TryFrom<u8> for Card {
    type Error = GameError;

    fn try_from(value: u8) -> Result<Self, Self::Error> {
        match value {
            1..=MAX_FACE => Ok(Card::Face(value)),
            12 => Ok(Card::Joker),
            other => Err(GameError::InvalidCard(other)),
        }
    }
}

impl From<Card> for u8 {
    fn from(card: Card) -> u8 {
        card.value()
    }
}

impl fmt::Display for Card {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Card::Face(v) => write!(f, "{v}"),
            Card::Joker => f.write_str("J"),
        }
    }
}

/// The full 68-card multiset in canonical (unshuffled) order.
pub fn full_deck() -> Vec<Card> {
    let mut deck = Vec::with_capacity(DECK_SIZE);
    for v in 1..=MAX_FACE {
        deck.extend(std::iter::repeat_n(Card::Face(v), v as usize));
    }
    deck.extend(std::iter::repeat_n(Card::Joker, JOKERS_IN_DECK as usize));
    deck
}

/// Shuffled deck; the order is a pure function of `seed`.
pub fn build_deck(seed: u64) -> Vec<Card> {
    let mut deck = full_deck();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    deck.shuffle(&mut rng);
    deck
}

/// A multiset of cards stored as per-kind counts.
///
/// Equality is multiset equality, so two hands built from permutations of
/// the same cards compare equal.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Card>", into = "Vec<Card>")]
pub struct Hand {
    counts: [u8; MAX_FACE as usize + 1],
}

impl Hand {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_cards<I: IntoIterator<Item = Card>>(cards: I) -> Self {
        let mut hand = Self::new();
        for card in cards {
            hand.add(card, 1);
        }
        hand
    }

    pub fn count(&self, card: Card) -> u8 {
        self.counts[card.slot()]
    }

    pub fn jokers(&self) -> u8 {
        self.counts[JOKER_SLOT]
    }

    pub fn len(&self) -> usize {
        self.counts.iter().map(|&c| c as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.iter().all(|&c| c == 0)
    }

    pub fn add(&mut self, card: Card, n: u8) {
        self.counts[card.slot()] += n;
    }

    /// Removes `n` copies of `card`, failing without modification if the hand
    /// holds fewer.
    pub fn remove(&mut self, card: Card, n: u8) -> Result<(), GameError> {
        let slot = &mut self.counts[card.slot()];
        if *slot < n {
            return Err(GameError::MissingCards);
        }
        *slot -= n;
        Ok(())
    }

    pub fn merge(&mut self, other: &Hand) {
        for (a, b) in self.counts.iter_mut().zip(other.counts.iter()) {
            *a += b;
        }
    }

    /// Cards sorted by descending value (jokers first).
    pub fn cards_desc(&self) -> Vec<Card> {
        let mut out = Vec::with_capacity(self.len());
        for _ in 0..self.jokers() {
            out.push(Card::Joker);
        }
        for v in (1..=MAX_FACE).rev() {
            for _ in 0..self.count(Card::Face(v)) {
                out.push(Card::Face(v));
            }
        }
        out
    }

    /// Cards sorted by ascending value.
    pub fn cards(&self) -> Vec<Card> {
        let mut cards = self.cards_desc();
        cards.reverse();
        cards
    }
}

impl TryFrom<Vec<Card>> for Hand {
    type Error = GameError;

    fn try_from(cards: Vec<Card>) -> Result<Self, Self::Error> {
        Ok(Hand::from_cards(cards))
    }
}

impl From<Hand> for Vec<Card> {
    fn from(hand: Hand) -> Vec<Card> {
        hand.cards()
    }
}
