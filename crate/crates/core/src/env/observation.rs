use serde::{Deserialize, Serialize};

use crate::game::{Card, MatchState, HAND_SIZE};

pub const HAND_SLOTS: usize = HAND_SIZE;
pub const BOARD_SLOTS: usize = 11;
pub const OBS_DIM: usize = HAND_SLOTS + BOARD_SLOTS;
/// Card values are divided by this, so a joker (12) encodes below 1.
pub const VALUE_SCALE: f32 = 13.0;

/// Hand slots (descending values) followed by the latest discard set.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "Vec<f32>", try_from = "Vec<f32>")]
pub struct Observation(pub [f32; OBS_DIM]);

impl Observation {
    pub fn zeros() -> Self {
        Self([0.0; OBS_DIM])
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.0
    }
}

impl From<Observation> for Vec<f32> {
    fn from(obs: Observation) -> Self {
        obs.0.to_vec()
    }
}

impl TryFrom<Vec<f32>> for Observation {
    type Error = String;

    fn try_from(v: Vec<f32>) -> Result<Self, Self::Error> {
        let len = v.len();
        v.try_into()
            .map(Observation)
            .map_err(|_| format!("observation needs {OBS_DIM} values, got {len}"))
    }
}

fn encode_into(slots: &mut [f32], cards: &mut [Card]) {
    cards.sort_unstable_by(|a, b| b.value().cmp(&a.value()));
    for (slot, card) in slots.iter_mut().zip(cards.iter()) {
        *slot = card.value() as f32 / VALUE_SCALE;
    }
}

/// Encodes `player`'s hand and the most recent discard set on the board.
/// Sets larger than the board slots are truncated after sorting.
pub fn encode_observation(state: &MatchState, player: usize) -> Observation {
    let mut obs = Observation::zeros();
    let mut hand = state.hands[player].cards_desc();
    encode_into(&mut obs.0[..HAND_SLOTS], &mut hand);
    let mut board = state.board.last_set().to_vec();
    encode_into(&mut obs.0[HAND_SLOTS..], &mut board);
    obs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{BoardState, Hand, MoveSpec};

    #[test]
    fn empty_hand_and_board_is_zero() {
        let mut s = MatchState::deal(0, None);
        s.hands[2] = Hand::new();
        assert_eq!(encode_observation(&s, 2), Observation::zeros());
    }

    #[test]
    fn full_hand_of_elevens() {
        let mut s = MatchState::deal(0, None);
        s.hands[0] = Hand::from_cards(std::iter::repeat_n(Card::Face(11), 17));
        let obs = encode_observation(&s, 0);
        assert!(obs.0[..17].iter().all(|&x| x == 11.0 / 13.0));
        assert!(obs.0[17..].iter().all(|&x| x == 0.0));
    }

    #[test]
    fn board_shows_only_latest_set() {
        let mut s = MatchState::deal(0, None);
        s.board = BoardState {
            face: 4,
            quantity: 2,
            pile: vec![Card::Face(9), Card::Face(4), Card::Joker],
        };
        let obs = encode_observation(&s, 0);
        assert_eq!(obs.0[17], 12.0 / 13.0);
        assert_eq!(obs.0[18], 4.0 / 13.0);
        assert_eq!(obs.0[19], 0.0);
    }

    #[test]
    fn entries_bounded_along_a_match() {
        let mut s = MatchState::deal(3, None);
        while !s.is_over() {
            let p = s.turn;
            let obs = encode_observation(&s, p);
            assert!(obs.0.iter().all(|&x| (0.0..=1.0).contains(&x)));
            let mask = s.legal_actions(p).unwrap();
            let idx = mask.legal_indices().next().unwrap();
            s = s.apply_index(p, idx).unwrap();
        }
        let _ = MoveSpec::Pass;
    }
}
