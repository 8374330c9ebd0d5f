use serde::{Deserialize, Serialize};

use super::card::{Card, Hand, NUM_PLAYERS};
use super::state::{MatchState, Role};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CardTransfer {
    pub from: usize,
    pub to: usize,
    pub cards: Vec<Card>,
}

/// The role-based card swap done after the deal of every match but the first.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exchange {
    pub transfers: Vec<CardTransfer>,
}

fn seat_of(roles: &[Role; NUM_PLAYERS], role: Role) -> usize {
    roles.iter().position(|&r| r == role).expect("roles form a bijection")
}

fn highest(hand: &Hand, n: usize) -> Vec<Card> {
    hand.cards_desc().into_iter().take(n).collect()
}

fn lowest(hand: &Hand, n: usize) -> Vec<Card> {
    hand.cards().into_iter().take(n).collect()
}

fn transfer(state: &mut MatchState, from: usize, to: usize, cards: Vec<Card>) -> CardTransfer {
    for &card in &cards {
        state.hands[from]
            .remove(card, 1)
            .expect("transfer cards are drawn from the giver's hand");
        state.hands[to].add(card, 1);
    }
    CardTransfer { from, to, cards }
}

impl Exchange {
    /// Dishwasher sends its two highest cards to the Chef and the Waiter its
    /// highest to the Sous-Chef; then the Chef returns its two lowest and the
    /// Sous-Chef its lowest. Jokers rank highest.
    pub fn perform(state: &MatchState) -> (MatchState, Exchange) {
        let Some(roles) = state.roles else {
            return (state.clone(), Exchange::default());
        };
        let chef = seat_of(&roles, Role::Chef);
        let sous = seat_of(&roles, Role::SousChef);
        let waiter = seat_of(&roles, Role::Waiter);
        let dish = seat_of(&roles, Role::Dishwasher);

        let mut next = state.clone();
        let mut transfers = Vec::with_capacity(4);
        let up = highest(&next.hands[dish], 2);
        transfers.push(transfer(&mut next, dish, chef, up));
        let up = highest(&next.hands[waiter], 1);
        transfers.push(transfer(&mut next, waiter, sous, up));
        let down = lowest(&next.hands[chef], 2);
        transfers.push(transfer(&mut next, chef, dish, down));
        let down = lowest(&next.hands[sous], 1);
        transfers.push(transfer(&mut next, sous, waiter, down));
        (next, Exchange { transfers })
    }

    /// Re-applies a recorded exchange.
    pub fn apply(&self, state: &MatchState) -> Option<MatchState> {
        let mut next = state.clone();
        for t in &self.transfers {
            for &card in &t.cards {
                next.hands[t.from].remove(card, 1).ok()?;
                next.hands[t.to].add(card, 1);
            }
        }
        Some(next)
    }
}

/// Returns the post-exchange state; the first match of a game (no roles)
/// is returned unchanged.
pub fn exchange_cards(state: &MatchState) -> MatchState {
    Exchange::perform(state).0
}
