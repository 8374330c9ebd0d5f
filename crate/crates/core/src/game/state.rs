use serde::{Deserialize, Serialize};

use super::action::{action_catalog, move_at, ActionMask, MoveSpec, PASS_INDEX};
use super::card::{build_deck, Card, Hand, HAND_SIZE, NUM_PLAYERS};
use super::GameError;

/// Board face meaning "no discard yet this round".
pub const EMPTY_FACE: u8 = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Chef,
    SousChef,
    Waiter,
    Dishwasher,
}

impl Role {
    /// Roles in finishing order: first finisher becomes Chef.
    pub const BY_FINISH: [Role; 4] = [Role::Chef, Role::SousChef, Role::Waiter, Role::Dishwasher];
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BoardState {
    pub face: u8,
    pub quantity: u8,
    /// Every card discarded in the current round, in play order.
    pub pile: Vec<Card>,
}

impl BoardState {
    pub fn fresh() -> Self {
        Self {
            face: EMPTY_FACE,
            quantity: 0,
            pile: Vec::new(),
        }
    }

    pub fn is_fresh(&self) -> bool {
        self.quantity == 0
    }

    /// The most recent discard set (the tail of the pile).
    pub fn last_set(&self) -> &[Card] {
        &self.pile[self.pile.len() - self.quantity as usize..]
    }
}

impl Default for BoardState {
    fn default() -> Self {
        Self::fresh()
    }
}

/// Authoritative state of one match.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MatchState {
    pub hands: [Hand; NUM_PLAYERS],
    pub board: BoardState,
    /// `None` in the first match of a game.
    pub roles: Option<[Role; NUM_PLAYERS]>,
    pub turn: usize,
    pub passed: [bool; NUM_PLAYERS],
    pub finish_order: Vec<usize>,
    pub rng_seed: u64,
    /// Cards from rounds that have been cleared.
    pub cleared: Vec<Card>,
    pub last_discarder: Option<usize>,
    pub plies: u32,
}

impl MatchState {
    /// Deals a shuffled deck, 17 consecutive cards per seat.
    ///
    /// Seat 0 leads the first match of a game; afterwards the Dishwasher leads.
    pub fn deal(seed: u64, roles: Option<[Role; NUM_PLAYERS]>) -> Self {
        let deck = build_deck(seed);
        let hands = std::array::from_fn(|p| {
            Hand::from_cards(deck[p * HAND_SIZE..(p + 1) * HAND_SIZE].iter().copied())
        });
        let turn = roles
            .and_then(|r| r.iter().position(|&role| role == Role::Dishwasher))
            .unwrap_or(0);
        Self {
            hands,
            board: BoardState::fresh(),
            roles,
            turn,
            passed: [false; NUM_PLAYERS],
            finish_order: Vec::new(),
            rng_seed: seed,
            cleared: Vec::new(),
            last_discarder: None,
            plies: 0,
        }
    }

    pub fn is_over(&self) -> bool {
        self.finish_order.len() >= NUM_PLAYERS - 1
    }

    pub fn is_active(&self, player: usize) -> bool {
        !self.finish_order.contains(&player)
    }

    /// Next seat clockwise from `player` that still holds cards.
    fn next_active(&self, player: usize) -> usize {
        (1..=NUM_PLAYERS)
            .map(|k| (player + k) % NUM_PLAYERS)
            .find(|&p| self.is_active(p))
            .unwrap_or(player)
    }

    /// Whether `mv` obeys the discard rules for this board and hand.
    pub fn permits(&self, player: usize, mv: &MoveSpec) -> bool {
        match mv.face() {
            None => true,
            Some(face) => {
                mv.held_by(&self.hands[player])
                    && face < self.board.face
                    && (self.board.quantity == 0 || mv.set_size() >= self.board.quantity)
            }
        }
    }

    fn check_turn(&self, player: usize) -> Result<(), GameError> {
        if player >= NUM_PLAYERS {
            return Err(GameError::BadPlayer(player));
        }
        if self.is_over() {
            return Err(GameError::MatchOver);
        }
        if !self.is_active(player) {
            return Err(GameError::PlayerFinished(player));
        }
        if player != self.turn {
            return Err(GameError::OutOfTurn {
                player,
                turn: self.turn,
            });
        }
        Ok(())
    }

    pub fn legal_actions(&self, player: usize) -> Result<ActionMask, GameError> {
        self.check_turn(player)?;
        let mut mask = ActionMask::none();
        for (i, mv) in action_catalog().iter().enumerate() {
            if self.permits(player, mv) {
                mask.set(i, true);
            }
        }
        debug_assert!(mask.is_legal(PASS_INDEX));
        Ok(mask)
    }

    /// Pure transition: returns the successor state.
    pub fn apply_action(&self, player: usize, mv: MoveSpec) -> Result<MatchState, GameError> {
        let mut next = self.clone();
        next.step(player, mv)?;
        Ok(next)
    }

    pub fn apply_index(&self, player: usize, index: usize) -> Result<MatchState, GameError> {
        self.apply_action(player, move_at(index)?)
    }

    /// In-place variant of [`MatchState::apply_action`]. On error the state
    /// is left untouched.
    pub fn step(&mut self, player: usize, mv: MoveSpec) -> Result<StepOutcome, GameError> {
        self.check_turn(player)?;
        if mv.index().is_none() || !self.permits(player, &mv) {
            return Err(GameError::IllegalMove {
                player,
                notation: mv.to_string(),
            });
        }
        self.plies += 1;
        let mut outcome = StepOutcome::default();

        if let Some(face) = mv.face() {
            let cards = mv.cards();
            let hand = &mut self.hands[player];
            for &card in &cards {
                hand.remove(card, 1)?;
            }
            self.board.face = face;
            self.board.quantity = mv.set_size();
            self.board.pile.extend(cards);
            self.last_discarder = Some(player);
            self.passed = [false; NUM_PLAYERS];
            if self.hands[player].is_empty() {
                self.finish_order.push(player);
                outcome.finished = true;
                outcome.finish_position = Some(self.finish_order.len());
            }
        } else {
            self.passed[player] = true;
        }

        if self.is_over() {
            outcome.match_over = true;
            // The remaining holder of cards is the only active seat left.
            self.turn = self.next_active(player);
            return Ok(outcome);
        }

        let round_done = (0..NUM_PLAYERS)
            .filter(|&p| self.is_active(p) && Some(p) != self.last_discarder)
            .all(|p| self.passed[p]);
        if mv.is_pass() && round_done {
            let pile = std::mem::take(&mut self.board.pile);
            self.cleared.extend(pile);
            self.board = BoardState::fresh();
            self.passed = [false; NUM_PLAYERS];
            self.turn = match self.last_discarder {
                Some(p) if self.is_active(p) => p,
                Some(p) => self.next_active(p),
                None => self.next_active(player),
            };
            self.last_discarder = None;
            outcome.round_cleared = true;
        } else {
            self.turn = self.next_active(player);
        }
        Ok(outcome)
    }

    /// Every card in the match: hands, current pile and cleared rounds.
    pub fn all_cards(&self) -> Hand {
        let mut all = Hand::new();
        for hand in &self.hands {
            all.merge(hand);
        }
        all.merge(&Hand::from_cards(self.board.pile.iter().copied()));
        all.merge(&Hand::from_cards(self.cleared.iter().copied()));
        all
    }
}

/// What happened as a side effect of one move.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StepOutcome {
    pub finished: bool,
    /// 1-based finishing position when `finished`.
    pub finish_position: Option<usize>,
    pub round_cleared: bool,
    pub match_over: bool,
}
