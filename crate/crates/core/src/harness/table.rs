//! One human seat against three computer seats, match by match, with
//! optional per-match rivalry-shaped adaptation. Scenario runs and live
//! sessions both drive a `Table`.

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::agents::{Agent, AgentKind, ConfidenceTrace};
use crate::env::{
    base_reward, encode_observation, Choice, Decision, MatchRecord, Observation, PlyRecord, Policy,
    RandomPolicy,
};
use crate::game::{move_at, GameError, GameState, MatchSettlement, MatchState, MATCH_PLY_LIMIT, NUM_PLAYERS};
use crate::rivalry::{shaped_reward, PredictedRivalryReport, ShapingCondition, TraitVector};
use crate::seed::derive_seed;
use crate::traits::{predict_traits, TraitPredictor};

pub const HUMAN_SEAT: usize = 0;

/// A computer seat.
#[derive(Clone, Debug)]
pub enum Opponent {
    Agent(Agent),
    Random(RandomPolicy),
}

impl Opponent {
    pub fn kind(&self) -> AgentKind {
        match self {
            Opponent::Agent(a) => a.kind(),
            Opponent::Random(_) => AgentKind::Random,
        }
    }

    fn policy(&mut self) -> &mut dyn Policy {
        match self {
            Opponent::Agent(a) => a,
            Opponent::Random(r) => r,
        }
    }
}

/// Per-match rivalry-shaped updates of the learning seats.
#[derive(Clone, Debug)]
pub struct Adaptation {
    pub condition: ShapingCondition,
    pub lambda: f64,
    pub learning_rate: f32,
    pub passes: usize,
}

impl Adaptation {
    /// Whether updates run at all. With no condition or a zero weight the
    /// agents stay frozen, so play is identical to an unshaped session.
    pub fn is_active(&self) -> bool {
        self.condition != ShapingCondition::None && self.lambda != 0.0
    }
}

#[derive(Clone, Debug)]
pub struct TableSetup {
    /// Seats 1..=3.
    pub opponents: [Opponent; NUM_PLAYERS - 1],
    /// Trait vector of each agent kind, indexed like `opponents`.
    pub agent_traits: [TraitVector; NUM_PLAYERS - 1],
    pub predictor: Option<TraitPredictor>,
    pub adaptation: Option<Adaptation>,
    pub seed: u64,
}

/// What the table knows about one finished match.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MatchOutcome {
    pub game: usize,
    pub match_index: u32,
    pub settlement: MatchSettlement,
    /// Game totals after this match.
    pub scores: [u32; NUM_PLAYERS],
    pub game_over: bool,
    /// Agent-side predicted rivalry per computer seat (`None` for random
    /// seats or without a predictor).
    pub predicted: [Option<PredictedRivalryReport>; NUM_PLAYERS - 1],
    /// Shaped final reward per adapted seat.
    pub shaped: [Option<f64>; NUM_PLAYERS - 1],
    pub record: MatchRecord,
}

pub struct Table {
    opponents: [Opponent; NUM_PLAYERS - 1],
    agent_traits: [TraitVector; NUM_PLAYERS - 1],
    predictor: Option<TraitPredictor>,
    adaptation: Option<Adaptation>,
    seed: u64,
    game: GameState,
    game_index: usize,
    plies: Vec<PlyRecord>,
    human_moves: Vec<(Observation, usize)>,
    maintain_target: [Option<f64>; NUM_PLAYERS - 1],
    updates: usize,
}

impl Table {
    pub fn game_seed(seed: u64, game: usize) -> u64 {
        derive_seed(seed, 0x6A3E_0000 + game as u64)
    }

    pub fn new(setup: TableSetup) -> Self {
        let TableSetup {
            mut opponents,
            agent_traits,
            predictor,
            adaptation,
            seed,
        } = setup;
        for (i, opp) in opponents.iter_mut().enumerate() {
            let s = derive_seed(seed, i as u64 + 1);
            match opp {
                Opponent::Agent(a) => {
                    a.reseed(s);
                    if let Some(ad) = adaptation.as_ref().filter(|ad| ad.is_active()) {
                        a.set_learning_rate(ad.learning_rate);
                    }
                }
                Opponent::Random(r) => *r = RandomPolicy::new(s),
            }
        }
        Self {
            opponents,
            agent_traits,
            predictor,
            adaptation,
            seed,
            game: GameState::new(Self::game_seed(seed, 0)),
            game_index: 0,
            plies: Vec::new(),
            human_moves: Vec::new(),
            maintain_target: [None; NUM_PLAYERS - 1],
            updates: 0,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn game(&self) -> &GameState {
        &self.game
    }

    pub fn game_index(&self) -> usize {
        self.game_index
    }

    pub fn state(&self) -> &MatchState {
        &self.game.current
    }

    pub fn opponents(&self) -> &[Opponent; NUM_PLAYERS - 1] {
        &self.opponents
    }

    pub fn human_moves(&self) -> &[(Observation, usize)] {
        &self.human_moves
    }

    /// Plies of the match in progress.
    pub fn plies(&self) -> &[PlyRecord] {
        &self.plies
    }

    /// Adaptation updates run so far.
    pub fn updates(&self) -> usize {
        self.updates
    }

    pub fn match_over(&self) -> bool {
        self.game.current.is_over()
    }

    pub fn game_over(&self) -> bool {
        self.game.is_over()
    }

    pub fn human_to_move(&self) -> bool {
        !self.match_over() && self.game.current.turn == HUMAN_SEAT
    }

    fn play(&mut self, player: usize, choice: Choice) -> Result<PlyRecord, GameError> {
        let state = &mut self.game.current;
        if state.plies >= MATCH_PLY_LIMIT {
            return Err(GameError::PlyLimit(MATCH_PLY_LIMIT));
        }
        let mask = state.legal_actions(player)?;
        let obs = encode_observation(state, player);
        if !mask.is_legal(choice.action) {
            return Err(GameError::IllegalMove {
                player,
                notation: move_at(choice.action)?.to_string(),
            });
        }
        let outcome = state.step(player, move_at(choice.action)?)?;
        let ply = PlyRecord {
            player,
            obs,
            mask,
            action: choice.action,
            reward: base_reward(&outcome),
            log_prob: choice.log_prob,
            value: choice.value,
            trace: choice.trace,
            finished: outcome.finished,
        };
        if player == HUMAN_SEAT {
            self.human_moves.push((obs, choice.action));
        }
        self.plies.push(ply.clone());
        Ok(ply)
    }

    /// Applies the human's move. The state is untouched on error.
    pub fn human_action(&mut self, action: usize) -> Result<PlyRecord, GameError> {
        let state = &self.game.current;
        if state.is_over() {
            return Err(GameError::MatchOver);
        }
        if state.turn != HUMAN_SEAT {
            return Err(GameError::OutOfTurn {
                player: HUMAN_SEAT,
                turn: state.turn,
            });
        }
        self.play(HUMAN_SEAT, Choice::plain(action))
    }

    /// Plays computer seats until the human is to move or the match ends.
    pub fn advance_agents(&mut self) -> Result<Vec<PlyRecord>, GameError> {
        let mut out = Vec::new();
        while !self.match_over() && self.game.current.turn != HUMAN_SEAT {
            let player = self.game.current.turn;
            let state = &self.game.current;
            let mask = state.legal_actions(player)?;
            let obs = encode_observation(state, player);
            let choice = self.opponents[player - 1].policy().act(&Decision {
                player,
                obs: &obs,
                mask: &mask,
                hand: &state.hands[player],
                board: &state.board,
            });
            out.push(self.play(player, choice)?);
        }
        Ok(out)
    }

    /// Plays a whole match with `human` choosing for seat 0.
    pub fn play_match_with(&mut self, human: &mut dyn Policy) -> Result<MatchOutcome, HarnessError> {
        loop {
            self.advance_agents()?;
            if self.match_over() {
                break;
            }
            let state = &self.game.current;
            let mask = state.legal_actions(HUMAN_SEAT)?;
            let obs = encode_observation(state, HUMAN_SEAT);
            let choice = human.act(&Decision {
                player: HUMAN_SEAT,
                obs: &obs,
                mask: &mask,
                hand: &state.hands[HUMAN_SEAT],
                board: &state.board,
            });
            self.human_action(choice.action)?;
        }
        self.settle()
    }

    fn predicted_report(
        &self,
        i: usize,
        record: &MatchRecord,
        scores: &[u32; NUM_PLAYERS],
    ) -> Result<Option<PredictedRivalryReport>, HarnessError> {
        let (Some(predictor), Opponent::Agent(_)) = (&self.predictor, &self.opponents[i]) else {
            return Ok(None);
        };
        if self.human_moves.is_empty() {
            return Ok(None);
        }
        let seat = i + 1;
        let trace: ConfidenceTrace = record
            .seat_plies(seat)
            .map(|p| crate::agents::introspective_confidence(p.value.unwrap_or(0.0) as f64))
            .collect();
        if trace.is_empty() {
            return Ok(None);
        }
        let predicted = predict_traits(predictor, &self.human_moves)
            .map_err(|e| HarnessError::Config(e.to_string()))?;
        let report = PredictedRivalryReport::compute(
            predicted.to_array(),
            &self.agent_traits[i],
            &trace,
            scores[seat],
            scores[HUMAN_SEAT],
        )
        .map_err(|e| HarnessError::Config(e.to_string()))?;
        Ok(Some(report))
    }

    /// Settles the finished match: rivalry prediction, adaptation, then the
    /// next deal unless the game is over.
    pub fn settle(&mut self) -> Result<MatchOutcome, HarnessError> {
        let record = MatchRecord {
            plies: std::mem::take(&mut self.plies),
            final_state: self.game.current.clone(),
        };
        let match_index = self.game.match_index;
        let settlement = self.game.finish_match()?;
        let scores = self.game.scores.points;

        let mut predicted = [None; NUM_PLAYERS - 1];
        for (i, slot) in predicted.iter_mut().enumerate() {
            *slot = self.predicted_report(i, &record, &scores)?;
        }
        let mut shaped = [None; NUM_PLAYERS - 1];
        if let Some(ad) = self.adaptation.clone().filter(|a| a.is_active()) {
            for i in 0..NUM_PLAYERS - 1 {
                let (Opponent::Agent(agent), Some(report)) = (&mut self.opponents[i], predicted[i])
                else {
                    continue;
                };
                let mut episode = record.transitions(i + 1);
                let Some(last) = episode.last_mut() else { continue };
                let target = *self.maintain_target[i].get_or_insert(report.rivalry);
                let r = shaped_reward(last.reward as f64, ad.condition, report.rivalry, ad.lambda, target);
                last.reward = r as f32;
                shaped[i] = Some(r);
                agent.adapt(&episode, ad.passes)?;
                self.updates += 1;
            }
        }
        Ok(MatchOutcome {
            game: self.game_index,
            match_index,
            settlement,
            scores,
            game_over: self.game.is_over(),
            predicted,
            shaped,
            record,
        })
    }

    /// Starts the next 15-point game.
    pub fn new_game(&mut self) {
        self.game_index += 1;
        self.game = GameState::new(Self::game_seed(self.seed, self.game_index));
        self.plies.clear();
    }
}
