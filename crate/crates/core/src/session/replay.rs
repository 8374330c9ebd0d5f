//! Re-derives a session's game purely from its logged seed and actions.

use super::events::{EventPayload, SessionEvent};
use super::SessionError;
use crate::game::{GameState, MatchState, MoveSpec, ScoreBoard};
use crate::harness::Table;

#[derive(Clone, Debug, PartialEq)]
pub struct Replayed {
    pub scores: ScoreBoard,
    pub state: MatchState,
    pub game: GameState,
}

pub fn replay(events: &[SessionEvent]) -> Result<Replayed, SessionError> {
    if events.is_empty() {
        return Err(SessionError::EmptyLog);
    }
    for (i, e) in events.iter().enumerate() {
        if e.seq != i as u64 + 1 {
            return Err(SessionError::CorruptLog {
                seq: e.seq,
                reason: format!("expected sequence number {}", i + 1),
            });
        }
    }
    let EventPayload::SessionCreated {
        table_seed: Some(seed),
        ..
    } = events[0].payload
    else {
        return Err(SessionError::CorruptLog {
            seq: 1,
            reason: "log does not start with a seeded session_created".into(),
        });
    };
    let mut game = GameState::new(Table::game_seed(seed, 0));
    for e in &events[1..] {
        let corrupt = |reason: String| SessionError::CorruptLog { seq: e.seq, reason };
        match &e.payload {
            EventPayload::SessionCreated { .. } => return Err(corrupt("second session_created".into())),
            EventPayload::Deal {
                match_index,
                match_seed,
                roles,
                hands,
            } => {
                let expected_seed = GameState::match_seed(game.seed, game.match_index);
                if *match_index != game.match_index || *match_seed != Some(expected_seed) {
                    return Err(corrupt("deal does not follow the game's seed".into()));
                }
                let dealt = MatchState::deal(expected_seed, game.current.roles);
                if *roles != dealt.roles || hands.iter().zip(&dealt.hands).any(|(h, d)| h.as_ref() != Some(d)) {
                    return Err(corrupt("dealt hands differ from the seed".into()));
                }
            }
            EventPayload::Exchange {
                match_index,
                transfers,
            } => {
                if *match_index != game.match_index || *transfers != game.last_exchange.transfers {
                    return Err(corrupt("exchange differs from the role rules".into()));
                }
            }
            EventPayload::Action {
                match_index,
                seat,
                index,
                notation,
            } => {
                if *match_index != game.match_index {
                    return Err(corrupt("action outside the current match".into()));
                }
                let mv: MoveSpec = notation.parse().map_err(|_| corrupt(format!("bad notation {notation:?}")))?;
                if mv.index() != Some(*index) {
                    return Err(corrupt("notation and index disagree".into()));
                }
                if game.current.turn != *seat {
                    return Err(corrupt(format!("seat {seat} acted out of turn")));
                }
                game.current
                    .step(*seat, mv)
                    .map_err(|err| corrupt(err.to_string()))?;
            }
            EventPayload::MatchSettled {
                match_index,
                finish,
                awarded,
                scores,
                game_over,
                ..
            } => {
                if *match_index != game.match_index {
                    return Err(corrupt("settlement of another match".into()));
                }
                let settlement = game.finish_match().map_err(|err| corrupt(err.to_string()))?;
                if settlement.finish != *finish
                    || settlement.awarded != *awarded
                    || game.scores.points != *scores
                    || game.is_over() != *game_over
                {
                    return Err(corrupt("settlement differs from replayed play".into()));
                }
            }
            EventPayload::SessionClosed { scores } => {
                if *scores != game.scores {
                    return Err(corrupt("closing scores differ".into()));
                }
            }
            EventPayload::QuestionnairePre { .. }
            | EventPayload::QuestionnairePost { .. }
            | EventPayload::RivalryReport { .. } => {}
        }
    }
    Ok(Replayed {
        scores: game.scores.clone(),
        state: game.current.clone(),
        game,
    })
}
