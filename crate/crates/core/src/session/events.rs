//! Session events and the append-only log file.
//!
//! One event per line: `<seq> <iso-timestamp> <kind> <payload-json>`.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};

use super::SessionError;
use crate::agents::AgentKind;
use crate::game::{CardTransfer, Hand, Role, ScoreBoard, NUM_PLAYERS};
use crate::harness::{SeatKind, HUMAN_SEAT};
use crate::rivalry::{HumanProfile, PredictedRivalryReport, RivalryReport, ShapingCondition, TraitVector};

/// Version of every payload and response schema the service emits.
pub const WIRE_SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "snake_case")]
pub enum EventPayload {
    SessionCreated {
        schema_version: u32,
        /// Seed every deal is derived from; withheld from the client.
        table_seed: Option<u64>,
        seats: [SeatKind; NUM_PLAYERS],
        condition: ShapingCondition,
        lambda: f64,
    },
    QuestionnairePre {
        profile: HumanProfile,
    },
    Deal {
        match_index: u32,
        match_seed: Option<u64>,
        roles: Option<[Role; NUM_PLAYERS]>,
        /// Dealt hands before any exchange; only the human's is sent to the client.
        hands: [Option<Hand>; NUM_PLAYERS],
    },
    Exchange {
        match_index: u32,
        transfers: Vec<CardTransfer>,
    },
    Action {
        match_index: u32,
        seat: usize,
        index: usize,
        /// Canonical move notation.
        notation: String,
    },
    MatchSettled {
        match_index: u32,
        finish: [usize; NUM_PLAYERS],
        awarded: [u32; NUM_PLAYERS],
        scores: [u32; NUM_PLAYERS],
        game_over: bool,
        /// Agent-side predicted rivalry for seats 1..=3.
        predicted: [Option<PredictedRivalryReport>; NUM_PLAYERS - 1],
        /// Shaped final reward for seats 1..=3 that were adapted.
        shaped: [Option<f64>; NUM_PLAYERS - 1],
    },
    QuestionnairePost {
        assessments: [TraitVector; NUM_PLAYERS - 1],
    },
    RivalryReport {
        kinds: [Option<AgentKind>; NUM_PLAYERS - 1],
        per_match: Vec<[RivalryReport; NUM_PLAYERS - 1]>,
        per_game: [RivalryReport; NUM_PLAYERS - 1],
    },
    SessionClosed {
        scores: ScoreBoard,
    },
}

impl EventPayload {
    pub fn kind(&self) -> &'static str {
        match self {
            EventPayload::SessionCreated { .. } => "session_created",
            EventPayload::QuestionnairePre { .. } => "questionnaire_pre",
            EventPayload::Deal { .. } => "deal",
            EventPayload::Exchange { .. } => "exchange",
            EventPayload::Action { .. } => "action",
            EventPayload::MatchSettled { .. } => "match_settled",
            EventPayload::QuestionnairePost { .. } => "questionnaire_post",
            EventPayload::RivalryReport { .. } => "rivalry_report",
            EventPayload::SessionClosed { .. } => "session_closed",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionEvent {
    pub seq: u64,
    pub ts: DateTime<Utc>,
    #[serde(flatten)]
    pub payload: EventPayload,
}

impl SessionEvent {
    pub fn to_line(&self) -> String {
        let value = serde_json::to_value(&self.payload).expect("payload serializes");
        let body = value.get("payload").cloned().unwrap_or(serde_json::Value::Null);
        format!(
            "{} {} {} {}",
            self.seq,
            self.ts.to_rfc3339_opts(SecondsFormat::Micros, true),
            self.payload.kind(),
            body
        )
    }

    /// Parses one log line; `line_no` is only used for error reporting when
    /// the sequence number itself is unreadable.
    pub fn from_line(line: &str, line_no: u64) -> Result<Self, SessionError> {
        let mut parts = line.splitn(4, ' ');
        let seq_text = parts.next().unwrap_or_default();
        let seq: u64 = seq_text.parse().map_err(|_| SessionError::CorruptLog {
            seq: line_no,
            reason: format!("unreadable sequence number {seq_text:?}"),
        })?;
        let corrupt = |reason: String| SessionError::CorruptLog { seq, reason };
        let ts = parts
            .next()
            .and_then(|t| DateTime::parse_from_rfc3339(t).ok())
            .ok_or_else(|| corrupt("bad timestamp".into()))?
            .with_timezone(&Utc);
        let kind = parts.next().ok_or_else(|| corrupt("missing kind".into()))?;
        let body: serde_json::Value = parts
            .next()
            .ok_or_else(|| corrupt("missing payload".into()))
            .and_then(|p| serde_json::from_str(p).map_err(|e| corrupt(e.to_string())))?;
        let payload = serde_json::from_value(serde_json::json!({ "kind": kind, "payload": body }))
            .map_err(|e| corrupt(e.to_string()))?;
        Ok(Self { seq, ts, payload })
    }

    /// What the human's client may see: no seeds, no other seat's cards.
    pub fn redacted(&self) -> Self {
        let payload = match &self.payload {
            EventPayload::SessionCreated {
                schema_version,
                seats,
                condition,
                lambda,
                ..
            } => EventPayload::SessionCreated {
                schema_version: *schema_version,
                table_seed: None,
                seats: *seats,
                condition: *condition,
                lambda: *lambda,
            },
            EventPayload::Deal {
                match_index,
                roles,
                hands,
                ..
            } => EventPayload::Deal {
                match_index: *match_index,
                match_seed: None,
                roles: *roles,
                hands: std::array::from_fn(|s| if s == HUMAN_SEAT { hands[s] } else { None }),
            },
            EventPayload::Exchange {
                match_index,
                transfers,
            } => EventPayload::Exchange {
                match_index: *match_index,
                transfers: transfers
                    .iter()
                    .filter(|t| t.from == HUMAN_SEAT || t.to == HUMAN_SEAT)
                    .cloned()
                    .collect(),
            },
            other => other.clone(),
        };
        Self {
            seq: self.seq,
            ts: self.ts,
            payload,
        }
    }
}

/// In-memory event list mirrored to an append-only file.
#[derive(Debug)]
pub struct EventLog {
    events: Vec<SessionEvent>,
    file: Option<(PathBuf, File)>,
}

impl EventLog {
    pub fn in_memory() -> Self {
        Self {
            events: Vec::new(),
            file: None,
        }
    }

    pub fn create(path: &Path) -> Result<Self, SessionError> {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        let file = OpenOptions::new().create_new(true).append(true).open(path)?;
        Ok(Self {
            events: Vec::new(),
            file: Some((path.to_path_buf(), file)),
        })
    }

    pub fn path(&self) -> Option<&Path> {
        self.file.as_ref().map(|(p, _)| p.as_path())
    }

    pub fn append(&mut self, payload: EventPayload) -> Result<&SessionEvent, SessionError> {
        let event = SessionEvent {
            seq: self.events.len() as u64 + 1,
            ts: Utc::now(),
            payload,
        };
        if let Some((_, file)) = &mut self.file {
            writeln!(file, "{}", event.to_line())?;
            file.flush()?;
        }
        self.events.push(event);
        Ok(self.events.last().expect("just pushed"))
    }

    pub fn events(&self) -> &[SessionEvent] {
        &self.events
    }

    pub fn last_seq(&self) -> u64 {
        self.events.len() as u64
    }

    /// Events with a sequence number above `seq`.
    pub fn since(&self, seq: u64) -> &[SessionEvent] {
        &self.events[(seq as usize).min(self.events.len())..]
    }
}

/// Reads every line of a log file.
pub fn read_log(path: &Path) -> Result<Vec<SessionEvent>, SessionError> {
    let reader = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(SessionEvent::from_line(&line, i as u64 + 1)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::Card;

    fn deal_event() -> SessionEvent {
        SessionEvent {
            seq: 3,
            ts: Utc::now(),
            payload: EventPayload::Deal {
                match_index: 0,
                match_seed: Some(99),
                roles: None,
                hands: std::array::from_fn(|s| Some(Hand::from_cards([Card::Face(s as u8 + 1)]))),
            },
        }
    }

    #[test]
    fn line_round_trip() {
        let e = deal_event();
        let line = e.to_line();
        assert!(line.starts_with("3 "));
        assert_eq!(line.split(' ').nth(2), Some("deal"));
        let back = SessionEvent::from_line(&line, 1).unwrap();
        assert_eq!(back.payload, e.payload);
        assert_eq!(back.seq, 3);
        let action = SessionEvent {
            seq: 4,
            ts: Utc::now(),
            payload: EventPayload::Action {
                match_index: 0,
                seat: 2,
                index: 199,
                notation: "pass".into(),
            },
        };
        assert!(action.to_line().contains("\"notation\":\"pass\""));
    }

    #[test]
    fn bad_lines_name_their_seq() {
        match SessionEvent::from_line("7 notatime deal {}", 1) {
            Err(SessionError::CorruptLog { seq: 7, .. }) => {}
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            SessionEvent::from_line("x 2024 deal {}", 5),
            Err(SessionError::CorruptLog { seq: 5, .. })
        ));
    }

    #[test]
    fn redaction_hides_other_hands_and_seeds() {
        let r = deal_event().redacted();
        let EventPayload::Deal { match_seed, hands, .. } = r.payload else { panic!() };
        assert_eq!(match_seed, None);
        assert!(hands[0].is_some());
        assert!(hands[1..].iter().all(Option::is_none));
    }

    #[test]
    fn log_file_appends_gapless() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s").join("events.log");
        let mut log = EventLog::create(&path).unwrap();
        for _ in 0..3 {
            log.append(deal_event().payload).unwrap();
        }
        let read = read_log(&path).unwrap();
        assert_eq!(read.iter().map(|e| e.seq).collect::<Vec<_>>(), vec![1, 2, 3]);
        assert_eq!(log.since(1).len(), 2);
        assert!(EventLog::create(&path).is_err());
    }
}
