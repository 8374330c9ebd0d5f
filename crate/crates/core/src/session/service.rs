use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::{Arc, Mutex, RwLock};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use tokio::sync::broadcast;

use super::events::{EventLog, EventPayload, SessionEvent, WIRE_SCHEMA_VERSION};
use super::SessionError;
use crate::agents::AgentKind;
use crate::game::{ActionMask, Card, GameError, GameState, MatchState, Role, EMPTY_FACE, NUM_PLAYERS};
use crate::harness::{
    load_opponent, load_predictor, Adaptation, ExperimentConfig, HarnessError, MatchOutcome,
    SeatKind, Table, TableSetup, HUMAN_SEAT,
};
use crate::rivalry::{
    HumanProfile, RivalryError, RivalryReport, ShapingCondition, TraitVector,
};
use crate::seed::derive_seed;

/// Human inactivity after which a session is suspended (never forfeited).
pub const INACTIVITY_LIMIT: Duration = Duration::from_secs(600);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    AwaitingPreQuestionnaire,
    Playing,
    AwaitingPostQuestionnaire,
    Closed,
}

impl std::fmt::Display for Phase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Phase::AwaitingPreQuestionnaire => "awaiting_pre_questionnaire",
            Phase::Playing => "playing",
            Phase::AwaitingPostQuestionnaire => "awaiting_post_questionnaire",
            Phase::Closed => "closed",
        })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CreateRequest {
    pub dql_checkpoint: Option<PathBuf>,
    pub ppo_checkpoint: Option<PathBuf>,
    /// Required when the condition adapts the agents.
    pub predictor: Option<PathBuf>,
    pub condition: Option<ShapingCondition>,
    pub lambda: Option<f64>,
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuestionItem {
    pub id: String,
    pub prompt: String,
    /// The agent seat being assessed, for post-game items.
    pub seat: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuestionnaireSchema {
    pub schema_version: u32,
    pub phase: String,
    pub scale_min: f64,
    pub scale_max: f64,
    pub items: Vec<QuestionItem>,
}

impl QuestionnaireSchema {
    pub fn pre() -> Self {
        let item = |id: &str, prompt: &str| QuestionItem {
            id: id.into(),
            prompt: prompt.into(),
            seat: None,
        };
        Self {
            schema_version: WIRE_SCHEMA_VERSION,
            phase: "pre".into(),
            scale_min: 0.0,
            scale_max: 5.0,
            items: vec![
                item("agency", "How much do you see yourself as self-driven and goal-oriented?"),
                item("competence", "How skilled do you consider yourself at games like this?"),
                item("communion", "How much do you value getting along with others?"),
                item("competitiveness", "How competitive are you?"),
            ],
        }
    }

    pub fn post(seats: &[SeatKind; NUM_PLAYERS]) -> Self {
        let mut items = Vec::new();
        for (seat, kind) in seats.iter().enumerate().skip(1) {
            for (id, what) in [
                ("agency", "self-driven and goal-oriented"),
                ("competence", "skilled"),
                ("communion", "cooperative and warm"),
            ] {
                items.push(QuestionItem {
                    id: format!("seat{seat}.{id}"),
                    prompt: format!("How {what} was the opponent in seat {seat} ({kind:?})?"),
                    seat: Some(seat),
                });
            }
        }
        Self {
            schema_version: WIRE_SCHEMA_VERSION,
            phase: "post".into(),
            scale_min: 0.0,
            scale_max: 5.0,
            items,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraitAnswers {
    pub agency: f64,
    pub competence: f64,
    pub communion: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "phase", content = "answers", rename_all = "lowercase")]
pub enum QuestionnaireAnswers {
    Pre {
        agency: f64,
        competence: f64,
        communion: f64,
        competitiveness: f64,
    },
    /// Assessments of seats 1, 2 and 3 in order.
    Post { assessments: [TraitAnswers; NUM_PLAYERS - 1] },
}

fn out_of_range(e: RivalryError) -> SessionError {
    match e {
        RivalryError::OutOfRange { name, value } => SessionError::OutOfRange {
            name: name.to_string(),
            value,
        },
        other => SessionError::BadRequest(other.to_string()),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoardView {
    /// `None` on a fresh board.
    pub face: Option<u8>,
    pub quantity: u8,
    pub last_set: Vec<Card>,
}

/// Public information about one seat.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeatView {
    pub seat: usize,
    pub kind: SeatKind,
    pub cards_left: usize,
    pub role: Option<Role>,
    pub finish_position: Option<usize>,
    pub passed: bool,
}

/// Everything the human may see. Other seats appear only as card counts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HumanView {
    pub schema_version: u32,
    pub session_id: String,
    pub phase: Phase,
    pub suspended: bool,
    /// Sequence number of the latest event.
    pub seq: u64,
    pub match_index: u32,
    pub turn: usize,
    pub your_turn: bool,
    pub hand: Vec<Card>,
    pub board: BoardView,
    /// Legal moves of the human; all false unless it is their turn.
    pub legal_mask: ActionMask,
    pub seats: Vec<SeatView>,
    pub scores: [u32; NUM_PLAYERS],
    pub game_over: bool,
    pub questionnaire: Option<QuestionnaireSchema>,
    pub rivalry: Option<[RivalryReport; NUM_PLAYERS - 1]>,
}

pub struct Session {
    id: String,
    phase: Phase,
    seats: [SeatKind; NUM_PLAYERS],
    table: Table,
    log: EventLog,
    profile: Option<HumanProfile>,
    outcomes: Vec<MatchOutcome>,
    rivalry: Option<[RivalryReport; NUM_PLAYERS - 1]>,
    rivalry_scale: crate::rivalry::RivalryScale,
    last_activity: Instant,
    suspended: bool,
    tx: broadcast::Sender<SessionEvent>,
}

impl Session {
    fn new(
        id: String,
        seats: [SeatKind; NUM_PLAYERS],
        table: Table,
        log: EventLog,
        condition: ShapingCondition,
        lambda: f64,
        rivalry_scale: crate::rivalry::RivalryScale,
    ) -> Result<Self, SessionError> {
        let (tx, _) = broadcast::channel(256);
        let mut s = Self {
            id,
            phase: Phase::AwaitingPreQuestionnaire,
            seats,
            table,
            log,
            profile: None,
            outcomes: Vec::new(),
            rivalry: None,
            rivalry_scale,
            last_activity: Instant::now(),
            suspended: false,
            tx,
        };
        let table_seed = s.table.seed();
        s.record(EventPayload::SessionCreated {
            schema_version: WIRE_SCHEMA_VERSION,
            table_seed: Some(table_seed),
            seats,
            condition,
            lambda,
        })?;
        Ok(s)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn is_suspended(&self) -> bool {
        self.suspended
    }

    pub fn table(&self) -> &Table {
        &self.table
    }

    pub fn game(&self) -> &GameState {
        self.table.game()
    }

    pub fn state(&self) -> &MatchState {
        self.table.state()
    }

    pub fn events(&self) -> &[SessionEvent] {
        self.log.events()
    }

    pub fn log_path(&self) -> Option<&std::path::Path> {
        self.log.path()
    }

    /// Client-safe events after `seq`.
    pub fn events_since(&self, seq: u64) -> Vec<SessionEvent> {
        self.log.since(seq).iter().map(SessionEvent::redacted).collect()
    }

    pub fn subscribe(&self) -> broadcast::Receiver<SessionEvent> {
        self.tx.subscribe()
    }

    fn record(&mut self, payload: EventPayload) -> Result<(), SessionError> {
        let event = self.log.append(payload)?.redacted();
        // Nobody listening is fine.
        let _ = self.tx.send(event);
        Ok(())
    }

    fn touch(&mut self) {
        self.last_activity = Instant::now();
        self.suspended = false;
    }

    /// Suspends the session if the human has been idle longer than `limit`.
    pub fn check_inactivity(&mut self, now: Instant, limit: Duration) -> bool {
        if matches!(self.phase, Phase::Closed) {
            return false;
        }
        if now.duration_since(self.last_activity) > limit {
            self.suspended = true;
        }
        self.suspended
    }

    fn wrong_phase(&self, action: &'static str) -> SessionError {
        SessionError::WrongPhase {
            action,
            phase: self.phase.to_string(),
        }
    }

    fn record_deal(&mut self) -> Result<(), SessionError> {
        let game = self.table.game();
        let match_index = game.match_index;
        let match_seed = GameState::match_seed(game.seed, match_index);
        let roles = game.current.roles;
        let dealt = MatchState::deal(match_seed, roles);
        let transfers = game.last_exchange.transfers.clone();
        self.record(EventPayload::Deal {
            match_index,
            match_seed: Some(match_seed),
            roles,
            hands: dealt.hands.map(Some),
        })?;
        if roles.is_some() {
            self.record(EventPayload::Exchange {
                match_index,
                transfers,
            })?;
        }
        Ok(())
    }

    fn record_ply(&mut self, seat: usize, index: usize) -> Result<(), SessionError> {
        let notation = crate::game::move_at(index)?.to_string();
        self.record(EventPayload::Action {
            match_index: self.table.game().match_index,
            seat,
            index,
            notation,
        })
    }

    /// Lets the agents move until the human is to act or the game ends,
    /// settling and dealing matches on the way.
    fn run_agents(&mut self) -> Result<(), SessionError> {
        loop {
            for ply in self.table.advance_agents()? {
                self.record_ply(ply.player, ply.action)?;
            }
            if !self.table.match_over() {
                return Ok(());
            }
            let outcome = self.table.settle()?;
            self.record(EventPayload::MatchSettled {
                match_index: outcome.match_index,
                finish: outcome.settlement.finish,
                awarded: outcome.settlement.awarded,
                scores: outcome.scores,
                game_over: outcome.game_over,
                predicted: outcome.predicted,
                shaped: outcome.shaped,
            })?;
            let over = outcome.game_over;
            self.outcomes.push(outcome);
            if over {
                self.phase = Phase::AwaitingPostQuestionnaire;
                return Ok(());
            }
            self.record_deal()?;
        }
    }

    pub fn submit_questionnaire(&mut self, answers: QuestionnaireAnswers) -> Result<(), SessionError> {
        self.touch();
        match answers {
            QuestionnaireAnswers::Pre {
                agency,
                competence,
                communion,
                competitiveness,
            } => {
                if self.phase != Phase::AwaitingPreQuestionnaire {
                    return Err(self.wrong_phase("pre questionnaire"));
                }
                let traits = TraitVector::new(agency, competence, communion).map_err(out_of_range)?;
                let profile = HumanProfile::new(traits, competitiveness).map_err(out_of_range)?;
                self.profile = Some(profile);
                self.record(EventPayload::QuestionnairePre { profile })?;
                self.phase = Phase::Playing;
                self.record_deal()?;
                self.run_agents()
            }
            QuestionnaireAnswers::Post { assessments } => {
                if self.phase != Phase::AwaitingPostQuestionnaire {
                    return Err(self.wrong_phase("post questionnaire"));
                }
                let mut traits = Vec::with_capacity(NUM_PLAYERS - 1);
                for a in assessments {
                    traits.push(TraitVector::new(a.agency, a.competence, a.communion).map_err(out_of_range)?);
                }
                let traits: [TraitVector; NUM_PLAYERS - 1] =
                    traits.try_into().unwrap_or_else(|_| unreachable!("three assessments"));
                let profile = self.profile.expect("pre questionnaire precedes play");
                let scale = self.rivalry_scale;
                let report = |scores: &[u32; NUM_PLAYERS], i: usize| {
                    RivalryReport::compute(&profile, &traits[i], scores[HUMAN_SEAT], scores[i + 1], scale)
                };
                let per_match: Vec<[RivalryReport; NUM_PLAYERS - 1]> = self
                    .outcomes
                    .iter()
                    .map(|o| std::array::from_fn(|i| report(&o.scores, i)))
                    .collect();
                let final_scores = self.table.game().scores.clone();
                let per_game: [RivalryReport; NUM_PLAYERS - 1] =
                    std::array::from_fn(|i| report(&final_scores.points, i));
                self.record(EventPayload::QuestionnairePost { assessments: traits })?;
                self.record(EventPayload::RivalryReport {
                    kinds: std::array::from_fn(|i| self.seats[i + 1].agent_kind()),
                    per_match,
                    per_game,
                })?;
                self.record(EventPayload::SessionClosed { scores: final_scores })?;
                self.rivalry = Some(per_game);
                self.phase = Phase::Closed;
                Ok(())
            }
        }
    }

    pub fn post_action(&mut self, index: usize) -> Result<(), SessionError> {
        self.touch();
        if self.phase != Phase::Playing {
            return Err(self.wrong_phase("an action"));
        }
        if !self.table.human_to_move() {
            return Err(SessionError::NotYourTurn {
                turn: self.table.state().turn,
            });
        }
        match self.table.human_action(index) {
            Ok(ply) => self.record_ply(HUMAN_SEAT, ply.action)?,
            Err(GameError::IllegalMove { notation, .. }) => {
                return Err(SessionError::IllegalMove(notation))
            }
            Err(GameError::BadActionIndex(i)) => {
                return Err(SessionError::IllegalMove(format!("no catalog entry {i}")))
            }
            Err(e) => return Err(e.into()),
        }
        self.run_agents()
    }

    pub fn view(&self) -> HumanView {
        let game = self.table.game();
        let state = &game.current;
        let your_turn = self.phase == Phase::Playing && self.table.human_to_move();
        let legal_mask = if your_turn {
            state.legal_actions(HUMAN_SEAT).unwrap_or_else(|_| ActionMask::none())
        } else {
            ActionMask::none()
        };
        let seats = (0..NUM_PLAYERS)
            .map(|seat| SeatView {
                seat,
                kind: self.seats[seat],
                cards_left: state.hands[seat].len(),
                role: state.roles.map(|r| r[seat]),
                finish_position: state.finish_order.iter().position(|&p| p == seat),
                passed: state.passed[seat],
            })
            .collect();
        let questionnaire = match self.phase {
            Phase::AwaitingPreQuestionnaire => Some(QuestionnaireSchema::pre()),
            Phase::AwaitingPostQuestionnaire => Some(QuestionnaireSchema::post(&self.seats)),
            _ => None,
        };
        HumanView {
            schema_version: WIRE_SCHEMA_VERSION,
            session_id: self.id.clone(),
            phase: self.phase,
            suspended: self.suspended,
            seq: self.log.last_seq(),
            match_index: game.match_index,
            turn: state.turn,
            your_turn,
            hand: state.hands[HUMAN_SEAT].cards(),
            board: BoardView {
                face: (state.board.face != EMPTY_FACE && !state.board.is_fresh()).then_some(state.board.face),
                quantity: state.board.quantity,
                last_set: state.board.last_set().to_vec(),
            },
            legal_mask,
            seats,
            scores: game.scores.points,
            game_over: game.is_over(),
            questionnaire,
            rivalry: self.rivalry,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ServiceConfig {
    /// Session directories are created here; `None` keeps logs in memory.
    pub root: Option<PathBuf>,
    /// Default checkpoints, agent traits, shaping settings and seats.
    pub experiment: ExperimentConfig,
    pub inactivity_limit: Duration,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            root: None,
            experiment: ExperimentConfig::default(),
            inactivity_limit: INACTIVITY_LIMIT,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CreatedSession {
    pub session_id: String,
    pub questionnaire: QuestionnaireSchema,
}

/// All live sessions. Each session is a single-writer state machine behind
/// its own lock; sessions never share mutable state.
pub struct SessionManager {
    config: ServiceConfig,
    sessions: RwLock<HashMap<String, Arc<Mutex<Session>>>>,
}

impl SessionManager {
    pub fn new(config: ServiceConfig) -> Self {
        Self {
            config,
            sessions: RwLock::new(HashMap::new()),
        }
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.config
    }

    pub fn create(&self, req: CreateRequest) -> Result<CreatedSession, SessionError> {
        let mut exp = self.config.experiment.clone();
        if let Some(p) = req.dql_checkpoint {
            exp.checkpoints.dql = p;
        }
        if let Some(p) = req.ppo_checkpoint {
            exp.checkpoints.ppo = p;
        }
        if let Some(p) = req.predictor.clone() {
            exp.checkpoints.predictor = p;
        }
        let condition = req.condition.unwrap_or(ShapingCondition::None);
        let lambda = req.lambda.unwrap_or(exp.shaping.lambda);
        if !(lambda >= 0.0) {
            return Err(SessionError::BadRequest(format!("lambda must be non-negative, got {lambda}")));
        }
        let seed = req.seed.unwrap_or_else(rand::random);
        let mut opponents = Vec::with_capacity(NUM_PLAYERS - 1);
        for (i, &kind) in exp.seats[1..].iter().enumerate() {
            let opp = load_opponent(&exp, kind, derive_seed(seed, i as u64)).map_err(|e| match e {
                HarnessError::Agent(a) => SessionError::MissingCheckpoint(a.to_string()),
                other => other.into(),
            })?;
            opponents.push(opp);
        }
        let opponents = opponents.try_into().unwrap_or_else(|_| unreachable!("three seats"));
        let adaptation = Adaptation {
            condition,
            lambda,
            learning_rate: exp.shaping.adapt_learning_rate,
            passes: exp.shaping.adapt_passes,
        };
        let predictor = if adaptation.is_active() || req.predictor.is_some() {
            Some(load_predictor(&exp).map_err(|e| SessionError::MissingCheckpoint(e.to_string()))?)
        } else {
            None
        };
        let agent_traits = std::array::from_fn(|i| {
            exp.agent_traits
                .get(exp.seats[i + 1].agent_kind().unwrap_or(AgentKind::Random))
        });
        let table = Table::new(TableSetup {
            opponents,
            agent_traits,
            predictor,
            adaptation: Some(adaptation),
            seed: derive_seed(seed, 0x5E55),
        });
        let id = uuid::Uuid::new_v4().simple().to_string();
        let log = match &self.config.root {
            Some(root) => EventLog::create(&root.join(&id).join("events.log"))?,
            None => EventLog::in_memory(),
        };
        let session = Session::new(
            id.clone(),
            exp.seats,
            table,
            log,
            condition,
            lambda,
            exp.shaping.rivalry_scale,
        )?;
        self.sessions
            .write()
            .expect("session map lock")
            .insert(id.clone(), Arc::new(Mutex::new(session)));
        Ok(CreatedSession {
            session_id: id,
            questionnaire: QuestionnaireSchema::pre(),
        })
    }

    pub fn get(&self, id: &str) -> Result<Arc<Mutex<Session>>, SessionError> {
        self.sessions
            .read()
            .expect("session map lock")
            .get(id)
            .cloned()
            .ok_or_else(|| SessionError::NotFound(id.to_string()))
    }

    /// Runs `f` on the session with exclusive access.
    pub fn with<T>(
        &self,
        id: &str,
        f: impl FnOnce(&mut Session) -> Result<T, SessionError>,
    ) -> Result<T, SessionError> {
        let session = self.get(id)?;
        let mut guard = session.lock().expect("session lock");
        f(&mut guard)
    }

    pub fn ids(&self) -> Vec<String> {
        self.sessions.read().expect("session map lock").keys().cloned().collect()
    }

    /// Marks idle sessions as suspended; returns how many are suspended.
    pub fn sweep(&self, now: Instant) -> usize {
        let sessions: Vec<_> = self.sessions.read().expect("session map lock").values().cloned().collect();
        sessions
            .iter()
            .filter(|s| {
                s.lock()
                    .expect("session lock")
                    .check_inactivity(now, self.config.inactivity_limit)
            })
            .count()
    }
}
