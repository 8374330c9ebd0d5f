//! HTTP front end. JSON request and response bodies; `/stream` pushes
//! client-safe events as server-sent events.

use std::convert::Infallible;
use std::net::SocketAddr;
use std::sync::Arc;
use std::time::{Duration, Instant};

use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::sse::{Event, KeepAlive, Sse};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use futures::stream::{self, Stream};
use serde::{Deserialize, Serialize};
use tokio::sync::broadcast::error::RecvError;

use super::service::{CreateRequest, CreatedSession, HumanView, QuestionnaireAnswers, SessionManager};
use super::{SessionError, SessionEvent};

#[derive(Debug, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
    pub message: String,
}

impl SessionError {
    pub fn status(&self) -> StatusCode {
        match self {
            SessionError::NotFound(_) | SessionError::MissingCheckpoint(_) => StatusCode::NOT_FOUND,
            SessionError::WrongPhase { .. } | SessionError::NotYourTurn { .. } => StatusCode::CONFLICT,
            SessionError::IllegalMove(_) | SessionError::OutOfRange { .. } => {
                StatusCode::UNPROCESSABLE_ENTITY
            }
            SessionError::BadRequest(_) => StatusCode::BAD_REQUEST,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            SessionError::NotFound(_) => "not_found",
            SessionError::MissingCheckpoint(_) => "missing_checkpoint",
            SessionError::WrongPhase { .. } => "wrong_phase",
            SessionError::NotYourTurn { .. } => "not_your_turn",
            SessionError::IllegalMove(_) => "illegal_move",
            SessionError::OutOfRange { .. } => "out_of_range",
            SessionError::BadRequest(_) => "bad_request",
            SessionError::EmptyLog | SessionError::CorruptLog { .. } => "corrupt_log",
            _ => "internal",
        }
    }
}

impl IntoResponse for SessionError {
    fn into_response(self) -> Response {
        let body = ErrorBody {
            error: self.code().to_string(),
            message: self.to_string(),
        };
        (self.status(), Json(body)).into_response()
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ActionRequest {
    /// Catalog index of the move.
    pub action: usize,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SinceQuery {
    #[serde(default)]
    pub since: u64,
}

type Shared = Arc<SessionManager>;

async fn create(
    State(m): State<Shared>,
    body: Option<Json<CreateRequest>>,
) -> Result<(StatusCode, Json<CreatedSession>), SessionError> {
    let req = body.map(|Json(r)| r).unwrap_or_default();
    let created = tokio::task::block_in_place(|| m.create(req))?;
    Ok((StatusCode::CREATED, Json(created)))
}

async fn state(State(m): State<Shared>, Path(id): Path<String>) -> Result<Json<HumanView>, SessionError> {
    m.with(&id, |s| Ok(Json(s.view())))
}

async fn questionnaire(
    State(m): State<Shared>,
    Path(id): Path<String>,
    Json(answers): Json<QuestionnaireAnswers>,
) -> Result<Json<HumanView>, SessionError> {
    tokio::task::block_in_place(|| {
        m.with(&id, |s| {
            s.submit_questionnaire(answers)?;
            Ok(Json(s.view()))
        })
    })
}

async fn action(
    State(m): State<Shared>,
    Path(id): Path<String>,
    Json(req): Json<ActionRequest>,
) -> Result<Json<HumanView>, SessionError> {
    // Agent moves and any per-match update run before the reply.
    tokio::task::block_in_place(|| {
        m.with(&id, |s| {
            s.post_action(req.action)?;
            Ok(Json(s.view()))
        })
    })
}

async fn events(
    State(m): State<Shared>,
    Path(id): Path<String>,
    Query(q): Query<SinceQuery>,
) -> Result<Json<Vec<SessionEvent>>, SessionError> {
    m.with(&id, |s| Ok(Json(s.events_since(q.since))))
}

async fn stream_events(
    State(m): State<Shared>,
    Path(id): Path<String>,
) -> Result<Sse<impl Stream<Item = Result<Event, Infallible>>>, SessionError> {
    let rx = m.with(&id, |s| Ok(s.subscribe()))?;
    let events = stream::unfold(rx, |mut rx| async move {
        loop {
            match rx.recv().await {
                Ok(e) => {
                    let event = Event::default()
                        .id(e.seq.to_string())
                        .event(e.payload.kind())
                        .json_data(&e)
                        .expect("events serialize");
                    return Some((Ok(event), rx));
                }
                // A slow client refetches `/events?since=` from the ids it saw.
                Err(RecvError::Lagged(_)) => continue,
                Err(RecvError::Closed) => return None,
            }
        }
    });
    Ok(Sse::new(events).keep_alive(KeepAlive::default()))
}

pub fn router(manager: Shared) -> Router {
    Router::new()
        .route("/sessions", post(create))
        .route("/sessions/{id}/state", get(state))
        .route("/sessions/{id}/questionnaire", post(questionnaire))
        .route("/sessions/{id}/actions", post(action))
        .route("/sessions/{id}/events", get(events))
        .route("/sessions/{id}/stream", get(stream_events))
        .with_state(manager)
}

/// Binds `addr` and serves until `shutdown` resolves. Idle sessions are
/// swept once a minute. Returns the bound address through `on_bound`.
pub async fn serve(
    manager: Shared,
    addr: SocketAddr,
    on_bound: impl FnOnce(SocketAddr),
    shutdown: impl std::future::Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    on_bound(listener.local_addr()?);
    let sweeper = {
        let m = manager.clone();
        tokio::spawn(async move {
            let mut tick = tokio::time::interval(Duration::from_secs(60));
            loop {
                tick.tick().await;
                m.sweep(Instant::now());
            }
        })
    };
    let result = axum::serve(listener, router(manager))
        .with_graceful_shutdown(shutdown)
        .await;
    sweeper.abort();
    result
}
