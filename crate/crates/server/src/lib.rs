//! HTTP service for live sessions: humans and external programs join by
//! token, read their view, submit moves and fetch the final score.
//!
//! | Method | Path | |
//! |---|---|---|
//! | POST | `/sessions` | create from a match config (JSON) |
//! | GET | `/sessions/{id}/view?token=..&since=..&wait_ms=..` | a player's view, optionally long-polled |
//! | POST | `/sessions/{id}/actions` | submit `{token, action}` |
//! | GET | `/sessions/{id}/score` | score report once terminal |

use std::time::Duration;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{HeaderMap, StatusCode};
use axum::response::IntoResponse;
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use gamebench::games::{Observation, Phase, TerminalState};
use gamebench::llm::{parse_action, ParseError};
use gamebench::orchestrator::{SessionPhase, SubmitError};
use gamebench::scoring::ScoreError;
use gamebench::{ActionRequest, GameKind, MatchConfig, PlayerId, ScoreReport};

mod error;
mod registry;

pub use error::ApiError;
pub use registry::{AppState, Entry, ServiceOptions};

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}/view", get(view))
        .route("/sessions/{id}/actions", post(submit))
        .route("/sessions/{id}/score", get(score))
        .with_state(state)
}

/// Serves until the listener fails.
pub async fn serve(listener: tokio::net::TcpListener, state: AppState) -> std::io::Result<()> {
    axum::serve(listener, router(state)).await
}

#[derive(Debug, Serialize, Deserialize)]
pub struct JoinToken {
    pub player: PlayerId,
    pub token: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Created {
    pub id: String,
    pub tokens: Vec<JoinToken>,
}

/// Session state without other players' moves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "snake_case")]
pub enum PhaseView {
    AwaitingActions { round: u32, phase: Phase, waiting_for: usize },
    Terminal,
    Aborted { reason: String },
}

impl From<SessionPhase> for PhaseView {
    fn from(p: SessionPhase) -> Self {
        match p {
            SessionPhase::AwaitingActions { round, phase, pending } => {
                PhaseView::AwaitingActions { round, phase, waiting_for: pending.len() }
            }
            SessionPhase::Terminal => PhaseView::Terminal,
            SessionPhase::Aborted { reason } => PhaseView::Aborted { reason },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionView {
    pub session: String,
    pub game: GameKind,
    pub player: PlayerId,
    /// Increases whenever the session changes; pass as `since` to long-poll.
    pub version: u64,
    pub phase: PhaseView,
    pub observation: Observation,
    /// Plain-text rendering of `observation`.
    pub text: String,
    /// Legal-move schema when this player must act now.
    pub request: Option<ActionRequest>,
    pub submitted: bool,
    pub terminal: Option<TerminalState>,
    pub score: Option<ScoreReport>,
}

async fn create_session(State(state): State<AppState>, body: Bytes) -> Result<impl IntoResponse, ApiError> {
    let text = std::str::from_utf8(&body).map_err(|e| ApiError::config_invalid(e.to_string()))?;
    let config = MatchConfig::from_json_str(text).map_err(|e| ApiError::config_invalid(e.to_string()))?;
    if let Err(violations) = config.validate() {
        let detail = serde_json::to_value(&violations).unwrap_or(Value::Null);
        return Err(ApiError::config_invalid(format!("{} violation(s)", violations.len())).with_detail(detail));
    }
    let (entry, tokens) = state.create(config)?;
    registry::drive(entry.clone(), state.options.tick);
    let created = Created {
        id: entry.id.clone(),
        tokens: tokens.into_iter().map(|(player, token)| JoinToken { player, token }).collect(),
    };
    Ok((StatusCode::CREATED, Json(created)))
}

#[derive(Debug, Default, Deserialize)]
struct ViewQuery {
    token: Option<String>,
    since: Option<u64>,
    wait_ms: Option<u64>,
}

fn bearer(headers: &HeaderMap) -> Option<String> {
    headers
        .get(axum::http::header::AUTHORIZATION)?
        .to_str()
        .ok()?
        .strip_prefix("Bearer ")
        .map(|t| t.trim().to_string())
}

fn authorize(entry: &Entry, token: Option<String>, headers: &HeaderMap) -> Result<PlayerId, ApiError> {
    token.or_else(|| bearer(headers)).and_then(|t| entry.player(&t)).ok_or_else(ApiError::bad_token)
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> T + Send + 'static) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f).await.map_err(|e| ApiError::internal(e.to_string()))
}

async fn view(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<ViewQuery>,
    headers: HeaderMap,
) -> Result<Json<SessionView>, ApiError> {
    let entry = state.get(&id)?;
    let player = authorize(&entry, q.token, &headers)?;
    if let Some(since) = q.since {
        let mut rx = entry.subscribe();
        let wait = Duration::from_millis(q.wait_ms.unwrap_or(u64::MAX)).min(state.options.max_wait);
        let _ = tokio::time::timeout(wait, rx.wait_for(|v| *v != since)).await;
    }
    blocking(move || render_view(&entry, player)).await.map(Json)
}

fn render_view(entry: &Entry, player: PlayerId) -> SessionView {
    let session = entry.lock();
    let version = entry.version();
    let phase = session.phase();
    let acting = matches!(&phase, SessionPhase::AwaitingActions { .. })
        && session.game().step().is_some_and(|s| s.players.contains(&player));
    let request = session.request(player);
    let submitted = acting && request.is_none();
    let mut observation = session.game().render_observation(player, session.config().prompt_version);
    if request.is_none() {
        observation.request = None;
    }
    let terminal = session.terminal_state();
    let score = terminal.as_ref().and_then(|_| session.score().ok());
    SessionView {
        session: entry.id.clone(),
        game: session.config().kind,
        player,
        version,
        text: observation.to_text(),
        observation,
        phase: phase.into(),
        request,
        submitted,
        terminal,
        score,
    }
}

#[derive(Debug, Deserialize)]
struct SubmitBody {
    token: Option<String>,
    /// A reply object such as `{"bid_amount": 40}`, or reply text.
    action: Value,
}

async fn submit(
    State(state): State<AppState>,
    Path(id): Path<String>,
    headers: HeaderMap,
    body: Bytes,
) -> Result<Json<Value>, ApiError> {
    let entry = state.get(&id)?;
    let body: SubmitBody = serde_json::from_slice(&body)
        .map_err(|e| ApiError::unprocessable("MalformedAction", format!("request body: {e}")))?;
    let player = authorize(&entry, body.token, &headers)?;
    let reply = match body.action {
        Value::String(s) => s,
        other => other.to_string(),
    };
    blocking(move || {
        let mut session = entry.lock();
        let pending = match session.phase() {
            SessionPhase::AwaitingActions { pending, .. } => pending,
            _ => return Err(ApiError::conflict("SessionFinished", "the session is over")),
        };
        if !pending.contains(&player) {
            let acting = session.game().step().is_some_and(|s| s.players.contains(&player));
            return Err(if acting {
                ApiError::conflict("AlreadySubmitted", "you already acted this round")
            } else {
                ApiError::conflict("NotYourTurn", "you are not expected to act now")
            });
        }
        let request = session.request(player).ok_or_else(|| ApiError::conflict("NotYourTurn", "no move requested"))?;
        let action = parse_action(&reply, &request, player).map_err(|e| match e {
            ParseError::IllegalValue(reason) => ApiError::unprocessable("IllegalAction", reason.to_string())
                .with_detail(json!({"reason": reason, "request": request})),
            other => ApiError::unprocessable("MalformedAction", other.to_string()).with_detail(json!({"request": request})),
        })?;
        session.submit(player, action.clone()).map_err(|e| match e {
            SubmitError::AlreadySubmitted(_) => ApiError::conflict("AlreadySubmitted", e.to_string()),
            SubmitError::Finished => ApiError::conflict("SessionFinished", e.to_string()),
            SubmitError::NotYourTurn(_) | SubmitError::UnknownPlayer(_) => ApiError::conflict("NotYourTurn", e.to_string()),
            SubmitError::Illegal(reason) => {
                ApiError::unprocessable("IllegalAction", reason.to_string()).with_detail(json!({"reason": reason}))
            }
        })?;
        let phase = PhaseView::from(session.phase());
        drop(session);
        entry.bump();
        Ok(json!({"accepted": true, "action": action, "phase": phase}))
    })
    .await?
    .map(Json)
}

async fn score(State(state): State<AppState>, Path(id): Path<String>) -> Result<Json<ScoreReport>, ApiError> {
    let entry = state.get(&id)?;
    blocking(move || {
        let session = entry.lock();
        match session.phase() {
            SessionPhase::Terminal => {}
            SessionPhase::Aborted { reason } => return Err(ApiError::conflict("SessionAborted", reason)),
            SessionPhase::AwaitingActions { .. } => {
                return Err(ApiError::conflict("NotTerminal", "the session is still running"))
            }
        }
        session.score().map_err(|e| match e {
            ScoreError::NotScored(what) => ApiError::conflict("NotScored", format!("{what} is not scored")),
            other => ApiError::internal(other.to_string()),
        })
    })
    .await?
    .map(Json)
}
