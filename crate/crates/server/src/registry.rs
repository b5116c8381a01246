use std::collections::HashMap;
use std::sync::{Arc, Mutex, MutexGuard, RwLock};
use std::time::Duration;

use gamebench::agents::AgentSpec;
use gamebench::orchestrator::{RunOptions, Session};
use gamebench::{MatchConfig, PlayerId};
use tokio::sync::watch;

use crate::error::ApiError;

/// A live session with its join tokens and a change counter for long polls.
pub struct Entry {
    pub id: String,
    session: Mutex<Session>,
    tokens: HashMap<String, PlayerId>,
    version: watch::Sender<u64>,
}

impl Entry {
    pub fn lock(&self) -> MutexGuard<'_, Session> {
        self.session.lock().unwrap_or_else(|e| e.into_inner())
    }

    pub fn player(&self, token: &str) -> Option<PlayerId> {
        self.tokens.get(token).copied()
    }

    pub fn version(&self) -> u64 {
        *self.version.borrow()
    }

    pub fn bump(&self) {
        self.version.send_modify(|v| *v += 1);
    }

    pub fn subscribe(&self) -> watch::Receiver<u64> {
        self.version.subscribe()
    }
}

#[derive(Clone, Debug)]
pub struct ServiceOptions {
    /// Upper bound on a long-poll wait.
    pub max_wait: Duration,
    /// How often human move timeouts are checked.
    pub tick: Duration,
    pub run: RunOptions,
}

impl Default for ServiceOptions {
    fn default() -> Self {
        ServiceOptions { max_wait: Duration::from_secs(30), tick: Duration::from_millis(100), run: RunOptions::default() }
    }
}

#[derive(Clone, Default)]
pub struct AppState {
    sessions: Arc<RwLock<HashMap<String, Arc<Entry>>>>,
    pub options: Arc<ServiceOptions>,
}

/// A human seat and its join token.
pub type JoinTokenPair = (PlayerId, String);

impl AppState {
    pub fn new(options: ServiceOptions) -> Self {
        AppState { sessions: Arc::default(), options: Arc::new(options) }
    }

    pub fn get(&self, id: &str) -> Result<Arc<Entry>, ApiError> {
        let sessions = self.sessions.read().unwrap_or_else(|e| e.into_inner());
        sessions.get(id).cloned().ok_or_else(|| ApiError::unknown_session(id))
    }

    /// Registers a session and returns it with one token per human seat.
    pub fn create(&self, config: MatchConfig) -> Result<(Arc<Entry>, Vec<JoinTokenPair>), ApiError> {
        let humans: Vec<PlayerId> =
            config.roster.iter().enumerate().filter(|(_, s)| s.is_human()).map(|(p, _)| p).collect();
        let id = uuid::Uuid::new_v4().simple().to_string();
        let session = Session::new(&id, config, &self.options.run).map_err(|e| ApiError::config_invalid(e.to_string()))?;
        let tokens: Vec<(PlayerId, String)> =
            humans.into_iter().map(|p| (p, uuid::Uuid::new_v4().simple().to_string())).collect();
        let entry = Arc::new(Entry {
            id: id.clone(),
            session: Mutex::new(session),
            tokens: tokens.iter().map(|(p, t)| (t.clone(), *p)).collect(),
            version: watch::channel(0).0,
        });
        self.sessions.write().unwrap_or_else(|e| e.into_inner()).insert(id, entry.clone());
        Ok((entry, tokens))
    }
}

/// Runs automated seats in the background, then watches human move
/// timeouts until the session ends.
pub fn drive(entry: Arc<Entry>, tick: Duration) {
    tokio::spawn(async move {
        let first = entry.clone();
        let _ = tokio::task::spawn_blocking(move || {
            let _ = first.lock().advance();
            first.bump();
        })
        .await;
        let timed = entry.lock().config().roster.iter().any(|s| matches!(s, AgentSpec::Human { timeout_ms: Some(_) }));
        if !timed {
            return;
        }
        loop {
            tokio::time::sleep(tick).await;
            let e = entry.clone();
            let finished = tokio::task::spawn_blocking(move || {
                let mut session = e.lock();
                if !session.expire_overdue().is_empty() {
                    e.bump();
                }
                session.is_finished()
            })
            .await
            .unwrap_or(true);
            if finished {
                break;
            }
        }
    });
}
