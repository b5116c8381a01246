use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::action::{Action, ActionRequest, IllegalReason};
use crate::agents::{random_action, scripted_agent, ActContext, Agent, AgentError, AgentSpec};
use crate::config::{ConfigError, MatchConfig, PlayerId};
use crate::games::{new_game, Game, Phase, ResolveError, StateView, TerminalState};
use crate::llm::{LlmAgent, TranscriptSink};
use crate::matchlog::{LogRound, MatchLog};
use crate::rng::{purpose, rng_stream};
use crate::scoring::{score, ScoreError, ScoreReport};

#[derive(Debug, thiserror::Error)]
pub enum OrchestratorError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("seat {seat}: {message}")]
    AgentSetup { seat: usize, message: String },
    #[error("seat {seat} is a human seat; use a live session")]
    HumanSeat { seat: usize },
    #[error("seat {seat}: {error}")]
    AgentFailure { seat: usize, error: AgentError },
    #[error("engine rejected a move: {0}")]
    Resolve(#[from] ResolveError),
}

/// Knobs for building live agents.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// JSONL sidecar for chat requests and replies.
    pub transcripts: Option<PathBuf>,
}

pub type Seat = Option<Box<dyn Agent>>;

/// Builds one agent per seat; human seats are `None`.
pub fn build_agents(config: &MatchConfig, options: &RunOptions) -> Result<Vec<Seat>, OrchestratorError> {
    let sink = match &options.transcripts {
        Some(path) => Some(TranscriptSink::create(path).map_err(|e| OrchestratorError::AgentSetup {
            seat: 0,
            message: format!("transcript file {}: {e}", path.display()),
        })?),
        None => None,
    };
    config
        .roster
        .iter()
        .enumerate()
        .map(|(seat, spec)| match spec {
            AgentSpec::Human { .. } => Ok(None),
            AgentSpec::Llm(llm) => Ok(Some(Box::new(LlmAgent::http(llm.clone(), sink.clone())) as Box<dyn Agent>)),
            other => scripted_agent(other)
                .map(Some)
                .ok_or_else(|| OrchestratorError::AgentSetup { seat, message: format!("cannot build {}", other.label()) }),
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "snake_case")]
pub enum SessionPhase {
    AwaitingActions { round: u32, phase: Phase, pending: Vec<PlayerId> },
    Terminal,
    Aborted { reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SubmitError {
    #[error("the session is over")]
    Finished,
    #[error("player {0} does not exist")]
    UnknownPlayer(PlayerId),
    #[error("player {0} is not expected to act now")]
    NotYourTurn(PlayerId),
    #[error("player {0} already acted this round")]
    AlreadySubmitted(PlayerId),
    #[error("illegal move: {0}")]
    Illegal(IllegalReason),
}

/// One running match: the engine, its seats and the log so far.
pub struct Session {
    pub id: String,
    game: Box<dyn Game>,
    seats: Vec<Seat>,
    pending: BTreeMap<PlayerId, (Action, bool)>,
    log: MatchLog,
    step_started: Instant,
}

impl Session {
    pub fn new(id: &str, config: MatchConfig, options: &RunOptions) -> Result<Self, OrchestratorError> {
        config.validate().map_err(ConfigError::Invalid)?;
        let seats = build_agents(&config, options)?;
        Ok(Self::with_seats(id, config, seats))
    }

    /// A session with caller-supplied agents. `config` must be valid.
    pub fn with_seats(id: &str, config: MatchConfig, seats: Vec<Seat>) -> Self {
        Session {
            id: id.to_string(),
            game: new_game(&config),
            seats,
            pending: BTreeMap::new(),
            log: MatchLog::new(config),
            step_started: Instant::now(),
        }
    }

    pub fn config(&self) -> &MatchConfig {
        &self.log.config
    }

    pub fn game(&self) -> &dyn Game {
        self.game.as_ref()
    }

    pub fn log(&self) -> &MatchLog {
        &self.log
    }

    pub fn phase(&self) -> SessionPhase {
        if let Some(reason) = &self.log.invalid {
            return SessionPhase::Aborted { reason: reason.clone() };
        }
        match self.game.step() {
            None => SessionPhase::Terminal,
            Some(step) => SessionPhase::AwaitingActions {
                round: step.round,
                phase: step.phase,
                pending: step.players.into_iter().filter(|p| !self.pending.contains_key(p)).collect(),
            },
        }
    }

    pub fn is_finished(&self) -> bool {
        self.log.invalid.is_some() || self.game.is_terminal()
    }

    pub fn terminal_state(&self) -> Option<TerminalState> {
        self.game.terminal_state()
    }

    pub fn score(&self) -> Result<ScoreReport, ScoreError> {
        score(&self.log)
    }

    pub fn view(&self, player: PlayerId) -> Option<StateView> {
        if self.pending.contains_key(&player) || self.log.invalid.is_some() {
            return None;
        }
        self.game.view(player)
    }

    pub fn request(&self, player: PlayerId) -> Option<ActionRequest> {
        self.view(player).map(|v| v.request)
    }

    /// Runs automated seats until the game ends or a human seat must act.
    pub fn advance(&mut self) -> Result<(), OrchestratorError> {
        while !self.is_finished() {
            let step = self.game.step().expect("unfinished game has a step");
            let due: Vec<PlayerId> = step
                .players
                .iter()
                .copied()
                .filter(|p| !self.pending.contains_key(p) && self.seats[*p].is_some())
                .collect();
            let game = self.game.as_ref();
            let mut seats: Vec<(PlayerId, &mut Box<dyn Agent>)> = self
                .seats
                .iter_mut()
                .enumerate()
                .filter(|(p, _)| due.contains(p))
                .map(|(p, s)| (p, s.as_mut().expect("due seats are automated")))
                .collect();
            let replies: Vec<(PlayerId, Result<_, AgentError>)> = seats
                .par_iter_mut()
                .map(|(player, agent)| {
                    let view = game.view(*player).expect("acting player has a view");
                    (*player, agent.act(&ActContext { game, player: *player, view: &view }))
                })
                .collect();
            for (player, reply) in replies {
                match reply {
                    Ok(outcome) => {
                        self.pending.insert(player, (outcome.action, outcome.coerced));
                    }
                    Err(error) => {
                        self.log.invalid = Some(format!("seat {player}: {error}"));
                        return Err(OrchestratorError::AgentFailure { seat: player, error });
                    }
                }
            }
            if step.players.iter().all(|p| self.pending.contains_key(p)) {
                self.resolve_pending()?;
            } else {
                return Ok(());
            }
        }
        Ok(())
    }

    fn resolve_pending(&mut self) -> Result<(), OrchestratorError> {
        let pending = std::mem::take(&mut self.pending);
        let coerced: Vec<PlayerId> = pending.iter().filter(|(_, (_, c))| *c).map(|(p, _)| *p).collect();
        let actions: BTreeMap<PlayerId, Action> = pending.into_iter().map(|(p, (a, _))| (p, a)).collect();
        if let Err(e) = self.game.resolve(&actions) {
            self.log.invalid = Some(e.to_string());
            return Err(e.into());
        }
        let record = self.game.history().last().expect("resolve records the step");
        self.log.rounds.push(LogRound::from_record(record, coerced));
        if self.game.is_terminal() {
            self.log.terminal = self.game.terminal_state();
        }
        self.step_started = Instant::now();
        Ok(())
    }

    /// A human seat's move. Resolves the step and runs automated seats
    /// onward when it completes the step.
    pub fn submit(&mut self, player: PlayerId, action: Action) -> Result<(), SubmitError> {
        self.accept(player, action, false)
    }

    fn accept(&mut self, player: PlayerId, action: Action, coerced: bool) -> Result<(), SubmitError> {
        if self.is_finished() {
            return Err(SubmitError::Finished);
        }
        if player >= self.seats.len() {
            return Err(SubmitError::UnknownPlayer(player));
        }
        if self.pending.contains_key(&player) {
            return Err(SubmitError::AlreadySubmitted(player));
        }
        match self.game.legal(player, &action) {
            Ok(()) => {}
            Err(IllegalReason::NotYourTurn) => return Err(SubmitError::NotYourTurn(player)),
            Err(IllegalReason::GameOver) => return Err(SubmitError::Finished),
            Err(reason) => return Err(SubmitError::Illegal(reason)),
        }
        self.pending.insert(player, (action, coerced));
        // Failures are recorded in the log and surface through `phase()`.
        let _ = self.advance();
        Ok(())
    }

    /// Substitutes a random legal move for human seats that have exceeded
    /// their timeout in the current step. Returns the seats affected.
    pub fn expire_overdue(&mut self) -> Vec<PlayerId> {
        let SessionPhase::AwaitingActions { round, pending, .. } = self.phase() else { return Vec::new() };
        let elapsed = self.step_started.elapsed();
        let overdue: Vec<PlayerId> = pending
            .into_iter()
            .filter(|p| match &self.config().roster[*p] {
                AgentSpec::Human { timeout_ms: Some(ms) } => elapsed >= Duration::from_millis(*ms),
                _ => false,
            })
            .collect();
        let mut expired = Vec::new();
        for player in overdue {
            let Some(request) = self.game.request(player) else { continue };
            let mut rng = rng_stream(self.config().seed, purpose::AGENT_FALLBACK, u64::from(round), player as u64);
            let action = random_action(&request, &mut rng);
            if self.accept(player, action, true).is_ok() {
                expired.push(player);
            }
        }
        expired
    }
}

/// Outcome of an all-automated match.
pub struct MatchRun {
    pub log: MatchLog,
    pub score: Result<ScoreReport, ScoreError>,
}

/// Plays a match with no human seats to the end.
pub fn run_match(config: &MatchConfig, options: &RunOptions) -> Result<MatchRun, OrchestratorError> {
    if let Some(seat) = config.roster.iter().position(AgentSpec::is_human) {
        return Err(OrchestratorError::HumanSeat { seat });
    }
    let mut session = Session::new("run", config.clone(), options)?;
    match session.advance() {
        Ok(()) | Err(OrchestratorError::AgentFailure { .. }) => {}
        Err(e) => return Err(e),
    }
    let score = session.score();
    Ok(MatchRun { log: session.log, score })
}
