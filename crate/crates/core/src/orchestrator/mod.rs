//! Match sessions, replay, and experiment sweeps.

mod experiment;
mod session;

pub use experiment::{
    run_experiment, Axis, CellResult, ExperimentError, ExperimentPlan, ExperimentReport, Manifest, ManifestCell,
};
pub use session::{build_agents, run_match, MatchRun, OrchestratorError, RunOptions, Seat, Session, SessionPhase, SubmitError};

use crate::games::new_game;
use crate::matchlog::{LogRound, MatchLog};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ReplayError {
    #[error("invalid config in log: {0}")]
    Config(String),
    #[error("replay diverges at log line {index}: {detail}")]
    Divergence { index: usize, detail: String },
}

/// Re-resolves every logged step from its recorded actions and checks the
/// engine reproduces the logged outcomes and terminal state.
pub fn replay(log: &MatchLog) -> Result<MatchLog, ReplayError> {
    log.config.validate().map_err(|v| ReplayError::Config(format!("{v:?}")))?;
    let mut game = new_game(&log.config);
    let mut out = MatchLog::new(log.config.clone());
    for (index, logged) in log.rounds.iter().enumerate() {
        let diverge = |detail: String| ReplayError::Divergence { index: index + 2, detail };
        let step = game.step().ok_or_else(|| diverge("engine finished before the log".into()))?;
        if step.round != logged.round || step.phase != logged.phase {
            return Err(diverge(format!(
                "engine is at round {} ({:?}), log has round {} ({:?})",
                step.round, step.phase, logged.round, logged.phase
            )));
        }
        let outcome = game.resolve(&logged.actions).map_err(|e| diverge(e.to_string()))?;
        if outcome != logged.outcome {
            return Err(diverge(format!("outcome {outcome:?} differs from logged {:?}", logged.outcome)));
        }
        let record = game.history().last().expect("resolved step is recorded");
        out.rounds.push(LogRound::from_record(record, logged.coerced.clone()));
    }
    out.terminal = game.terminal_state();
    out.invalid = log.invalid.clone();
    if out.terminal != log.terminal {
        return Err(ReplayError::Divergence {
            index: log.rounds.len() + 2,
            detail: format!("terminal state {:?} differs from logged {:?}", out.terminal, log.terminal),
        });
    }
    Ok(out)
}
