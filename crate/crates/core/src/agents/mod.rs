//! Agents: who decides each seat's moves.

use serde::{Deserialize, Serialize};

use crate::action::Action;
use crate::config::{ConfigViolation, GameKind, PlayerId};
use crate::games::{Game, StateView};
use crate::llm::LlmSpec;
use crate::rng::rng_stream;

mod oracle;
mod random;
mod registry;

pub use oracle::{
    default_shading, pirate_backward_induction, pirate_optimal_proposal, pirate_optimal_vote, reference_strategy,
    rotation_attendees, rotation_goes, strongest_opponent, PirateSuffix, StrategyProfile,
};
pub use random::random_action;
pub use registry::{Strategy, StrategyParams, StrategyRegistry};

/// Declaration of one seat's agent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AgentSpec {
    Oracle {
        #[serde(default, skip_serializing_if = "StrategyParams::is_empty")]
        params: StrategyParams,
    },
    Random,
    Fixed {
        strategy: String,
        #[serde(default, skip_serializing_if = "StrategyParams::is_empty")]
        params: StrategyParams,
    },
    Llm(LlmSpec),
    Human {
        /// Move timeout; `None` waits forever.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        timeout_ms: Option<u64>,
    },
    /// Plays a fixed list of moves in order.
    Scripted { actions: Vec<Action> },
}

impl Eq for AgentSpec {}

impl AgentSpec {
    pub fn oracle() -> Self {
        AgentSpec::Oracle { params: StrategyParams::new() }
    }

    pub fn random() -> Self {
        AgentSpec::Random
    }

    pub fn fixed(strategy: &str, params: StrategyParams) -> Self {
        AgentSpec::Fixed { strategy: strategy.to_string(), params }
    }

    pub fn human() -> Self {
        AgentSpec::Human { timeout_ms: None }
    }

    /// Short name for leaderboards and logs.
    pub fn label(&self) -> String {
        match self {
            AgentSpec::Oracle { .. } => "oracle".into(),
            AgentSpec::Random => "random".into(),
            AgentSpec::Fixed { strategy, .. } => format!("fixed:{strategy}"),
            AgentSpec::Llm(spec) => spec.endpoint.model.clone(),
            AgentSpec::Human { .. } => "human".into(),
            AgentSpec::Scripted { .. } => "scripted".into(),
        }
    }

    pub fn is_human(&self) -> bool {
        matches!(self, AgentSpec::Human { .. })
    }

    pub fn validate(&self, seat: usize, kind: GameKind) -> Result<(), ConfigViolation> {
        let invalid = |rule: String| ConfigViolation::InvalidAgent { seat, rule };
        let check = |name: &str, params: &StrategyParams| {
            let strategy = StrategyRegistry::builtin()
                .get(name)
                .ok_or_else(|| ConfigViolation::UnknownStrategy { seat, name: name.to_string() })?;
            if !strategy.supports(kind) {
                return Err(invalid(format!("strategy {name} does not play {kind}")));
            }
            strategy.check_params(kind, params).map_err(invalid)
        };
        match self {
            AgentSpec::Oracle { params } => check("oracle", params),
            AgentSpec::Random => Ok(()),
            AgentSpec::Fixed { strategy, params } => check(strategy, params),
            AgentSpec::Llm(spec) => spec.validate().map_err(invalid),
            AgentSpec::Human { .. } => Ok(()),
            AgentSpec::Scripted { actions } => {
                if actions.is_empty() {
                    Err(invalid("scripted agent needs at least one action".into()))
                } else {
                    Ok(())
                }
            }
        }
    }
}

pub struct ActContext<'a> {
    pub game: &'a dyn Game,
    pub player: PlayerId,
    pub view: &'a StateView,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActOutcome {
    pub action: Action,
    /// The agent failed to produce a legal move and a fallback was substituted.
    pub coerced: bool,
}

impl ActOutcome {
    pub fn chosen(action: Action) -> Self {
        ActOutcome { action, coerced: false }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum AgentError {
    #[error("agent failure: {0}")]
    Failure(String),
    #[error("agent timed out")]
    Timeout,
    #[error("seat is controlled by a human")]
    HumanSeat,
}

pub trait Agent: Send {
    fn act(&mut self, ctx: &ActContext<'_>) -> Result<ActOutcome, AgentError>;
}

/// A registry strategy bound to one seat.
pub struct StrategyAgent {
    strategy: &'static dyn Strategy,
    params: StrategyParams,
}

impl StrategyAgent {
    pub fn new(name: &str, params: StrategyParams) -> Option<Self> {
        StrategyRegistry::builtin().get(name).map(|strategy| StrategyAgent { strategy, params })
    }
}

impl Agent for StrategyAgent {
    fn act(&mut self, ctx: &ActContext<'_>) -> Result<ActOutcome, AgentError> {
        let config = ctx.game.config();
        let mut rng = rng_stream(config.seed, self.strategy.purpose(), u64::from(ctx.view.round), ctx.player as u64);
        Ok(ActOutcome::chosen(self.strategy.act(config, &self.params, ctx.view, &mut rng)))
    }
}

/// Replays a move list; fails once it runs out.
pub struct ScriptedAgent {
    actions: std::vec::IntoIter<Action>,
}

impl ScriptedAgent {
    pub fn new(actions: Vec<Action>) -> Self {
        ScriptedAgent { actions: actions.into_iter() }
    }
}

impl Agent for ScriptedAgent {
    fn act(&mut self, _ctx: &ActContext<'_>) -> Result<ActOutcome, AgentError> {
        self.actions
            .next()
            .map(ActOutcome::chosen)
            .ok_or_else(|| AgentError::Failure("scripted agent ran out of moves".into()))
    }
}

/// Builds the agent for a non-LLM, non-human seat.
pub fn scripted_agent(spec: &AgentSpec) -> Option<Box<dyn Agent>> {
    match spec {
        AgentSpec::Oracle { params } => StrategyAgent::new("oracle", params.clone()).map(|a| Box::new(a) as Box<dyn Agent>),
        AgentSpec::Random => StrategyAgent::new("random", StrategyParams::new()).map(|a| Box::new(a) as Box<dyn Agent>),
        AgentSpec::Fixed { strategy, params } => {
            StrategyAgent::new(strategy, params.clone()).map(|a| Box::new(a) as Box<dyn Agent>)
        }
        AgentSpec::Scripted { actions } => Some(Box::new(ScriptedAgent::new(actions.clone()))),
        AgentSpec::Llm(_) | AgentSpec::Human { .. } => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_fixed_strategy_is_rejected() {
        let spec = AgentSpec::fixed("tit_for_tat", StrategyParams::new());
        assert_eq!(
            spec.validate(3, GameKind::DivideDollar),
            Err(ConfigViolation::UnknownStrategy { seat: 3, name: "tit_for_tat".into() })
        );
    }

    #[test]
    fn strategy_must_support_the_game() {
        let spec = AgentSpec::fixed("free_rider", StrategyParams::new());
        assert!(spec.validate(0, GameKind::PublicGoods).is_ok());
        assert!(matches!(spec.validate(0, GameKind::DivideDollar), Err(ConfigViolation::InvalidAgent { .. })));
    }

    #[test]
    fn spec_serde_shape() {
        let spec: AgentSpec =
            serde_json::from_str(r#"{"kind":"fixed","strategy":"constant_bid","params":{"value":91}}"#).unwrap();
        assert_eq!(spec.label(), "fixed:constant_bid");
        assert_eq!(serde_json::to_string(&AgentSpec::oracle()).unwrap(), r#"{"kind":"oracle"}"#);
    }
}
