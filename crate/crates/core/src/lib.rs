//! Multi-agent game-theory benchmark engine.
//!
//! Eight classic games, equilibrium oracles and scripted agents, chat-model
//! agents, scoring against optimal play, and experiment sweeps.

pub mod action;
pub mod agents;
pub mod config;
pub mod games;
pub mod llm;
pub mod matchlog;
pub mod orchestrator;
pub mod rational;
pub mod rng;
pub mod scoring;

pub use action::{Action, ActionRequest, BarChoice, Constraint, DishChoice, IllegalReason, RequestKind, Vote};
pub use agents::AgentSpec;
pub use config::{GameKind, GameParams, MatchConfig, PlayerId, PromptVersion};
pub use games::{new_game, Game};
pub use matchlog::MatchLog;
pub use rational::Rational;
pub use scoring::{score, ScoreReport};
