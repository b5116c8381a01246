//! Game engines.
//!
//! Every game implements [`Game`]. Simultaneous games share the
//! [`Simultaneous`] driver and only supply their round rules; the two
//! sequential games drive their own turn structure.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::action::{Action, ActionRequest, IllegalReason};
use crate::config::{GameKind, MatchConfig, PlayerId, PromptVersion};
use crate::rational::Rational;

mod auction;
mod bar;
mod diner;
mod dollar;
mod guess;
mod pirate;
mod public_goods;
mod royale;
pub mod templates;

pub use auction::{auction_valuation, resolve_auction};
pub use bar::resolve_bar;
pub use diner::resolve_diner;
pub use dollar::resolve_dollar;
pub use guess::resolve_guess;
pub use pirate::{resolve_pirate_vote, PirateGame};
pub use public_goods::resolve_public_goods;
pub use royale::{resolve_shot, shooting_order, BattleRoyale};

use templates::{Template, Vars};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Simultaneous,
    Turn,
    Proposal,
    Vote,
}

/// Who must act next.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Step {
    pub round: u32,
    pub phase: Phase,
    pub players: Vec<PlayerId>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "game", rename_all = "snake_case")]
pub enum RoundOutcome {
    Guess {
        average: Rational,
        target: Rational,
        winners: Vec<PlayerId>,
        winning_numbers: Vec<i64>,
    },
    Bar {
        goers: usize,
        stayers: usize,
        crowded: bool,
        utilities: Vec<Rational>,
    },
    Dollar {
        total: u64,
        exceeded: bool,
        payouts: Vec<u64>,
    },
    PublicGoods {
        contributions: Vec<u64>,
        pot: u64,
        gain: Rational,
        balances: Vec<Rational>,
    },
    Diner {
        costly: usize,
        cheap: usize,
        total_cost: Rational,
        share: Rational,
        utilities: Vec<Rational>,
    },
    Auction {
        valuations: Vec<u64>,
        winner: PlayerId,
        winning_bid: u64,
        price: u64,
        utilities: Vec<u64>,
    },
    Shot {
        actor: PlayerId,
        target: Option<PlayerId>,
        hit: bool,
        alive: Vec<PlayerId>,
    },
    PirateProposal {
        proposer: PlayerId,
        seats: Vec<PlayerId>,
        allocation: Vec<u64>,
    },
    PirateVote {
        proposer: PlayerId,
        accepts: usize,
        alive: usize,
        accepted: bool,
        eliminated: Option<PlayerId>,
    },
}

/// One resolved step.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: u32,
    pub phase: Phase,
    pub actions: BTreeMap<PlayerId, Action>,
    pub outcome: RoundOutcome,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminalReason {
    RoundsComplete,
    LastSurvivor,
    TurnCap,
    PlanAccepted,
    LastPirate,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TerminalState {
    pub reason: TerminalReason,
    pub rounds: u32,
    /// Accumulated payoff per player (wins, utility, tokens or gold).
    pub totals: Vec<Rational>,
    pub survivors: Vec<PlayerId>,
}

/// Game facts a scripted agent may read for the current step.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ViewInfo {
    None,
    Balance { balance: Rational },
    Valuation { valuation: u64 },
    /// Alive players in shooting order with their hit rates.
    Royale { alive: Vec<(PlayerId, Rational)> },
    Pirate { alive: Vec<PlayerId>, proposer: PlayerId, proposal: Option<Vec<u64>> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateView {
    pub player: PlayerId,
    pub round: u32,
    pub phase: Phase,
    pub request: ActionRequest,
    pub info: ViewInfo,
}

/// A past step as the player saw it. `echo` is the player's own reply.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistoryBlock {
    pub before_echo: String,
    pub echo: Option<String>,
    pub after_echo: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Observation {
    pub system: String,
    pub history: Vec<HistoryBlock>,
    /// Present only when the player must act now.
    pub request: Option<String>,
}

impl Observation {
    /// Plain-text rendering for human players.
    pub fn to_text(&self) -> String {
        let mut parts = vec![self.system.clone()];
        for block in &self.history {
            let mut lines = Vec::new();
            if !block.before_echo.is_empty() {
                lines.push(block.before_echo.clone());
            }
            if let Some(echo) = &block.echo {
                lines.push(echo.clone());
            }
            if !block.after_echo.is_empty() {
                lines.push(block.after_echo.clone());
            }
            parts.push(lines.join("\n"));
        }
        if let Some(req) = &self.request {
            parts.push(req.clone());
        }
        parts.join("\n\n")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, thiserror::Error)]
#[serde(tag = "error", rename_all = "snake_case")]
pub enum ResolveError {
    #[error("the game is over")]
    GameOver,
    #[error("missing actions from players {players:?}")]
    Missing { players: Vec<PlayerId> },
    #[error("player {player} is not expected to act")]
    Unexpected { player: PlayerId },
    #[error("illegal action from player {player}: {reason}")]
    Illegal { player: PlayerId, reason: IllegalReason },
}

pub trait Game: Send + Sync + fmt::Debug {
    fn config(&self) -> &MatchConfig;

    fn kind(&self) -> GameKind {
        self.config().kind
    }

    /// `None` once the game is over.
    fn step(&self) -> Option<Step>;

    /// Legal-action schema for `player`, if they must act now.
    fn request(&self, player: PlayerId) -> Option<ActionRequest>;

    fn view(&self, player: PlayerId) -> Option<StateView>;

    fn legal(&self, player: PlayerId, action: &Action) -> Result<(), IllegalReason> {
        let step = self.step().ok_or(IllegalReason::GameOver)?;
        if !step.players.contains(&player) {
            return Err(IllegalReason::NotYourTurn);
        }
        let request = self.request(player).ok_or(IllegalReason::NotYourTurn)?;
        request.check(action, player)
    }

    /// Resolves the current step from one action per expected player.
    fn resolve(&mut self, actions: &BTreeMap<PlayerId, Action>) -> Result<RoundOutcome, ResolveError>;

    fn history(&self) -> &[RoundRecord];

    fn is_terminal(&self) -> bool {
        self.step().is_none()
    }

    fn terminal_state(&self) -> Option<TerminalState>;

    fn render_observation(&self, player: PlayerId, version: PromptVersion) -> Observation;

    fn clone_box(&self) -> Box<dyn Game>;
}

impl Clone for Box<dyn Game> {
    fn clone(&self) -> Self {
        self.clone_box()
    }
}

/// Checks that `actions` covers exactly the current step's players legally.
pub fn check_submission(game: &dyn Game, actions: &BTreeMap<PlayerId, Action>) -> Result<Step, ResolveError> {
    let step = game.step().ok_or(ResolveError::GameOver)?;
    if let Some(p) = actions.keys().find(|p| !step.players.contains(p)) {
        return Err(ResolveError::Unexpected { player: *p });
    }
    let missing: Vec<PlayerId> = step.players.iter().copied().filter(|p| !actions.contains_key(p)).collect();
    if !missing.is_empty() {
        return Err(ResolveError::Missing { players: missing });
    }
    for (player, action) in actions {
        game.legal(*player, action).map_err(|reason| ResolveError::Illegal { player: *player, reason })?;
    }
    Ok(step)
}

type Constructor = fn(&MatchConfig) -> Box<dyn Game>;

fn registry() -> &'static [(GameKind, Constructor)] {
    &[
        (GameKind::GuessAverage, |c| Box::new(Simultaneous::new(c.clone(), guess::GuessRules))),
        (GameKind::ElFarolBar, |c| Box::new(Simultaneous::new(c.clone(), bar::BarRules))),
        (GameKind::DivideDollar, |c| Box::new(Simultaneous::new(c.clone(), dollar::DollarRules))),
        (GameKind::PublicGoods, |c| Box::new(Simultaneous::new(c.clone(), public_goods::PublicGoodsRules::new(c)))),
        (GameKind::DinersDilemma, |c| Box::new(Simultaneous::new(c.clone(), diner::DinerRules))),
        (GameKind::SealedBidAuction, |c| Box::new(Simultaneous::new(c.clone(), auction::AuctionRules))),
        (GameKind::BattleRoyale, |c| Box::new(BattleRoyale::new(c.clone()))),
        (GameKind::PirateGame, |c| Box::new(PirateGame::new(c.clone()))),
    ]
}

/// Builds the engine for `config.kind`. The config is assumed validated.
pub fn new_game(config: &MatchConfig) -> Box<dyn Game> {
    let (_, build) = registry()
        .iter()
        .find(|(k, _)| *k == config.kind)
        .expect("every game kind is registered");
    build(config)
}

pub fn ordinal(n: usize) -> String {
    let suffix = match (n % 10, n % 100) {
        (_, 11..=13) => "th",
        (1, _) => "st",
        (2, _) => "nd",
        (3, _) => "rd",
        _ => "th",
    };
    format!("{n}{suffix}")
}

pub(crate) fn join_numbers<T: ToString>(values: impl IntoIterator<Item = T>) -> String {
    values.into_iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", ")
}

pub(crate) fn no_label(p: PlayerId) -> String {
    (p + 1).to_string()
}

/// Per-game rules for games where every player acts each round.
pub(crate) trait RoundRules: Clone + Send + Sync + fmt::Debug + 'static {
    fn request(&self, cfg: &MatchConfig, round: u32, player: PlayerId) -> ActionRequest;

    fn info(&self, _cfg: &MatchConfig, _round: u32, _player: PlayerId) -> ViewInfo {
        ViewInfo::None
    }

    /// `actions` is indexed by player.
    fn resolve(&mut self, cfg: &MatchConfig, round: u32, actions: &[Action]) -> RoundOutcome;

    fn totals(&self, cfg: &MatchConfig, history: &[RoundRecord]) -> Vec<Rational>;

    fn system_vars(&self, cfg: &MatchConfig, tpl: &Template) -> Vars;

    fn request_vars(&self, cfg: &MatchConfig, round: u32, player: PlayerId) -> Vars;

    fn round_block(&self, cfg: &MatchConfig, tpl: &Template, record: &RoundRecord, player: PlayerId) -> HistoryBlock;
}

#[derive(Clone, Debug)]
pub(crate) struct Simultaneous<R> {
    config: MatchConfig,
    rules: R,
    history: Vec<RoundRecord>,
}

impl<R: RoundRules> Simultaneous<R> {
    pub(crate) fn new(config: MatchConfig, rules: R) -> Self {
        Simultaneous { config, rules, history: Vec::new() }
    }

    fn next_round(&self) -> Option<u32> {
        let next = self.history.len() as u32 + 1;
        (next <= self.config.n_rounds).then_some(next)
    }
}

impl<R: RoundRules> Game for Simultaneous<R> {
    fn config(&self) -> &MatchConfig {
        &self.config
    }

    fn step(&self) -> Option<Step> {
        self.next_round().map(|round| Step {
            round,
            phase: Phase::Simultaneous,
            players: (0..self.config.n_players).collect(),
        })
    }

    fn request(&self, player: PlayerId) -> Option<ActionRequest> {
        let round = self.next_round()?;
        (player < self.config.n_players).then(|| self.rules.request(&self.config, round, player))
    }

    fn view(&self, player: PlayerId) -> Option<StateView> {
        let round = self.next_round()?;
        let request = self.request(player)?;
        Some(StateView {
            player,
            round,
            phase: Phase::Simultaneous,
            request,
            info: self.rules.info(&self.config, round, player),
        })
    }

    fn resolve(&mut self, actions: &BTreeMap<PlayerId, Action>) -> Result<RoundOutcome, ResolveError> {
        let step = check_submission(self, actions)?;
        let ordered: Vec<Action> = actions.values().cloned().collect();
        let outcome = self.rules.resolve(&self.config, step.round, &ordered);
        self.history.push(RoundRecord {
            round: step.round,
            phase: Phase::Simultaneous,
            actions: actions.clone(),
            outcome: outcome.clone(),
        });
        Ok(outcome)
    }

    fn history(&self) -> &[RoundRecord] {
        &self.history
    }

    fn terminal_state(&self) -> Option<TerminalState> {
        if self.next_round().is_some() {
            return None;
        }
        Some(TerminalState {
            reason: TerminalReason::RoundsComplete,
            rounds: self.history.len() as u32,
            totals: self.rules.totals(&self.config, &self.history),
            survivors: (0..self.config.n_players).collect(),
        })
    }

    fn render_observation(&self, player: PlayerId, version: PromptVersion) -> Observation {
        let tpl = templates::template(self.config.kind, version);
        let system = tpl.fill("system", &self.rules.system_vars(&self.config, tpl));
        let history = self
            .history
            .iter()
            .map(|record| self.rules.round_block(&self.config, tpl, record, player))
            .collect();
        let request = self
            .next_round()
            .map(|round| tpl.fill("request", &self.rules.request_vars(&self.config, round, player)));
        Observation { system, history, request }
    }

    fn clone_box(&self) -> Box<dyn Game> {
        Box::new(self.clone())
    }
}

/// Echo of `player`'s own action in `record`, in reply format.
pub(crate) fn own_echo(record: &RoundRecord, player: PlayerId) -> Option<String> {
    record.actions.get(&player).map(|a| a.echo(&[], no_label))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordinals() {
        let got: Vec<String> = [1, 2, 3, 4, 11, 12, 13, 21, 22, 101].iter().map(|n| ordinal(*n)).collect();
        assert_eq!(got, ["1st", "2nd", "3rd", "4th", "11th", "12th", "13th", "21st", "22nd", "101st"]);
    }
}
