//! Catalog of scripted strategies, keyed by stable name.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use serde_json::Value;

use crate::action::{Action, BarChoice};
use crate::config::{GameKind, GameParams, MatchConfig};
use crate::games::{StateView, ViewInfo};
use crate::rng::{purpose, Stream};

use super::oracle::{reference_strategy, rotation_attendees, rotation_goes, StrategyProfile};
use super::random::random_action;

pub type StrategyParams = BTreeMap<String, Value>;

/// A scripted policy. Implementations are stateless: every move is a
/// function of the config, the structured view and the seat's substream.
pub trait Strategy: Send + Sync {
    fn name(&self) -> &'static str;

    fn supports(&self, kind: GameKind) -> bool;

    fn check_params(&self, _config_kind: GameKind, _params: &StrategyParams) -> Result<(), String> {
        Ok(())
    }

    /// Substream label for this strategy's draws.
    fn purpose(&self) -> &'static str {
        purpose::AGENT_ORACLE
    }

    fn act(&self, config: &MatchConfig, params: &StrategyParams, view: &StateView, rng: &mut Stream) -> Action;
}

pub struct StrategyRegistry {
    entries: BTreeMap<&'static str, Box<dyn Strategy>>,
}

impl StrategyRegistry {
    pub fn empty() -> Self {
        StrategyRegistry { entries: BTreeMap::new() }
    }

    pub fn register(&mut self, strategy: Box<dyn Strategy>) {
        self.entries.insert(strategy.name(), strategy);
    }

    pub fn get(&self, name: &str) -> Option<&dyn Strategy> {
        self.entries.get(name).map(|s| s.as_ref())
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.entries.keys().copied()
    }

    /// The shipped catalog.
    pub fn builtin() -> &'static StrategyRegistry {
        static REGISTRY: OnceLock<StrategyRegistry> = OnceLock::new();
        REGISTRY.get_or_init(|| {
            let mut r = StrategyRegistry::empty();
            r.register(Box::new(Oracle));
            r.register(Box::new(Random));
            r.register(Box::new(ConstantBid));
            r.register(Box::new(Constant { name: "free_rider", kind: GameKind::PublicGoods, action: Action::Contribution(0) }));
            r.register(Box::new(Constant { name: "always_go", kind: GameKind::ElFarolBar, action: Action::BarDecision(BarChoice::Go) }));
            r.register(Box::new(Constant { name: "always_stay", kind: GameKind::ElFarolBar, action: Action::BarDecision(BarChoice::Stay) }));
            r.register(Box::new(Constant { name: "zero_bidder", kind: GameKind::SealedBidAuction, action: Action::AuctionBid(0) }));
            r.register(Box::new(TruthfulBidder));
            r.register(Box::new(RotationBar));
            r
        })
    }
}

struct Oracle;

impl Strategy for Oracle {
    fn name(&self) -> &'static str {
        "oracle"
    }

    fn supports(&self, _kind: GameKind) -> bool {
        true
    }

    fn check_params(&self, kind: GameKind, params: &StrategyParams) -> Result<(), String> {
        for key in params.keys() {
            if key != "shading" || kind != GameKind::SealedBidAuction {
                return Err(format!("oracle takes no parameter {key:?} in {kind}"));
            }
        }
        if let Some(v) = params.get("shading") {
            let factor = parse_rational(v)?;
            if factor < crate::rational::Rational::ZERO || factor > crate::rational::Rational::ONE {
                return Err("shading must lie in [0, 1]".into());
            }
        }
        Ok(())
    }

    fn act(&self, config: &MatchConfig, params: &StrategyParams, view: &StateView, rng: &mut Stream) -> Action {
        let mut profile = reference_strategy(config);
        if let (StrategyProfile::ShadedBid { factor }, Some(v)) = (&mut profile, params.get("shading")) {
            if let Ok(f) = parse_rational(v) {
                *factor = f;
            }
        }
        profile.act(view, rng)
    }
}

fn parse_rational(v: &Value) -> Result<crate::rational::Rational, String> {
    serde_json::from_value(v.clone()).map_err(|e| format!("expected a number: {e}"))
}

struct Random;

impl Strategy for Random {
    fn name(&self) -> &'static str {
        "random"
    }

    fn supports(&self, _kind: GameKind) -> bool {
        true
    }

    fn purpose(&self) -> &'static str {
        purpose::AGENT_RANDOM
    }

    fn act(&self, _config: &MatchConfig, _params: &StrategyParams, view: &StateView, rng: &mut Stream) -> Action {
        random_action(&view.request, rng)
    }
}

/// `constant_bid { value }`: the same bid every round of Divide the Dollar.
struct ConstantBid;

impl ConstantBid {
    fn value(params: &StrategyParams) -> Result<u64, String> {
        params
            .get("value")
            .and_then(Value::as_u64)
            .ok_or_else(|| "constant_bid needs a non-negative integer `value`".to_string())
    }
}

impl Strategy for ConstantBid {
    fn name(&self) -> &'static str {
        "constant_bid"
    }

    fn supports(&self, kind: GameKind) -> bool {
        kind == GameKind::DivideDollar
    }

    fn check_params(&self, _kind: GameKind, params: &StrategyParams) -> Result<(), String> {
        Self::value(params).map(|_| ())
    }

    fn act(&self, _config: &MatchConfig, params: &StrategyParams, _view: &StateView, _rng: &mut Stream) -> Action {
        Action::Bid(Self::value(params).unwrap_or(0))
    }
}

struct Constant {
    name: &'static str,
    kind: GameKind,
    action: Action,
}

impl Strategy for Constant {
    fn name(&self) -> &'static str {
        self.name
    }

    fn supports(&self, kind: GameKind) -> bool {
        kind == self.kind
    }

    fn act(&self, _config: &MatchConfig, _params: &StrategyParams, _view: &StateView, _rng: &mut Stream) -> Action {
        self.action.clone()
    }
}

struct TruthfulBidder;

impl Strategy for TruthfulBidder {
    fn name(&self) -> &'static str {
        "truthful_bidder"
    }

    fn supports(&self, kind: GameKind) -> bool {
        kind == GameKind::SealedBidAuction
    }

    fn act(&self, _config: &MatchConfig, _params: &StrategyParams, view: &StateView, _rng: &mut Stream) -> Action {
        match view.info {
            ViewInfo::Valuation { valuation } => Action::AuctionBid(valuation),
            _ => Action::AuctionBid(0),
        }
    }
}

/// Deterministic Bar schedule: exactly `floor(R N)` attendees every round.
struct RotationBar;

impl Strategy for RotationBar {
    fn name(&self) -> &'static str {
        "rotation_bar"
    }

    fn supports(&self, kind: GameKind) -> bool {
        kind == GameKind::ElFarolBar
    }

    fn act(&self, config: &MatchConfig, _params: &StrategyParams, view: &StateView, _rng: &mut Stream) -> Action {
        let GameParams::Bar(p) = &config.params else {
            return Action::BarDecision(BarChoice::Stay);
        };
        let n = config.n_players;
        let go = rotation_goes(view.player, view.round, n, rotation_attendees(p.capacity_ratio, n));
        Action::BarDecision(if go { BarChoice::Go } else { BarChoice::Stay })
    }
}
