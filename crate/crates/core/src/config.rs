//! Match configuration: game kinds, per-game parameters, and validation.
//!
//! The canonical config file is TOML with the fields `game`, `params.*`,
//! `n_players`, `n_rounds`, `seed`, `prompt_version`, `temperature` and
//! `agents[]`. A roster entry may carry `count = k` to fill `k` seats.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::agents::AgentSpec;
use crate::rational::Rational;

/// 0-based seat index. Prompts render `index + 1`.
pub type PlayerId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GameKind {
    #[serde(alias = "guess", alias = "guess_2_3")]
    GuessAverage,
    #[serde(alias = "bar", alias = "el_farol")]
    ElFarolBar,
    #[serde(alias = "dollar")]
    DivideDollar,
    #[serde(alias = "pgg", alias = "public_goods_game")]
    PublicGoods,
    #[serde(alias = "diner", alias = "diner_dilemma")]
    DinersDilemma,
    #[serde(alias = "auction")]
    SealedBidAuction,
    #[serde(alias = "royale")]
    BattleRoyale,
    #[serde(alias = "pirate")]
    PirateGame,
}

impl GameKind {
    pub const ALL: [GameKind; 8] = [
        GameKind::GuessAverage,
        GameKind::ElFarolBar,
        GameKind::DivideDollar,
        GameKind::PublicGoods,
        GameKind::DinersDilemma,
        GameKind::SealedBidAuction,
        GameKind::BattleRoyale,
        GameKind::PirateGame,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GameKind::GuessAverage => "guess_average",
            GameKind::ElFarolBar => "el_farol_bar",
            GameKind::DivideDollar => "divide_dollar",
            GameKind::PublicGoods => "public_goods",
            GameKind::DinersDilemma => "diners_dilemma",
            GameKind::SealedBidAuction => "sealed_bid_auction",
            GameKind::BattleRoyale => "battle_royale",
            GameKind::PirateGame => "pirate_game",
        }
    }

    /// Sequential games end by rule; `n_rounds` does not apply to them.
    pub fn is_sequential(self) -> bool {
        matches!(self, GameKind::BattleRoyale | GameKind::PirateGame)
    }

    pub fn default_params(self, n_players: usize) -> GameParams {
        match self {
            GameKind::GuessAverage => GameParams::Guess(GuessParams::default()),
            GameKind::ElFarolBar => GameParams::Bar(BarParams::default()),
            GameKind::DivideDollar => GameParams::Dollar(DollarParams::default()),
            GameKind::PublicGoods => GameParams::PublicGoods(PublicGoodsParams::default()),
            GameKind::DinersDilemma => GameParams::Diner(DinerParams::default()),
            GameKind::SealedBidAuction => GameParams::Auction(AuctionParams::default()),
            GameKind::BattleRoyale => GameParams::Royale(RoyaleParams::vanilla(n_players)),
            GameKind::PirateGame => GameParams::Pirate(PirateParams::default()),
        }
    }
}

impl fmt::Display for GameKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GameKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let quoted = serde_json::Value::String(s.trim().to_ascii_lowercase().replace('-', "_"));
        serde_json::from_value(quoted).map_err(|_| format!("unknown game {s:?}"))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GuessParams {
    pub min: i64,
    pub max: i64,
    pub ratio: Rational,
}

impl Default for GuessParams {
    fn default() -> Self {
        GuessParams { min: 0, max: 100, ratio: Rational::new(2, 3) }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InfoMode {
    Explicit,
    Implicit,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BarParams {
    pub capacity_ratio: Rational,
    pub u_go_uncrowded: Rational,
    pub u_go_crowded: Rational,
    pub u_home: Rational,
    pub info_mode: InfoMode,
    /// Accept utilities that break `crowded < home < uncrowded`.
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub allow_unordered_utilities: bool,
}

impl Default for BarParams {
    fn default() -> Self {
        BarParams {
            capacity_ratio: Rational::new(3, 5),
            u_go_uncrowded: Rational::from_int(10),
            u_go_crowded: Rational::ZERO,
            u_home: Rational::from_int(5),
            info_mode: InfoMode::Implicit,
            allow_unordered_utilities: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DollarParams {
    pub gold: u64,
}

impl Default for DollarParams {
    fn default() -> Self {
        DollarParams { gold: 100 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PublicGoodsParams {
    pub multiplier: Rational,
    pub endowment: u64,
    /// Top every balance up by `endowment` after each round.
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub fresh_endowment: bool,
}

impl Default for PublicGoodsParams {
    fn default() -> Self {
        PublicGoodsParams { multiplier: Rational::from_int(2), endowment: 20, fresh_endowment: false }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DinerParams {
    pub price_costly: Rational,
    pub price_cheap: Rational,
    pub utility_costly: Rational,
    pub utility_cheap: Rational,
}

impl Default for DinerParams {
    fn default() -> Self {
        DinerParams {
            price_costly: Rational::from_int(20),
            price_cheap: Rational::from_int(10),
            utility_costly: Rational::from_int(20),
            utility_cheap: Rational::from_int(15),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pricing {
    FirstPrice,
    SecondPrice,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AuctionParams {
    pub pricing: Pricing,
    /// Valuations are uniform integers in `1..=valuation_max`.
    pub valuation_max: u64,
}

impl Default for AuctionParams {
    fn default() -> Self {
        AuctionParams { pricing: Pricing::FirstPrice, valuation_max: 200 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RoyaleParams {
    /// One rate per seat. Empty means "35%, 40%, ... in 5% steps".
    pub hit_rates: Vec<Rational>,
    pub max_turns: u32,
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub allow_self_target: bool,
}

impl Default for RoyaleParams {
    fn default() -> Self {
        RoyaleParams { hit_rates: Vec::new(), max_turns: 100, allow_self_target: false }
    }
}

impl RoyaleParams {
    pub fn vanilla(n_players: usize) -> Self {
        RoyaleParams { hit_rates: Self::vanilla_rates(n_players), ..Default::default() }
    }

    pub fn vanilla_rates(n_players: usize) -> Vec<Rational> {
        (0..n_players).map(|i| Rational::new(35 + 5 * i as i128, 100)).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PirateParams {
    pub gold: u64,
}

impl Default for PirateParams {
    fn default() -> Self {
        PirateParams { gold: 100 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(untagged)]
pub enum GameParams {
    Guess(GuessParams),
    Bar(BarParams),
    Dollar(DollarParams),
    PublicGoods(PublicGoodsParams),
    Diner(DinerParams),
    Auction(AuctionParams),
    Royale(RoyaleParams),
    Pirate(PirateParams),
}

impl GameParams {
    pub fn kind(&self) -> GameKind {
        match self {
            GameParams::Guess(_) => GameKind::GuessAverage,
            GameParams::Bar(_) => GameKind::ElFarolBar,
            GameParams::Dollar(_) => GameKind::DivideDollar,
            GameParams::PublicGoods(_) => GameKind::PublicGoods,
            GameParams::Diner(_) => GameKind::DinersDilemma,
            GameParams::Auction(_) => GameKind::SealedBidAuction,
            GameParams::Royale(_) => GameKind::BattleRoyale,
            GameParams::Pirate(_) => GameKind::PirateGame,
        }
    }

    pub fn from_value(kind: GameKind, value: serde_json::Value) -> Result<Self, serde_json::Error> {
        use serde_json::from_value as v;
        Ok(match kind {
            GameKind::GuessAverage => GameParams::Guess(v(value)?),
            GameKind::ElFarolBar => GameParams::Bar(v(value)?),
            GameKind::DivideDollar => GameParams::Dollar(v(value)?),
            GameKind::PublicGoods => GameParams::PublicGoods(v(value)?),
            GameKind::DinersDilemma => GameParams::Diner(v(value)?),
            GameKind::SealedBidAuction => GameParams::Auction(v(value)?),
            GameKind::BattleRoyale => GameParams::Royale(v(value)?),
            GameKind::PirateGame => GameParams::Pirate(v(value)?),
        })
    }

    /// Set one parameter by its config-file name, e.g. `ratio` or `gold`.
    pub fn set(&mut self, field: &str, value: serde_json::Value) -> Result<(), String> {
        let mut current = serde_json::to_value(&*self).map_err(|e| e.to_string())?;
        let obj = current.as_object_mut().ok_or("params are not a record")?;
        if !obj.contains_key(field) && !self.optional_fields().contains(&field) {
            return Err(format!("{} has no parameter {field:?}", self.kind()));
        }
        obj.insert(field.to_string(), value);
        *self = GameParams::from_value(self.kind(), current).map_err(|e| e.to_string())?;
        Ok(())
    }

    fn optional_fields(&self) -> &'static [&'static str] {
        match self {
            GameParams::Bar(_) => &["allow_unordered_utilities"],
            GameParams::PublicGoods(_) => &["fresh_endowment"],
            GameParams::Royale(_) => &["allow_self_target"],
            _ => &[],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum PromptVersion {
    #[default]
    V1,
    V2,
    V3,
    V4,
    V5,
}

impl PromptVersion {
    pub const ALL: [PromptVersion; 5] =
        [PromptVersion::V1, PromptVersion::V2, PromptVersion::V3, PromptVersion::V4, PromptVersion::V5];

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for PromptVersion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.index() + 1)
    }
}

impl FromStr for PromptVersion {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "v1" | "1" => Ok(PromptVersion::V1),
            "v2" | "2" => Ok(PromptVersion::V2),
            "v3" | "3" => Ok(PromptVersion::V3),
            "v4" | "4" => Ok(PromptVersion::V4),
            "v5" | "5" => Ok(PromptVersion::V5),
            other => Err(format!("unknown prompt version {other:?}")),
        }
    }
}

/// One game instance's full parameterization.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawMatchConfig", into = "RawMatchConfig")]
pub struct MatchConfig {
    pub kind: GameKind,
    pub params: GameParams,
    pub n_players: usize,
    /// Round count for simultaneous games.
    pub n_rounds: u32,
    pub roster: Vec<AgentSpec>,
    pub seed: u64,
    pub prompt_version: PromptVersion,
    pub temperature: Rational,
}

impl MatchConfig {
    /// The default setting: ten seats, twenty rounds, vanilla parameters.
    pub fn vanilla(kind: GameKind, roster: Vec<AgentSpec>) -> Self {
        let n_players = roster.len();
        MatchConfig {
            kind,
            params: kind.default_params(n_players),
            n_players,
            n_rounds: 20,
            roster,
            seed: 0,
            prompt_version: PromptVersion::V1,
            temperature: Rational::ONE,
        }
    }

    /// All seats filled with the same agent.
    pub fn uniform(kind: GameKind, n_players: usize, agent: AgentSpec) -> Self {
        MatchConfig::vanilla(kind, vec![agent; n_players])
    }

    pub fn with_params(mut self, params: GameParams) -> Self {
        self.params = params;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_rounds(mut self, n_rounds: u32) -> Self {
        self.n_rounds = n_rounds;
        self
    }

    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    pub fn to_toml_string(&self) -> Result<String, ConfigError> {
        toml::to_string(self).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    pub fn from_json_str(text: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    /// Reads TOML, or JSON when the file extension is `.json`.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Io(format!("{}: {e}", path.display())))?;
        if path.extension().is_some_and(|e| e == "json") {
            Self::from_json_str(&text)
        } else {
            Self::from_toml_str(&text)
        }
    }

    pub fn guess_params(&self) -> Option<&GuessParams> {
        match &self.params {
            GameParams::Guess(p) => Some(p),
            _ => None,
        }
    }

    /// Checks every parameter invariant. On success returns non-fatal warnings.
    pub fn validate(&self) -> Result<Vec<ConfigWarning>, Vec<ConfigViolation>> {
        validate_config(self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConfigError {
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("config read error: {0}")]
    Io(String),
    #[error("invalid config: {}", join_violations(.0))]
    Invalid(Vec<ConfigViolation>),
}

fn join_violations(v: &[ConfigViolation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DinerAssumption {
    /// `x > y` and `a > b`.
    Ordering,
    /// `a - x < b - y`.
    SoloPrefersCheap,
    /// `a - x/N > b - y/N`.
    SharedPrefersCostly,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, thiserror::Error)]
#[serde(tag = "violation", rename_all = "snake_case")]
pub enum ConfigViolation {
    #[error("{field}: degenerate range (min must be < max)")]
    DegenerateRange { field: String },
    #[error("agents: roster has {got} entries but n_players = {expected}")]
    RosterSizeMismatch { expected: usize, got: usize },
    #[error("params: diner assumption violated ({assumption:?})")]
    DinerAssumptionViolated { assumption: DinerAssumption },
    #[error("params: game is {expected} but parameters belong to {got}")]
    ParamsKindMismatch { expected: GameKind, got: GameKind },
    #[error("{field}: {rule}")]
    OutOfRange { field: String, rule: String },
    #[error("agents[{seat}]: unknown strategy {name:?}")]
    UnknownStrategy { seat: usize, name: String },
    #[error("agents[{seat}]: {rule}")]
    InvalidAgent { seat: usize, rule: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfigWarning {
    pub field: String,
    pub message: String,
}

fn out_of_range(field: &str, rule: &str) -> ConfigViolation {
    ConfigViolation::OutOfRange { field: field.to_string(), rule: rule.to_string() }
}

pub fn validate_config(config: &MatchConfig) -> Result<Vec<ConfigWarning>, Vec<ConfigViolation>> {
    let mut errors = Vec::new();
    let mut warnings = Vec::new();
    let n = config.n_players;

    if config.params.kind() != config.kind {
        errors.push(ConfigViolation::ParamsKindMismatch {
            expected: config.kind,
            got: config.params.kind(),
        });
    }
    if n < 2 {
        errors.push(out_of_range("n_players", "at least two players are required"));
    }
    if config.roster.len() != n {
        errors.push(ConfigViolation::RosterSizeMismatch { expected: n, got: config.roster.len() });
    }
    if !config.kind.is_sequential() && config.n_rounds == 0 {
        errors.push(out_of_range("n_rounds", "simultaneous games need at least one round"));
    }
    if config.temperature < Rational::ZERO || config.temperature > Rational::ONE {
        errors.push(out_of_range("temperature", "must lie in [0, 1]"));
    }

    match &config.params {
        GameParams::Guess(p) => {
            if p.min >= p.max {
                errors.push(ConfigViolation::DegenerateRange { field: "params.min..params.max".into() });
            }
            if p.ratio < Rational::ZERO {
                errors.push(out_of_range("params.ratio", "must be >= 0"));
            }
        }
        GameParams::Bar(p) => {
            if p.capacity_ratio < Rational::ZERO || p.capacity_ratio > Rational::ONE {
                errors.push(out_of_range("params.capacity_ratio", "must lie in [0, 1]"));
            }
            let ordered = p.u_go_crowded < p.u_home && p.u_home < p.u_go_uncrowded;
            if !ordered && !p.allow_unordered_utilities {
                errors.push(out_of_range(
                    "params.u_home",
                    "utilities must satisfy u_go_crowded < u_home < u_go_uncrowded",
                ));
            }
        }
        GameParams::Dollar(p) => {
            if p.gold < 1 {
                errors.push(out_of_range("params.gold", "must be >= 1"));
            }
        }
        GameParams::PublicGoods(p) => {
            if p.multiplier < Rational::ZERO {
                errors.push(out_of_range("params.multiplier", "must be >= 0"));
            }
            if p.endowment < 1 {
                errors.push(out_of_range("params.endowment", "must be >= 1"));
            }
            let n_r = Rational::from(n);
            if !(p.multiplier > Rational::ONE && p.multiplier < n_r) {
                warnings.push(ConfigWarning {
                    field: "params.multiplier".into(),
                    message: format!(
                        "multiplier {} is outside the classical 1 < R < N = {n} range",
                        p.multiplier
                    ),
                });
            }
        }
        GameParams::Diner(p) => {
            let positive = [p.price_costly, p.price_cheap, p.utility_costly, p.utility_cheap]
                .iter()
                .all(|v| *v > Rational::ZERO);
            if !positive {
                errors.push(out_of_range("params", "prices and utilities must be positive"));
            }
            if !(p.price_costly > p.price_cheap && p.utility_costly > p.utility_cheap) {
                errors.push(ConfigViolation::DinerAssumptionViolated {
                    assumption: DinerAssumption::Ordering,
                });
            }
            if p.utility_costly - p.price_costly >= p.utility_cheap - p.price_cheap {
                errors.push(ConfigViolation::DinerAssumptionViolated {
                    assumption: DinerAssumption::SoloPrefersCheap,
                });
            }
            if n > 0 {
                let n_r = Rational::from(n);
                if p.utility_costly - p.price_costly / n_r <= p.utility_cheap - p.price_cheap / n_r {
                    errors.push(ConfigViolation::DinerAssumptionViolated {
                        assumption: DinerAssumption::SharedPrefersCostly,
                    });
                }
            }
        }
        GameParams::Auction(p) => {
            if p.valuation_max < 1 {
                errors.push(out_of_range("params.valuation_max", "must be >= 1"));
            }
        }
        GameParams::Royale(p) => {
            if p.hit_rates.len() != n {
                errors.push(out_of_range(
                    "params.hit_rates",
                    &format!("needs one rate per player ({n}), got {}", p.hit_rates.len()),
                ));
            }
            if p.hit_rates.iter().any(|r| *r <= Rational::ZERO || *r >= Rational::ONE) {
                errors.push(out_of_range("params.hit_rates", "every rate must lie strictly inside (0, 1)"));
            }
            if p.max_turns == 0 {
                errors.push(out_of_range("params.max_turns", "must be >= 1"));
            }
        }
        GameParams::Pirate(_) => {}
    }

    for (seat, spec) in config.roster.iter().enumerate() {
        if let Err(v) = spec.validate(seat, config.kind) {
            errors.push(v);
        }
    }

    if errors.is_empty() {
        Ok(warnings)
    } else {
        Err(errors)
    }
}

/// File-level shape of [`MatchConfig`].
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMatchConfig {
    game: GameKind,
    #[serde(default = "empty_object")]
    params: serde_json::Value,
    n_players: usize,
    #[serde(default = "default_rounds")]
    n_rounds: u32,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    prompt_version: PromptVersion,
    #[serde(default = "default_temperature")]
    temperature: Rational,
    agents: Vec<RosterEntry>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct RosterEntry {
    #[serde(flatten)]
    spec: AgentSpec,
    #[serde(default = "one", skip_serializing_if = "is_one")]
    count: usize,
}

fn empty_object() -> serde_json::Value {
    serde_json::Value::Object(Default::default())
}
fn default_rounds() -> u32 {
    20
}
fn default_temperature() -> Rational {
    Rational::ONE
}
fn one() -> usize {
    1
}
fn is_one(v: &usize) -> bool {
    *v == 1
}

impl TryFrom<RawMatchConfig> for MatchConfig {
    type Error = String;

    fn try_from(raw: RawMatchConfig) -> Result<Self, String> {
        let mut params_value = raw.params;
        if params_value.is_null() {
            params_value = empty_object();
        }
        let mut params = GameParams::from_value(raw.game, params_value)
            .map_err(|e| format!("params for {}: {e}", raw.game))?;
        if let GameParams::Royale(p) = &mut params {
            if p.hit_rates.is_empty() {
                p.hit_rates = RoyaleParams::vanilla_rates(raw.n_players);
            }
        }
        let roster = raw
            .agents
            .into_iter()
            .flat_map(|e| std::iter::repeat_n(e.spec, e.count))
            .collect();
        Ok(MatchConfig {
            kind: raw.game,
            params,
            n_players: raw.n_players,
            n_rounds: raw.n_rounds,
            roster,
            seed: raw.seed,
            prompt_version: raw.prompt_version,
            temperature: raw.temperature,
        })
    }
}

impl From<MatchConfig> for RawMatchConfig {
    fn from(c: MatchConfig) -> Self {
        RawMatchConfig {
            game: c.kind,
            params: serde_json::to_value(&c.params).unwrap_or_else(|_| empty_object()),
            n_players: c.n_players,
            n_rounds: c.n_rounds,
            seed: c.seed,
            prompt_version: c.prompt_version,
            temperature: c.temperature,
            agents: c.roster.into_iter().map(|spec| RosterEntry { spec, count: 1 }).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn oracle_roster(n: usize) -> Vec<AgentSpec> {
        vec![AgentSpec::oracle(); n]
    }

    fn diner(y: i64, b: i64, x: i64, a: i64) -> MatchConfig {
        MatchConfig::vanilla(GameKind::DinersDilemma, oracle_roster(10)).with_params(GameParams::Diner(
            DinerParams {
                price_costly: x.into(),
                price_cheap: y.into(),
                utility_costly: a.into(),
                utility_cheap: b.into(),
            },
        ))
    }

    #[test]
    fn vanilla_diner_is_valid() {
        assert!(diner(10, 15, 20, 20).validate().is_ok());
    }

    #[test]
    fn diner_assumption_one_violation_is_named() {
        let errs = diner(10, 15, 20, 26).validate().unwrap_err();
        assert_eq!(
            errs,
            vec![ConfigViolation::DinerAssumptionViolated { assumption: DinerAssumption::SoloPrefersCheap }]
        );
    }

    #[test]
    fn diner_assumption_two_violation() {
        // a - x/N = 16 - 2 = 14 is not above b - y/N = 15 - 1 = 14.
        let errs = diner(10, 15, 20, 16).validate().unwrap_err();
        assert!(errs.contains(&ConfigViolation::DinerAssumptionViolated {
            assumption: DinerAssumption::SharedPrefersCostly
        }));
    }

    #[test]
    fn guess_empty_interval_is_degenerate() {
        let cfg = MatchConfig::vanilla(GameKind::GuessAverage, oracle_roster(10))
            .with_params(GameParams::Guess(GuessParams { min: 0, max: 0, ratio: Rational::new(2, 3) }));
        let errs = cfg.validate().unwrap_err();
        assert!(matches!(errs[0], ConfigViolation::DegenerateRange { .. }));
    }

    #[test]
    fn roster_size_mismatch() {
        let mut cfg = MatchConfig::vanilla(GameKind::DivideDollar, oracle_roster(11));
        cfg.n_players = 10;
        let errs = cfg.validate().unwrap_err();
        assert_eq!(errs, vec![ConfigViolation::RosterSizeMismatch { expected: 10, got: 11 }]);
    }

    #[test]
    fn public_goods_out_of_classical_range_only_warns() {
        let cfg = MatchConfig::vanilla(GameKind::PublicGoods, oracle_roster(10)).with_params(
            GameParams::PublicGoods(PublicGoodsParams { multiplier: Rational::ZERO, ..Default::default() }),
        );
        let warnings = cfg.validate().unwrap();
        assert_eq!(warnings.len(), 1);
    }

    #[test]
    fn royale_rates_must_avoid_extremes() {
        let mut p = RoyaleParams::vanilla(10);
        p.hit_rates[9] = Rational::ONE;
        let cfg =
            MatchConfig::vanilla(GameKind::BattleRoyale, oracle_roster(10)).with_params(GameParams::Royale(p));
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn vanilla_royale_rates_span_35_to_80() {
        let rates = RoyaleParams::vanilla_rates(10);
        assert_eq!(rates[0], Rational::new(35, 100));
        assert_eq!(rates[9], Rational::new(80, 100));
    }

    #[test]
    fn toml_config_with_counts_expands_roster() {
        let text = r#"
game = "guess"
n_players = 10
n_rounds = 20
seed = 7
prompt_version = "v2"
temperature = "0.6"

[params]
ratio = "1/2"

[[agents]]
kind = "oracle"
count = 9

[[agents]]
kind = "fixed"
strategy = "constant_bid"
params = { value = 91 }
"#;
        let cfg = MatchConfig::from_toml_str(text).unwrap();
        assert_eq!(cfg.roster.len(), 10);
        assert_eq!(cfg.guess_params().unwrap().ratio, Rational::new(1, 2));
        assert_eq!(cfg.guess_params().unwrap().max, 100);
        assert_eq!(cfg.temperature, Rational::new(3, 5));
        assert_eq!(cfg.prompt_version, PromptVersion::V2);
    }

    #[test]
    fn set_param_by_name() {
        let mut p = GameKind::PirateGame.default_params(10);
        p.set("gold", serde_json::json!(400)).unwrap();
        assert_eq!(p, GameParams::Pirate(PirateParams { gold: 400 }));
        assert!(p.set("ratio", serde_json::json!("1/2")).is_err());
    }

    #[test]
    fn game_kind_parses_aliases() {
        assert_eq!("pirate".parse::<GameKind>().unwrap(), GameKind::PirateGame);
        assert_eq!("el-farol-bar".parse::<GameKind>().unwrap(), GameKind::ElFarolBar);
        assert!("chess".parse::<GameKind>().is_err());
    }
}
