use crate::action::{Action, ActionRequest, Constraint, RequestKind};
use crate::config::{GameParams, MatchConfig, PlayerId, PublicGoodsParams};
use crate::rational::Rational;

use super::templates::{Template, Vars};
use super::{join_numbers, own_echo, HistoryBlock, RoundOutcome, RoundRecord, RoundRules, ViewInfo};

/// Pot is multiplied by R and shared evenly. Balances carry over; the
/// endowment is added again only with `fresh_endowment`.
pub fn resolve_public_goods(contributions: &[u64], balances: &[Rational], params: &PublicGoodsParams) -> RoundOutcome {
    let n = Rational::from(contributions.len().max(1));
    let pot: u64 = contributions.iter().sum();
    let gain = params.multiplier * Rational::from(pot) / n;
    let top_up = if params.fresh_endowment { Rational::from(params.endowment) } else { Rational::ZERO };
    let balances = balances
        .iter()
        .zip(contributions)
        .map(|(b, c)| *b - Rational::from(*c) + gain + top_up)
        .collect();
    RoundOutcome::PublicGoods { contributions: contributions.to_vec(), pot, gain, balances }
}

fn params(cfg: &MatchConfig) -> &PublicGoodsParams {
    match &cfg.params {
        GameParams::PublicGoods(p) => p,
        _ => unreachable!("public goods engine built for another game"),
    }
}

#[derive(Clone, Debug)]
pub(crate) struct PublicGoodsRules {
    balances: Vec<Rational>,
}

impl PublicGoodsRules {
    pub(crate) fn new(cfg: &MatchConfig) -> Self {
        PublicGoodsRules { balances: vec![Rational::from(params(cfg).endowment); cfg.n_players] }
    }

    fn limit(&self, player: PlayerId) -> i64 {
        i64::try_from(self.balances[player].floor().max(0)).unwrap_or(i64::MAX)
    }
}

impl RoundRules for PublicGoodsRules {
    fn request(&self, _cfg: &MatchConfig, _round: u32, player: PlayerId) -> ActionRequest {
        ActionRequest::new(RequestKind::Contribution, Constraint::Range { min: 0, max: self.limit(player) })
    }

    fn info(&self, _cfg: &MatchConfig, _round: u32, player: PlayerId) -> ViewInfo {
        ViewInfo::Balance { balance: self.balances[player] }
    }

    fn resolve(&mut self, cfg: &MatchConfig, _round: u32, actions: &[Action]) -> RoundOutcome {
        let contributions: Vec<u64> = actions
            .iter()
            .map(|a| match a {
                Action::Contribution(c) => *c,
                _ => unreachable!("validated before resolution"),
            })
            .collect();
        let outcome = resolve_public_goods(&contributions, &self.balances, params(cfg));
        if let RoundOutcome::PublicGoods { balances, .. } = &outcome {
            self.balances = balances.clone();
        }
        outcome
    }

    fn totals(&self, _cfg: &MatchConfig, _history: &[RoundRecord]) -> Vec<Rational> {
        self.balances.clone()
    }

    fn system_vars(&self, cfg: &MatchConfig, _tpl: &Template) -> Vars {
        vec![
            ("N", cfg.n_players.to_string()),
            ("K", cfg.n_rounds.to_string()),
            ("R", params(cfg).multiplier.to_display_number()),
        ]
    }

    fn request_vars(&self, _cfg: &MatchConfig, round: u32, player: PlayerId) -> Vars {
        vec![
            ("I", round.to_string()),
            ("BALANCE", self.balances[player].to_display_number()),
            ("LIMIT", self.limit(player).to_string()),
        ]
    }

    fn round_block(&self, _cfg: &MatchConfig, tpl: &Template, record: &RoundRecord, player: PlayerId) -> HistoryBlock {
        let RoundOutcome::PublicGoods { contributions, pot, gain, balances } = &record.outcome else {
            unreachable!("public goods history holds public goods outcomes")
        };
        let vars = vec![
            ("I", record.round.to_string()),
            ("CONTRIBUTIONS", join_numbers(contributions)),
            ("S", pot.to_string()),
            ("GAIN", gain.to_display_number()),
            ("BALANCE", balances[player].to_display_number()),
            ("BALANCES", join_numbers(balances.iter().map(|b| b.to_display_number()))),
        ];
        HistoryBlock {
            before_echo: tpl.fill("result", &vars),
            echo: own_echo(record, player),
            after_echo: tpl.fill("after", &vars),
        }
    }
}
