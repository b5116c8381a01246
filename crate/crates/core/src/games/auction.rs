use rand::Rng;

use crate::action::{Action, ActionRequest, Constraint, RequestKind};
use crate::config::{AuctionParams, GameParams, MatchConfig, PlayerId, Pricing};
use crate::rational::Rational;
use crate::rng::{purpose, rng_stream};

use super::templates::{Template, Vars};
use super::{own_echo, HistoryBlock, RoundOutcome, RoundRecord, RoundRules, ViewInfo};

/// Private valuation of `player` in `round`, uniform in `1..=valuation_max`.
pub fn auction_valuation(seed: u64, round: u32, player: PlayerId, params: &AuctionParams) -> u64 {
    let mut rng = rng_stream(seed, purpose::AUCTION_VALUATION, round as u64, player as u64);
    rng.random_range(1..=params.valuation_max.max(1))
}

/// Highest bid wins, lowest id on ties. Price depends on the pricing rule.
pub fn resolve_auction(bids: &[u64], valuations: &[u64], params: &AuctionParams) -> RoundOutcome {
    let mut winner = 0;
    for (i, b) in bids.iter().enumerate() {
        if *b > bids[winner] {
            winner = i;
        }
    }
    let winning_bid = bids.get(winner).copied().unwrap_or(0);
    let price = match params.pricing {
        Pricing::FirstPrice => winning_bid,
        Pricing::SecondPrice => bids
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != winner)
            .map(|(_, b)| *b)
            .max()
            .unwrap_or(0),
    };
    let utilities = (0..bids.len())
        .map(|i| if i == winner { valuations[i].saturating_sub(price) } else { 0 })
        .collect();
    RoundOutcome::Auction { valuations: valuations.to_vec(), winner, winning_bid, price, utilities }
}

fn params(cfg: &MatchConfig) -> &AuctionParams {
    match &cfg.params {
        GameParams::Auction(p) => p,
        _ => unreachable!("auction engine built for another game"),
    }
}

#[derive(Clone, Debug)]
pub(crate) struct AuctionRules;

impl RoundRules for AuctionRules {
    fn request(&self, cfg: &MatchConfig, round: u32, player: PlayerId) -> ActionRequest {
        let v = auction_valuation(cfg.seed, round, player, params(cfg));
        ActionRequest::new(
            RequestKind::AuctionBid,
            Constraint::Range { min: 0, max: i64::try_from(v).unwrap_or(i64::MAX) },
        )
    }

    fn info(&self, cfg: &MatchConfig, round: u32, player: PlayerId) -> ViewInfo {
        ViewInfo::Valuation { valuation: auction_valuation(cfg.seed, round, player, params(cfg)) }
    }

    fn resolve(&mut self, cfg: &MatchConfig, round: u32, actions: &[Action]) -> RoundOutcome {
        let p = params(cfg);
        let bids: Vec<u64> = actions
            .iter()
            .map(|a| match a {
                Action::AuctionBid(b) => *b,
                _ => unreachable!("validated before resolution"),
            })
            .collect();
        let valuations: Vec<u64> = (0..bids.len()).map(|i| auction_valuation(cfg.seed, round, i, p)).collect();
        resolve_auction(&bids, &valuations, p)
    }

    fn totals(&self, cfg: &MatchConfig, history: &[RoundRecord]) -> Vec<Rational> {
        let mut totals = vec![Rational::ZERO; cfg.n_players];
        for record in history {
            if let RoundOutcome::Auction { utilities, .. } = &record.outcome {
                for (t, u) in totals.iter_mut().zip(utilities) {
                    *t += Rational::from(*u);
                }
            }
        }
        totals
    }

    fn system_vars(&self, cfg: &MatchConfig, tpl: &Template) -> Vars {
        let tpl_rule = match params(cfg).pricing {
            Pricing::FirstPrice => "price_first",
            Pricing::SecondPrice => "price_second",
        };
        let rule = tpl.fill(tpl_rule, &[]);
        vec![("N", cfg.n_players.to_string()), ("K", cfg.n_rounds.to_string()), ("PRICE_RULE", rule)]
    }

    fn request_vars(&self, cfg: &MatchConfig, round: u32, player: PlayerId) -> Vars {
        let v = auction_valuation(cfg.seed, round, player, params(cfg));
        vec![("I", round.to_string()), ("v", v.to_string())]
    }

    fn round_block(&self, _cfg: &MatchConfig, tpl: &Template, record: &RoundRecord, player: PlayerId) -> HistoryBlock {
        let RoundOutcome::Auction { valuations, winner, winning_bid, price, utilities } = &record.outcome else {
            unreachable!("auction history holds auction outcomes")
        };
        let vars = vec![
            ("I", record.round.to_string()),
            ("v", valuations[player].to_string()),
            ("W", winning_bid.to_string()),
            ("P", price.to_string()),
            ("U", utilities[player].to_string()),
        ];
        HistoryBlock {
            before_echo: tpl.fill("result", &vars),
            echo: own_echo(record, player),
            after_echo: tpl.fill(if *winner == player { "after_won" } else { "after_lost" }, &vars),
        }
    }
}
