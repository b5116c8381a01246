use crate::action::{Action, ActionRequest, Constraint, RequestKind};
use crate::config::{DollarParams, GameParams, MatchConfig, PlayerId};
use crate::rational::Rational;

use super::templates::{Template, Vars};
use super::{own_echo, HistoryBlock, RoundOutcome, RoundRecord, RoundRules};

/// Everyone is paid their bid unless the bids overshoot the pot.
pub fn resolve_dollar(bids: &[u64], params: &DollarParams) -> RoundOutcome {
    let total: u64 = bids.iter().fold(0u64, |acc, b| acc.saturating_add(*b));
    let exceeded = total > params.gold;
    let payouts = bids.iter().map(|b| if exceeded { 0 } else { *b }).collect();
    RoundOutcome::Dollar { total, exceeded, payouts }
}

fn params(cfg: &MatchConfig) -> &DollarParams {
    match &cfg.params {
        GameParams::Dollar(p) => p,
        _ => unreachable!("dollar engine built for another game"),
    }
}

#[derive(Clone, Debug)]
pub(crate) struct DollarRules;

impl RoundRules for DollarRules {
    fn request(&self, cfg: &MatchConfig, _round: u32, _player: PlayerId) -> ActionRequest {
        let gold = i64::try_from(params(cfg).gold).unwrap_or(i64::MAX);
        ActionRequest::new(RequestKind::DollarBid, Constraint::Range { min: 0, max: gold })
    }

    fn resolve(&mut self, cfg: &MatchConfig, _round: u32, actions: &[Action]) -> RoundOutcome {
        let bids: Vec<u64> = actions
            .iter()
            .map(|a| match a {
                Action::Bid(b) => *b,
                _ => unreachable!("validated before resolution"),
            })
            .collect();
        resolve_dollar(&bids, params(cfg))
    }

    fn totals(&self, cfg: &MatchConfig, history: &[RoundRecord]) -> Vec<Rational> {
        let mut totals = vec![Rational::ZERO; cfg.n_players];
        for record in history {
            if let RoundOutcome::Dollar { payouts, .. } = &record.outcome {
                for (t, p) in totals.iter_mut().zip(payouts) {
                    *t += Rational::from(*p);
                }
            }
        }
        totals
    }

    fn system_vars(&self, cfg: &MatchConfig, _tpl: &Template) -> Vars {
        vec![
            ("N", cfg.n_players.to_string()),
            ("K", cfg.n_rounds.to_string()),
            ("G", params(cfg).gold.to_string()),
        ]
    }

    fn request_vars(&self, cfg: &MatchConfig, round: u32, _player: PlayerId) -> Vars {
        vec![("I", round.to_string()), ("G", params(cfg).gold.to_string())]
    }

    fn round_block(&self, cfg: &MatchConfig, tpl: &Template, record: &RoundRecord, player: PlayerId) -> HistoryBlock {
        let RoundOutcome::Dollar { total, exceeded, payouts } = &record.outcome else {
            unreachable!("dollar history holds dollar outcomes")
        };
        let vars = vec![
            ("I", record.round.to_string()),
            ("S", total.to_string()),
            ("G", params(cfg).gold.to_string()),
            ("B", payouts[player].to_string()),
        ];
        HistoryBlock {
            before_echo: tpl.fill("result", &vars),
            echo: own_echo(record, player),
            after_echo: tpl.fill(if *exceeded { "after_exceed" } else { "after_ok" }, &vars),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn even_split_pays_everyone() {
        let RoundOutcome::Dollar { payouts, exceeded, .. } = resolve_dollar(&[10; 10], &DollarParams::default()) else {
            panic!()
        };
        assert!(!exceeded);
        assert_eq!(payouts, vec![10; 10]);
    }

    #[test]
    fn overshoot_pays_nobody() {
        let mut bids = vec![10; 10];
        bids[0] = 11;
        let RoundOutcome::Dollar { payouts, total, .. } = resolve_dollar(&bids, &DollarParams::default()) else {
            panic!()
        };
        assert_eq!(total, 101);
        assert_eq!(payouts, vec![0; 10]);
    }

    #[test]
    fn ninety_one_plus_nine_ones() {
        let mut bids = vec![1; 10];
        bids[0] = 91;
        let RoundOutcome::Dollar { payouts, total, .. } = resolve_dollar(&bids, &DollarParams::default()) else {
            panic!()
        };
        assert_eq!(total, 100);
        assert_eq!(payouts, bids);
    }
}
