use crate::action::{Action, ActionRequest, Constraint, DishChoice, RequestKind};
use crate::config::{DinerParams, GameParams, MatchConfig, PlayerId};
use crate::rational::Rational;

use super::templates::{Template, Vars};
use super::{own_echo, HistoryBlock, RoundOutcome, RoundRecord, RoundRules};

/// The bill is split evenly; utility is dish utility minus the share.
pub fn resolve_diner(dishes: &[DishChoice], params: &DinerParams) -> RoundOutcome {
    let costly = dishes.iter().filter(|d| **d == DishChoice::Costly).count();
    let cheap = dishes.len() - costly;
    let total_cost = params.price_costly * Rational::from(costly) + params.price_cheap * Rational::from(cheap);
    let share = total_cost / Rational::from(dishes.len().max(1));
    let utilities = dishes
        .iter()
        .map(|d| match d {
            DishChoice::Costly => params.utility_costly - share,
            DishChoice::Cheap => params.utility_cheap - share,
        })
        .collect();
    RoundOutcome::Diner { costly, cheap, total_cost, share, utilities }
}

fn params(cfg: &MatchConfig) -> &DinerParams {
    match &cfg.params {
        GameParams::Diner(p) => p,
        _ => unreachable!("diner engine built for another game"),
    }
}

#[derive(Clone, Debug)]
pub(crate) struct DinerRules;

impl RoundRules for DinerRules {
    fn request(&self, _cfg: &MatchConfig, _round: u32, _player: PlayerId) -> ActionRequest {
        ActionRequest::new(
            RequestKind::Dish,
            Constraint::OneOf { options: vec!["costly".into(), "cheap".into()] },
        )
    }

    fn resolve(&mut self, cfg: &MatchConfig, _round: u32, actions: &[Action]) -> RoundOutcome {
        let dishes: Vec<DishChoice> = actions
            .iter()
            .map(|a| match a {
                Action::Dish(d) => *d,
                _ => unreachable!("validated before resolution"),
            })
            .collect();
        resolve_diner(&dishes, params(cfg))
    }

    fn totals(&self, cfg: &MatchConfig, history: &[RoundRecord]) -> Vec<Rational> {
        let mut totals = vec![Rational::ZERO; cfg.n_players];
        for record in history {
            if let RoundOutcome::Diner { utilities, .. } = &record.outcome {
                for (t, u) in totals.iter_mut().zip(utilities) {
                    *t += *u;
                }
            }
        }
        totals
    }

    fn system_vars(&self, cfg: &MatchConfig, _tpl: &Template) -> Vars {
        let p = params(cfg);
        vec![
            ("N", cfg.n_players.to_string()),
            ("K", cfg.n_rounds.to_string()),
            ("Ph", p.price_costly.to_display_number()),
            ("Pl", p.price_cheap.to_display_number()),
            ("Uh", p.utility_costly.to_display_number()),
            ("Ul", p.utility_cheap.to_display_number()),
        ]
    }

    fn request_vars(&self, _cfg: &MatchConfig, round: u32, _player: PlayerId) -> Vars {
        vec![("I", round.to_string())]
    }

    fn round_block(&self, _cfg: &MatchConfig, tpl: &Template, record: &RoundRecord, player: PlayerId) -> HistoryBlock {
        let RoundOutcome::Diner { costly, cheap, total_cost, share, utilities } = &record.outcome else {
            unreachable!("diner history holds diner outcomes")
        };
        let vars = vec![
            ("I", record.round.to_string()),
            ("NH", costly.to_string()),
            ("NL", cheap.to_string()),
            ("S", total_cost.to_display_number()),
            ("C", share.to_display_number()),
            ("U", utilities[player].to_display_number()),
        ];
        HistoryBlock {
            before_echo: tpl.fill("result", &vars),
            echo: own_echo(record, player),
            after_echo: tpl.fill("after", &vars),
        }
    }
}
