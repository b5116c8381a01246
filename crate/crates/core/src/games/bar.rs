use crate::action::{Action, ActionRequest, BarChoice, Constraint, RequestKind};
use crate::config::{BarParams, GameParams, InfoMode, MatchConfig, PlayerId};
use crate::rational::Rational;

use super::templates::{Template, Vars};
use super::{own_echo, HistoryBlock, RoundOutcome, RoundRecord, RoundRules};

/// Goers enjoy the bar iff the attending fraction is at most the capacity ratio.
pub fn resolve_bar(decisions: &[BarChoice], params: &BarParams) -> RoundOutcome {
    let n = decisions.len();
    let goers = decisions.iter().filter(|d| **d == BarChoice::Go).count();
    let crowded = Rational::new(goers as i128, n.max(1) as i128) > params.capacity_ratio;
    let go_utility = if crowded { params.u_go_crowded } else { params.u_go_uncrowded };
    let utilities = decisions
        .iter()
        .map(|d| match d {
            BarChoice::Go => go_utility,
            BarChoice::Stay => params.u_home,
        })
        .collect();
    RoundOutcome::Bar { goers, stayers: n - goers, crowded, utilities }
}

fn params(cfg: &MatchConfig) -> &BarParams {
    match &cfg.params {
        GameParams::Bar(p) => p,
        _ => unreachable!("bar engine built for another game"),
    }
}

#[derive(Clone, Debug)]
pub(crate) struct BarRules;

impl RoundRules for BarRules {
    fn request(&self, _cfg: &MatchConfig, _round: u32, _player: PlayerId) -> ActionRequest {
        ActionRequest::new(
            RequestKind::BarDecision,
            Constraint::OneOf { options: vec!["go".into(), "stay".into()] },
        )
    }

    fn resolve(&mut self, cfg: &MatchConfig, _round: u32, actions: &[Action]) -> RoundOutcome {
        let decisions: Vec<BarChoice> = actions
            .iter()
            .map(|a| match a {
                Action::BarDecision(d) => *d,
                _ => unreachable!("validated before resolution"),
            })
            .collect();
        resolve_bar(&decisions, params(cfg))
    }

    fn totals(&self, cfg: &MatchConfig, history: &[RoundRecord]) -> Vec<Rational> {
        let mut totals = vec![Rational::ZERO; cfg.n_players];
        for record in history {
            if let RoundOutcome::Bar { utilities, .. } = &record.outcome {
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
            ("R", p.capacity_ratio.to_percent_string()),
            ("MAX", p.u_go_uncrowded.to_display_number()),
            ("MIN", p.u_go_crowded.to_display_number()),
            ("HOME", p.u_home.to_display_number()),
        ]
    }

    fn request_vars(&self, cfg: &MatchConfig, round: u32, _player: PlayerId) -> Vars {
        vec![("I", round.to_string()), ("R", params(cfg).capacity_ratio.to_percent_string())]
    }

    fn round_block(&self, cfg: &MatchConfig, tpl: &Template, record: &RoundRecord, player: PlayerId) -> HistoryBlock {
        let RoundOutcome::Bar { goers, stayers, crowded, utilities } = &record.outcome else {
            unreachable!("bar history holds bar outcomes")
        };
        let p = params(cfg);
        let went = record.actions.get(&player) == Some(&Action::BarDecision(BarChoice::Go));
        let explicit = p.info_mode == InfoMode::Explicit;
        let mut lines = vec![tpl.fill("result_head", &[("I", record.round.to_string())])];
        if explicit {
            let vars = vec![
                ("GO", goers.to_string()),
                ("STAY", stayers.to_string()),
                ("N", cfg.n_players.to_string()),
                ("R", p.capacity_ratio.to_percent_string()),
            ];
            lines.push(tpl.fill(if *crowded { "attendance_crowded" } else { "attendance_ok" }, &vars));
        }
        if explicit || went {
            lines.push(tpl.fill(if *crowded { "fun_less" } else { "fun_more" }, &[]));
        }
        lines.push(tpl.fill("echo_lead", &[]));
        HistoryBlock {
            before_echo: lines.join("\n"),
            echo: own_echo(record, player),
            after_echo: tpl.fill("gain", &[("U", utilities[player].to_display_number())]),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use BarChoice::{Go, Stay};

    fn decisions(go: usize, n: usize) -> Vec<BarChoice> {
        (0..n).map(|i| if i < go { Go } else { Stay }).collect()
    }

    #[test]
    fn six_of_ten_is_fun() {
        let RoundOutcome::Bar { crowded, utilities, .. } = resolve_bar(&decisions(6, 10), &BarParams::default()) else {
            panic!()
        };
        assert!(!crowded);
        assert_eq!(utilities[0], Rational::from_int(10));
        assert_eq!(utilities[9], Rational::from_int(5));
    }

    #[test]
    fn seven_of_ten_is_crowded() {
        let RoundOutcome::Bar { crowded, utilities, .. } = resolve_bar(&decisions(7, 10), &BarParams::default()) else {
            panic!()
        };
        assert!(crowded);
        assert_eq!(utilities[0], Rational::ZERO);
        assert_eq!(utilities[9], Rational::from_int(5));
    }

    #[test]
    fn empty_bar_everyone_home() {
        let RoundOutcome::Bar { goers, utilities, .. } = resolve_bar(&decisions(0, 10), &BarParams::default()) else {
            panic!()
        };
        assert_eq!(goers, 0);
        assert!(utilities.iter().all(|u| *u == Rational::from_int(5)));
    }
}
