use crate::action::{Action, ActionRequest, Constraint, RequestKind};
use crate::config::{GameParams, GuessParams, MatchConfig, PlayerId};
use crate::rational::Rational;

use super::templates::{Template, Vars};
use super::{join_numbers, own_echo, HistoryBlock, RoundOutcome, RoundRecord, RoundRules};

/// Target is `ratio` times the mean; every player closest to it wins.
pub fn resolve_guess(choices: &[i64], params: &GuessParams) -> RoundOutcome {
    let n = Rational::from(choices.len());
    let sum: Rational = choices.iter().map(|c| Rational::from(*c)).sum();
    let average = sum / n;
    let target = params.ratio * average;
    let distance = |c: i64| (Rational::from(c) - target).abs();
    let best = choices.iter().map(|c| distance(*c)).min().unwrap_or(Rational::ZERO);
    let winners: Vec<PlayerId> = (0..choices.len()).filter(|i| distance(choices[*i]) == best).collect();
    let mut winning_numbers: Vec<i64> = winners.iter().map(|i| choices[*i]).collect();
    winning_numbers.sort_unstable();
    winning_numbers.dedup();
    RoundOutcome::Guess { average, target, winners, winning_numbers }
}

fn params(cfg: &MatchConfig) -> &GuessParams {
    match &cfg.params {
        GameParams::Guess(p) => p,
        _ => unreachable!("guess engine built for another game"),
    }
}

#[derive(Clone, Debug)]
pub(crate) struct GuessRules;

impl RoundRules for GuessRules {
    fn request(&self, cfg: &MatchConfig, _round: u32, _player: PlayerId) -> ActionRequest {
        let p = params(cfg);
        ActionRequest::new(RequestKind::ChosenNumber, Constraint::Range { min: p.min, max: p.max })
    }

    fn resolve(&mut self, cfg: &MatchConfig, _round: u32, actions: &[Action]) -> RoundOutcome {
        let choices: Vec<i64> = actions
            .iter()
            .map(|a| match a {
                Action::ChosenNumber(c) => *c,
                _ => unreachable!("validated before resolution"),
            })
            .collect();
        resolve_guess(&choices, params(cfg))
    }

    fn totals(&self, cfg: &MatchConfig, history: &[RoundRecord]) -> Vec<Rational> {
        let mut wins = vec![Rational::ZERO; cfg.n_players];
        for record in history {
            if let RoundOutcome::Guess { winners, .. } = &record.outcome {
                for w in winners {
                    wins[*w] += Rational::ONE;
                }
            }
        }
        wins
    }

    fn system_vars(&self, cfg: &MatchConfig, _tpl: &Template) -> Vars {
        let p = params(cfg);
        vec![
            ("N", cfg.n_players.to_string()),
            ("K", cfg.n_rounds.to_string()),
            ("MIN", p.min.to_string()),
            ("MAX", p.max.to_string()),
            ("R", p.ratio.to_string()),
        ]
    }

    fn request_vars(&self, cfg: &MatchConfig, round: u32, _player: PlayerId) -> Vars {
        let p = params(cfg);
        vec![
            ("I", round.to_string()),
            ("R", p.ratio.to_string()),
            ("MIN", p.min.to_string()),
            ("MAX", p.max.to_string()),
        ]
    }

    fn round_block(&self, cfg: &MatchConfig, tpl: &Template, record: &RoundRecord, player: PlayerId) -> HistoryBlock {
        let RoundOutcome::Guess { average, target, winners, winning_numbers } = &record.outcome else {
            unreachable!("guess history holds guess outcomes")
        };
        let vars = vec![
            ("I", record.round.to_string()),
            ("M", average.to_display_number()),
            ("R", params(cfg).ratio.to_string()),
            ("T", target.to_display_number()),
            ("W", join_numbers(winning_numbers)),
        ];
        HistoryBlock {
            before_echo: tpl.fill("result", &vars),
            echo: own_echo(record, player),
            after_echo: tpl.fill(if winners.contains(&player) { "won" } else { "lost" }, &[]),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn winners(outcome: &RoundOutcome) -> (&Rational, &Rational, &Vec<PlayerId>) {
        match outcome {
            RoundOutcome::Guess { average, target, winners, .. } => (average, target, winners),
            _ => panic!("not a guess outcome"),
        }
    }

    #[test]
    fn all_fifty_all_win() {
        let out = resolve_guess(&[50; 10], &GuessParams::default());
        let (m, t, w) = winners(&out);
        assert_eq!(*m, Rational::from_int(50));
        assert_eq!(*t, Rational::new(100, 3));
        assert_eq!(w.len(), 10);
    }

    #[test]
    fn all_zero_is_a_collective_win() {
        let out = resolve_guess(&[0; 10], &GuessParams::default());
        let (_, t, w) = winners(&out);
        assert!(t.is_zero());
        assert_eq!(w.len(), 10);
    }

    #[test]
    fn two_players_thirty_sixty() {
        let out = resolve_guess(&[30, 60], &GuessParams::default());
        let (m, t, w) = winners(&out);
        assert_eq!(*m, Rational::from_int(45));
        assert_eq!(*t, Rational::from_int(30));
        assert_eq!(w, &vec![0]);
    }

    #[test]
    fn equidistant_choices_both_win() {
        // Mean 15, target 10: 5 and 15 are both 5 away.
        let out = resolve_guess(&[5, 15, 25], &GuessParams::default());
        let RoundOutcome::Guess { winners, winning_numbers, .. } = out else { panic!() };
        assert_eq!(winners, vec![0, 1]);
        assert_eq!(winning_numbers, vec![5, 15]);
    }
}
