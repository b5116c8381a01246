use std::collections::BTreeMap;

use rand::Rng;

use crate::action::{Action, ActionRequest, Constraint, RequestKind};
use crate::config::{GameParams, MatchConfig, PlayerId, PromptVersion, RoyaleParams};
use crate::rational::Rational;
use crate::rng::{purpose, rng_stream};

use super::templates::{template, Template};
use super::{
    check_submission, ordinal, Game, HistoryBlock, Observation, Phase, ResolveError, RoundOutcome, RoundRecord,
    StateView, Step, TerminalReason, TerminalState, ViewInfo,
};

/// Seats sorted by ascending hit rate, ties by id.
pub fn shooting_order(rates: &[Rational]) -> Vec<PlayerId> {
    let mut order: Vec<PlayerId> = (0..rates.len()).collect();
    order.sort_by(|a, b| rates[*a].cmp(&rates[*b]).then(a.cmp(b)));
    order
}

/// One shot. `draw` is uniform in `[0, 1)`; the target falls iff `draw < rate`.
pub fn resolve_shot(
    actor: PlayerId,
    target: Option<PlayerId>,
    rate: Rational,
    alive: &[PlayerId],
    draw: Rational,
) -> RoundOutcome {
    let hit = target.is_some() && draw < rate;
    let alive = alive.iter().copied().filter(|p| !(hit && Some(*p) == target)).collect();
    RoundOutcome::Shot { actor, target, hit, alive }
}

pub(crate) fn label(p: PlayerId) -> String {
    format!("player_{}", p + 1)
}

fn params(cfg: &MatchConfig) -> &RoyaleParams {
    match &cfg.params {
        GameParams::Royale(p) => p,
        _ => unreachable!("royale engine built for another game"),
    }
}

#[derive(Clone, Debug)]
pub struct BattleRoyale {
    config: MatchConfig,
    order: Vec<PlayerId>,
    alive: Vec<bool>,
    /// Index into `order` of the player to shoot next.
    cursor: usize,
    history: Vec<RoundRecord>,
}

impl BattleRoyale {
    pub fn new(config: MatchConfig) -> Self {
        let order = shooting_order(&params(&config).hit_rates);
        let alive = vec![true; config.n_players];
        BattleRoyale { config, order, alive, cursor: 0, history: Vec::new() }
    }

    fn rate(&self, p: PlayerId) -> Rational {
        params(&self.config).hit_rates[p]
    }

    fn alive_in_order(&self) -> Vec<PlayerId> {
        self.order.iter().copied().filter(|p| self.alive[*p]).collect()
    }

    fn alive_count(&self) -> usize {
        self.alive.iter().filter(|a| **a).count()
    }

    fn finished(&self) -> bool {
        self.alive_count() <= 1 || self.history.len() as u32 >= params(&self.config).max_turns
    }

    fn actor(&self) -> Option<PlayerId> {
        (!self.finished()).then(|| self.order[self.cursor])
    }

    fn advance(&mut self) {
        let n = self.order.len();
        for step in 1..=n {
            let i = (self.cursor + step) % n;
            if self.alive[self.order[i]] {
                self.cursor = i;
                return;
            }
        }
    }

    fn rates_json(&self, players: &[PlayerId]) -> String {
        let body: Vec<String> = players
            .iter()
            .map(|p| format!("\"{}\": \"{}\"", label(*p), self.rate(*p).to_percent_string()))
            .collect();
        format!("{{{}}}", body.join(", "))
    }

    fn shot_block(&self, tpl: &Template, record: &RoundRecord, player: PlayerId) -> HistoryBlock {
        let RoundOutcome::Shot { actor, target, hit, alive } = &record.outcome else {
            unreachable!("royale history holds shot outcomes")
        };
        let mut vars = vec![("ACTOR", label(*actor))];
        let section = match target {
            None => "intentional_miss",
            Some(t) => {
                vars.push(("TARGET", label(*t)));
                if *hit {
                    "hit"
                } else {
                    "missed"
                }
            }
        };
        let result = [tpl.fill(section, &vars), tpl.fill("remaining", &[("LEFT", alive.len().to_string())])].join("\n");
        let head = tpl.fill("result_head", &[("I", record.round.to_string())]);
        if *actor == player {
            HistoryBlock {
                before_echo: [head, tpl.fill("echo_lead", &[])].join("\n"),
                echo: record.actions.get(&player).map(|a| a.echo(&[], label)),
                after_echo: result,
            }
        } else {
            HistoryBlock { before_echo: [head, result].join("\n"), echo: None, after_echo: String::new() }
        }
    }
}

impl Game for BattleRoyale {
    fn config(&self) -> &MatchConfig {
        &self.config
    }

    fn step(&self) -> Option<Step> {
        self.actor().map(|actor| Step {
            round: self.history.len() as u32 + 1,
            phase: Phase::Turn,
            players: vec![actor],
        })
    }

    fn request(&self, player: PlayerId) -> Option<ActionRequest> {
        if self.actor() != Some(player) {
            return None;
        }
        let allow_self = params(&self.config).allow_self_target;
        let targets = (0..self.config.n_players).filter(|p| self.alive[*p] && (allow_self || *p != player)).collect();
        Some(ActionRequest::new(RequestKind::Shot, Constraint::Target { targets, allow_miss: true }))
    }

    fn view(&self, player: PlayerId) -> Option<StateView> {
        let request = self.request(player)?;
        Some(StateView {
            player,
            round: self.history.len() as u32 + 1,
            phase: Phase::Turn,
            request,
            info: ViewInfo::Royale { alive: self.alive_in_order().into_iter().map(|p| (p, self.rate(p))).collect() },
        })
    }

    fn resolve(&mut self, actions: &BTreeMap<PlayerId, Action>) -> Result<RoundOutcome, ResolveError> {
        let step = check_submission(self, actions)?;
        let actor = step.players[0];
        let Some(Action::Shot(target)) = actions.get(&actor).cloned() else {
            unreachable!("validated before resolution")
        };
        let rate = self.rate(actor);
        let q = rate.denom();
        let mut rng = rng_stream(self.config.seed, purpose::ROYALE_HIT, step.round as u64, actor as u64);
        let draw = Rational::new(rng.random_range(0..q), q);
        let alive: Vec<PlayerId> = (0..self.config.n_players).filter(|p| self.alive[*p]).collect();
        let outcome = resolve_shot(actor, target, rate, &alive, draw);
        if let RoundOutcome::Shot { hit: true, target: Some(t), .. } = outcome {
            self.alive[t] = false;
        }
        self.history.push(RoundRecord {
            round: step.round,
            phase: Phase::Turn,
            actions: actions.clone(),
            outcome: outcome.clone(),
        });
        self.advance();
        Ok(outcome)
    }

    fn history(&self) -> &[RoundRecord] {
        &self.history
    }

    fn terminal_state(&self) -> Option<TerminalState> {
        if !self.finished() {
            return None;
        }
        let survivors: Vec<PlayerId> = (0..self.config.n_players).filter(|p| self.alive[*p]).collect();
        let reason = if survivors.len() <= 1 { TerminalReason::LastSurvivor } else { TerminalReason::TurnCap };
        let totals = (0..self.config.n_players)
            .map(|p| if survivors.len() == 1 && self.alive[p] { Rational::ONE } else { Rational::ZERO })
            .collect();
        Some(TerminalState { reason, rounds: self.history.len() as u32, totals, survivors })
    }

    fn render_observation(&self, player: PlayerId, version: PromptVersion) -> Observation {
        let tpl = template(self.config.kind, version);
        let initial_rank = self.order.iter().position(|p| *p == player).unwrap_or(0) + 1;
        let system = tpl.fill(
            "system",
            &[
                ("N", self.config.n_players.to_string()),
                ("hit_rates", self.rates_json(&self.order)),
                ("ID", label(player)),
                ("HIT", self.rate(player).to_percent_string()),
                ("rank", ordinal(initial_rank)),
            ],
        );
        let history = self.history.iter().map(|r| self.shot_block(tpl, r, player)).collect();
        let request = self.request(player).map(|_| {
            let alive = self.alive_in_order();
            let rank = alive.iter().position(|p| *p == player).unwrap_or(0) + 1;
            tpl.fill(
                "request",
                &[
                    ("I", (self.history.len() + 1).to_string()),
                    ("hit_rates", self.rates_json(&alive)),
                    ("ID", label(player)),
                    ("HIT", self.rate(player).to_percent_string()),
                    ("rank", ordinal(rank)),
                ],
            )
        });
        Observation { system, history, request }
    }

    fn clone_box(&self) -> Box<dyn Game> {
        Box::new(self.clone())
    }
}
