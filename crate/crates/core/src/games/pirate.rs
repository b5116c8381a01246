use std::collections::BTreeMap;

use crate::action::{Action, ActionRequest, Constraint, RequestKind, Vote};
use crate::config::{GameParams, MatchConfig, PirateParams, PlayerId, PromptVersion};
use crate::rational::Rational;

use super::templates::{template, Template};
use super::{
    check_submission, no_label, ordinal, Game, HistoryBlock, Observation, Phase, ResolveError, RoundOutcome,
    RoundRecord, StateView, Step, TerminalReason, TerminalState, ViewInfo,
};

/// Tallies votes on a plan. The proposer's accept is implicit; the plan
/// passes iff at least half of the alive pirates accept.
pub fn resolve_pirate_vote(proposer: PlayerId, alive: usize, votes: &[Vote]) -> RoundOutcome {
    let accepts = 1 + votes.iter().filter(|v| **v == Vote::Accept).count();
    let accepted = 2 * accepts >= alive;
    RoundOutcome::PirateVote { proposer, accepts, alive, accepted, eliminated: (!accepted).then_some(proposer) }
}

/// `{"3": "50", "4": "1", ...}` keyed by seniority rank.
pub(crate) fn plan_text(seats: &[PlayerId], allocation: &[u64]) -> String {
    let body: Vec<String> = seats.iter().zip(allocation).map(|(s, g)| format!("\"{}\": \"{g}\"", s + 1)).collect();
    format!("{{{}}}", body.join(", "))
}

fn params(cfg: &MatchConfig) -> &PirateParams {
    match &cfg.params {
        GameParams::Pirate(p) => p,
        _ => unreachable!("pirate engine built for another game"),
    }
}

#[derive(Clone, Debug)]
pub struct PirateGame {
    config: MatchConfig,
    /// Alive pirates, most senior first. Seniority rank is `id + 1`.
    alive: Vec<PlayerId>,
    proposal: Option<Vec<u64>>,
    plan: u32,
    settled: Option<(TerminalReason, Vec<u64>)>,
    history: Vec<RoundRecord>,
}

impl PirateGame {
    pub fn new(config: MatchConfig) -> Self {
        let alive: Vec<PlayerId> = (0..config.n_players).collect();
        let mut game = PirateGame { config, alive, proposal: None, plan: 1, settled: None, history: Vec::new() };
        game.settle_if_alone();
        game
    }

    fn gold(&self) -> u64 {
        params(&self.config).gold
    }

    fn settle_if_alone(&mut self) {
        if self.alive.len() == 1 {
            let mut gold = vec![0; self.config.n_players];
            gold[self.alive[0]] = self.gold();
            self.settled = Some((TerminalReason::LastPirate, gold));
        }
    }

    fn proposer(&self) -> PlayerId {
        self.alive[0]
    }

    fn request_text(&self, tpl: &Template, player: PlayerId) -> String {
        let head = tpl.fill("request_head", &[("PROPOSER", ordinal(self.proposer() + 1))]);
        let tail = match &self.proposal {
            Some(allocation) => {
                let share = self
                    .alive
                    .iter()
                    .position(|p| *p == player)
                    .map(|i| allocation[i])
                    .unwrap_or(0);
                tpl.fill("request_vote", &[("PLAN", plan_text(&self.alive, allocation)), ("g", share.to_string())])
            }
            None => {
                let format: Vec<String> = self.alive.iter().map(|s| format!("\"{}\": \"g_{}\"", s + 1, s + 1)).collect();
                let last = *self.alive.last().expect("at least one pirate is alive");
                tpl.fill(
                    "request_propose",
                    &[
                        ("G", self.gold().to_string()),
                        ("LAST", ordinal(last + 1)),
                        ("PLAN_FORMAT", format!("{{{}}}", format.join(", "))),
                    ],
                )
            }
        };
        [head, tail].join("\n")
    }

    fn plan_block(&self, tpl: &Template, proposal: &RoundRecord, vote: &RoundRecord, player: PlayerId) -> HistoryBlock {
        let RoundOutcome::PirateProposal { proposer, seats, allocation } = &proposal.outcome else {
            unreachable!("proposal record holds a proposal outcome")
        };
        let RoundOutcome::PirateVote { accepts, alive, accepted, .. } = &vote.outcome else {
            unreachable!("vote record holds a vote outcome")
        };
        let proposer_label = ordinal(proposer + 1);
        let mut lines = vec![
            tpl.fill("proposal_made", &[("PROPOSER", proposer_label.clone()), ("PLAN", plan_text(seats, allocation))]),
            tpl.fill("vote_tally", &[("A", accepts.to_string()), ("ALIVE", alive.to_string())]),
        ];
        let echo = if player == *proposer {
            proposal.actions.get(&player).map(|a| a.echo(seats, no_label))
        } else {
            vote.actions.get(&player).map(|a| a.echo(&[], no_label))
        };
        if echo.is_some() {
            lines.push(tpl.fill("echo_lead", &[]));
        }
        let after = if *accepted {
            tpl.fill("accepted", &[])
        } else {
            tpl.fill("rejected", &[("PROPOSER", proposer_label)])
        };
        HistoryBlock { before_echo: lines.join("\n"), echo, after_echo: after }
    }
}

impl Game for PirateGame {
    fn config(&self) -> &MatchConfig {
        &self.config
    }

    fn step(&self) -> Option<Step> {
        if self.settled.is_some() {
            return None;
        }
        Some(match self.proposal {
            None => Step { round: self.plan, phase: Phase::Proposal, players: vec![self.proposer()] },
            Some(_) => Step { round: self.plan, phase: Phase::Vote, players: self.alive[1..].to_vec() },
        })
    }

    fn request(&self, player: PlayerId) -> Option<ActionRequest> {
        let step = self.step()?;
        if !step.players.contains(&player) {
            return None;
        }
        Some(match step.phase {
            Phase::Proposal => ActionRequest::new(
                RequestKind::PirateProposal,
                Constraint::Allocation { seats: self.alive.clone(), total: self.gold() },
            ),
            _ => ActionRequest::new(
                RequestKind::PirateVote,
                Constraint::OneOf { options: vec!["accept".into(), "reject".into()] },
            ),
        })
    }

    fn view(&self, player: PlayerId) -> Option<StateView> {
        let step = self.step()?;
        let request = self.request(player)?;
        Some(StateView {
            player,
            round: step.round,
            phase: step.phase,
            request,
            info: ViewInfo::Pirate { alive: self.alive.clone(), proposer: self.proposer(), proposal: self.proposal.clone() },
        })
    }

    fn resolve(&mut self, actions: &BTreeMap<PlayerId, Action>) -> Result<RoundOutcome, ResolveError> {
        let step = check_submission(self, actions)?;
        let proposer = self.proposer();
        let outcome = match step.phase {
            Phase::Proposal => {
                let Some(Action::PirateProposal(allocation)) = actions.get(&proposer).cloned() else {
                    unreachable!("validated before resolution")
                };
                self.proposal = Some(allocation.clone());
                RoundOutcome::PirateProposal { proposer, seats: self.alive.clone(), allocation }
            }
            _ => {
                let votes: Vec<Vote> = actions
                    .values()
                    .map(|a| match a {
                        Action::PirateVote(v) => *v,
                        _ => unreachable!("validated before resolution"),
                    })
                    .collect();
                let outcome = resolve_pirate_vote(proposer, self.alive.len(), &votes);
                let allocation = self.proposal.take().expect("a vote follows a proposal");
                if let RoundOutcome::PirateVote { accepted: true, .. } = outcome {
                    let mut gold = vec![0; self.config.n_players];
                    for (seat, g) in self.alive.iter().zip(&allocation) {
                        gold[*seat] = *g;
                    }
                    self.settled = Some((TerminalReason::PlanAccepted, gold));
                } else {
                    self.alive.remove(0);
                    self.plan += 1;
                    self.settle_if_alone();
                }
                outcome
            }
        };
        self.history.push(RoundRecord {
            round: step.round,
            phase: step.phase,
            actions: actions.clone(),
            outcome: outcome.clone(),
        });
        Ok(outcome)
    }

    fn history(&self) -> &[RoundRecord] {
        &self.history
    }

    fn terminal_state(&self) -> Option<TerminalState> {
        let (reason, gold) = self.settled.as_ref()?;
        Some(TerminalState {
            reason: *reason,
            rounds: self.history.iter().filter(|r| r.phase == Phase::Proposal).count() as u32,
            totals: gold.iter().map(|g| Rational::from(*g)).collect(),
            survivors: self.alive.clone(),
        })
    }

    fn render_observation(&self, player: PlayerId, version: PromptVersion) -> Observation {
        let tpl = template(self.config.kind, version);
        let system = tpl.fill(
            "system",
            &[
                ("N", self.config.n_players.to_string()),
                ("G", self.gold().to_string()),
                ("rank", ordinal(player + 1)),
            ],
        );
        let history = self
            .history
            .windows(2)
            .filter(|w| w[0].phase == Phase::Proposal && w[1].phase == Phase::Vote)
            .map(|w| self.plan_block(tpl, &w[0], &w[1], player))
            .collect();
        let request = self.request(player).map(|_| self.request_text(tpl, player));
        Observation { system, history, request }
    }

    fn clone_box(&self) -> Box<dyn Game> {
        Box::new(self.clone())
    }
}
