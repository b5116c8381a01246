//! Reference strategies the scores are measured against, and the pirate
//! solvers.

use serde::{Deserialize, Serialize};

use crate::action::{Action, BarChoice, Constraint, DishChoice, Vote};
use crate::config::{GameParams, MatchConfig, Pricing};
use crate::games::{StateView, ViewInfo};
use crate::rational::Rational;
use crate::rng::Stream;

use rand::Rng;

/// Per-game optimal action rule.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum StrategyProfile {
    /// Always the same number.
    Number { value: i64 },
    /// Alternate floor and ceil of the interval midpoint so the mean hits it.
    Midpoint { min: i64, max: i64 },
    /// Go with probability `go_probability`. `rotation_attendees` is the
    /// deterministic schedule size `floor(R * N)`.
    MixedBar { go_probability: Rational, rotation_attendees: usize },
    /// `gold / n` each, remainder to the lowest seats.
    EvenSplit { gold: u64, n: usize },
    FreeRide,
    ContributeAll,
    Dish { dish: DishChoice },
    /// Bid `floor(factor * valuation)`.
    ShadedBid { factor: Rational },
    Truthful,
    /// Shoot the alive opponent with the highest hit rate.
    TargetStrongest,
    /// Parity bribes for proposals and the three voting rules.
    Pirate { gold: u64, first_proposal: Vec<u64> },
}

pub fn reference_strategy(config: &MatchConfig) -> StrategyProfile {
    let n = config.n_players;
    match &config.params {
        GameParams::Guess(p) => {
            if p.ratio < Rational::ONE {
                StrategyProfile::Number { value: p.min }
            } else if p.ratio > Rational::ONE {
                StrategyProfile::Number { value: p.max }
            } else {
                StrategyProfile::Midpoint { min: p.min, max: p.max }
            }
        }
        GameParams::Bar(p) => StrategyProfile::MixedBar {
            go_probability: p.capacity_ratio,
            rotation_attendees: rotation_attendees(p.capacity_ratio, n),
        },
        GameParams::Dollar(p) => StrategyProfile::EvenSplit { gold: p.gold, n },
        GameParams::PublicGoods(p) => {
            if p.multiplier / Rational::from(n.max(1)) <= Rational::ONE {
                StrategyProfile::FreeRide
            } else {
                StrategyProfile::ContributeAll
            }
        }
        GameParams::Diner(_) => StrategyProfile::Dish { dish: DishChoice::Costly },
        GameParams::Auction(p) => match p.pricing {
            Pricing::FirstPrice => StrategyProfile::ShadedBid { factor: default_shading(n) },
            Pricing::SecondPrice => StrategyProfile::Truthful,
        },
        GameParams::Royale(_) => StrategyProfile::TargetStrongest,
        GameParams::Pirate(p) => StrategyProfile::Pirate {
            gold: p.gold,
            first_proposal: pirate_optimal_proposal(n, 1, p.gold),
        },
    }
}

/// Symmetric equilibrium shading for uniform private values, `(N - 1) / N`.
pub fn default_shading(n: usize) -> Rational {
    Rational::new(n.saturating_sub(1) as i128, n.max(1) as i128)
}

pub fn rotation_attendees(ratio: Rational, n: usize) -> usize {
    (ratio * Rational::from(n)).floor().max(0) as usize
}

/// Player `seat` attends round `round` iff `(seat + round) mod N < floor(R N)`.
pub fn rotation_goes(seat: usize, round: u32, n: usize, attendees: usize) -> bool {
    (seat + round as usize) % n.max(1) < attendees
}

fn range_max(view: &StateView) -> i64 {
    match view.request.constraint {
        Constraint::Range { max, .. } => max,
        _ => 0,
    }
}

fn valuation(view: &StateView) -> u64 {
    match view.info {
        ViewInfo::Valuation { valuation } => valuation,
        _ => range_max(view).max(0) as u64,
    }
}

impl StrategyProfile {
    /// The profile's move for the step described by `view`. Mixed rules draw from `rng`.
    pub fn act(&self, view: &StateView, rng: &mut Stream) -> Action {
        let seat = view.player;
        match self {
            StrategyProfile::Number { value } => Action::ChosenNumber(*value),
            StrategyProfile::Midpoint { min, max } => {
                let span = max - min;
                let up = span % 2 != 0 && (seat + view.round as usize) % 2 == 1;
                Action::ChosenNumber(min + span / 2 + i64::from(up))
            }
            StrategyProfile::MixedBar { go_probability, .. } => {
                let q = go_probability.denom();
                let go = rng.random_range(0..q) < go_probability.numer();
                Action::BarDecision(if go { BarChoice::Go } else { BarChoice::Stay })
            }
            StrategyProfile::EvenSplit { gold, n } => {
                let n = (*n).max(1) as u64;
                let extra = u64::from((seat as u64) < gold % n);
                Action::Bid(gold / n + extra)
            }
            StrategyProfile::FreeRide => Action::Contribution(0),
            StrategyProfile::ContributeAll => Action::Contribution(range_max(view).max(0) as u64),
            StrategyProfile::Dish { dish } => Action::Dish(*dish),
            StrategyProfile::ShadedBid { factor } => {
                let bid = (*factor * Rational::from(valuation(view))).floor().max(0) as u64;
                Action::AuctionBid(bid.min(valuation(view)))
            }
            StrategyProfile::Truthful => Action::AuctionBid(valuation(view)),
            StrategyProfile::TargetStrongest => Action::Shot(strongest_opponent(view)),
            StrategyProfile::Pirate { gold, .. } => pirate_action(view, *gold),
        }
    }
}

/// Highest-rate alive opponent, lowest id on ties.
pub fn strongest_opponent(view: &StateView) -> Option<usize> {
    let ViewInfo::Royale { alive } = &view.info else { return None };
    alive
        .iter()
        .filter(|(p, _)| *p != view.player)
        .max_by(|(pa, ra), (pb, rb)| ra.cmp(rb).then(pb.cmp(pa)))
        .map(|(p, _)| *p)
}

fn pirate_action(view: &StateView, gold: u64) -> Action {
    let ViewInfo::Pirate { alive, proposer, proposal } = &view.info else {
        return Action::PirateVote(Vote::Reject);
    };
    match proposal {
        None => Action::PirateProposal(pirate_optimal_proposal(alive.len(), proposer + 1, gold)),
        Some(plan) => {
            let share = alive.iter().position(|p| *p == view.player).map(|i| plan[i]).unwrap_or(0);
            Action::PirateVote(pirate_optimal_vote(view.player + 1, proposer + 1, share))
        }
    }
}

/// Closed-form proposal for `n_alive` pirates led by `proposer_rank`: one
/// gold to every junior sharing the proposer's rank parity, the rest kept.
/// Falls back to backward induction when the gold cannot cover the bribes.
pub fn pirate_optimal_proposal(n_alive: usize, proposer_rank: usize, gold: u64) -> Vec<u64> {
    let _ = proposer_rank;
    if n_alive == 0 {
        return Vec::new();
    }
    let bribes = ((n_alive - 1) / 2) as u64;
    if gold < bribes {
        return pirate_backward_induction(n_alive, gold)
            .pop()
            .map(|s| s.proposal)
            .unwrap_or_default();
    }
    let mut plan: Vec<u64> = (0..n_alive).map(|i| u64::from(i > 0 && i % 2 == 0)).collect();
    plan[0] = gold - bribes;
    plan
}

/// Accept two or more gold, reject none, and accept a single gold only
/// when the voter's rank has the proposer's parity.
pub fn pirate_optimal_vote(voter_rank: usize, proposer_rank: usize, allocation: u64) -> Vote {
    match allocation {
        0 => Vote::Reject,
        1 if voter_rank % 2 != proposer_rank % 2 => Vote::Reject,
        _ => Vote::Accept,
    }
}

/// Subgame-perfect play for one suffix of `alive` pirates.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PirateSuffix {
    pub alive: usize,
    pub proposer_survives: bool,
    /// Gold by position, proposer first.
    pub proposal: Vec<u64>,
    /// Least gold each position accepts (0 for the proposer).
    pub accept_threshold: Vec<u64>,
    /// Final gold by position; `None` for pirates thrown overboard.
    pub fate: Vec<Option<u64>>,
}

/// Solves every suffix from one pirate up to `n`. Pirates prefer survival,
/// then gold, then seeing others thrown overboard.
pub fn pirate_backward_induction(n: usize, gold: u64) -> Vec<PirateSuffix> {
    let mut solved: Vec<PirateSuffix> = Vec::with_capacity(n);
    for m in 1..=n {
        let suffix = match solved.last() {
            None => PirateSuffix {
                alive: 1,
                proposer_survives: true,
                proposal: vec![gold],
                accept_threshold: vec![0],
                fate: vec![Some(gold)],
            },
            Some(next) => solve_suffix(m, gold, next),
        };
        solved.push(suffix);
    }
    solved
}

fn solve_suffix(m: usize, gold: u64, next: &PirateSuffix) -> PirateSuffix {
    // Position i here is position i - 1 in the continuation.
    let mut threshold = vec![0u64; m];
    for (t, fate) in threshold[1..].iter_mut().zip(&next.fate) {
        *t = fate.map_or(0, |g| g.saturating_add(1));
    }
    let need = m.div_ceil(2) - 1;
    let mut voters: Vec<usize> = (1..m).collect();
    voters.sort_by_key(|i| (threshold[*i], i % 2, *i));
    let chosen = &voters[..need];
    let cost: u64 = chosen.iter().map(|i| threshold[*i]).sum();
    if cost <= gold {
        let mut proposal = vec![0u64; m];
        for i in chosen {
            proposal[*i] = threshold[*i];
        }
        proposal[0] = gold - cost;
        let fate = proposal.iter().map(|g| Some(*g)).collect();
        PirateSuffix { alive: m, proposer_survives: true, proposal, accept_threshold: threshold, fate }
    } else {
        let mut proposal = vec![0u64; m];
        proposal[0] = gold;
        let mut fate = vec![None];
        fate.extend(next.fate.iter().copied());
        PirateSuffix { alive: m, proposer_survives: false, proposal, accept_threshold: threshold, fate }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ten_pirates_hundred_gold() {
        assert_eq!(pirate_optimal_proposal(10, 1, 100), vec![96, 0, 1, 0, 1, 0, 1, 0, 1, 0]);
    }

    #[test]
    fn nine_pirates_from_rank_two() {
        assert_eq!(pirate_optimal_proposal(9, 2, 100), vec![96, 0, 1, 0, 1, 0, 1, 0, 1]);
    }

    #[test]
    fn sole_survivor_takes_all() {
        assert_eq!(pirate_optimal_proposal(1, 10, 100), vec![100]);
    }

    #[test]
    fn votes_follow_three_rules() {
        assert_eq!(pirate_optimal_vote(10, 3, 44), Vote::Accept);
        assert_eq!(pirate_optimal_vote(4, 3, 0), Vote::Reject);
        assert_eq!(pirate_optimal_vote(5, 3, 1), Vote::Accept);
        assert_eq!(pirate_optimal_vote(4, 3, 1), Vote::Reject);
    }

    #[test]
    fn two_pirates_senior_keeps_all() {
        let s = pirate_backward_induction(2, 100);
        assert_eq!(s[1].proposal, vec![100, 0]);
        assert!(s[1].proposer_survives);
    }

    #[test]
    fn four_gold_ten_pirates_bribes_four() {
        let s = pirate_backward_induction(10, 4);
        assert_eq!(s[9].proposal, vec![0, 0, 1, 0, 1, 0, 1, 0, 1, 0]);
        assert!(s[9].proposer_survives);
    }

    #[test]
    fn broke_proposer_is_thrown_overboard() {
        // Three pirates need one bribe of one gold; with none the proposer dies.
        let s = pirate_backward_induction(4, 0);
        assert!(!s[2].proposer_survives);
        assert_eq!(s[2].fate[0], None);
        // The fourth buys the doomed pirate's vote for nothing.
        assert!(s[3].proposer_survives);
        assert_eq!(s[3].proposal, vec![0, 0, 0, 0]);
    }

    #[test]
    fn midpoint_alternates_to_hit_the_mean() {
        let profile = StrategyProfile::Midpoint { min: 0, max: 101 };
        let view = |player, round| StateView {
            player,
            round,
            phase: crate::games::Phase::Simultaneous,
            request: crate::action::ActionRequest::new(
                crate::action::RequestKind::ChosenNumber,
                Constraint::Range { min: 0, max: 101 },
            ),
            info: ViewInfo::None,
        };
        let mut rng = crate::rng::rng_stream(0, "t", 0, 0);
        let a = profile.act(&view(0, 1), &mut rng);
        let b = profile.act(&view(1, 1), &mut rng);
        assert_eq!((a, b), (Action::ChosenNumber(51), Action::ChosenNumber(50)));
    }
}
