//! Raw scores, rescaling to [0, 100], and run aggregation.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::action::{Action, BarChoice, DishChoice};
use crate::agents::{pirate_optimal_proposal, pirate_optimal_vote};
use crate::config::{GameKind, GameParams, InfoMode, MatchConfig, Pricing};
use crate::games::RoundOutcome;
use crate::matchlog::MatchLog;
use crate::rational::Rational;

const HUNDRED: i64 = 100;
const AUCTION_PRECISION: i128 = 1_000_000_000_000_000;

fn pct(x: Rational) -> Rational {
    clamp100(x * Rational::from(HUNDRED))
}

fn clamp100(x: Rational) -> Rational {
    x.clamp(Rational::ZERO, Rational::from(HUNDRED))
}

/// Guess: `s1` is the mean of `C - MIN`.
pub fn rescale_guess(s1: Rational, min: i64, max: i64, ratio: Rational) -> Rational {
    let span = Rational::from(max - min);
    if ratio < Rational::ONE {
        pct((span - s1) / span)
    } else if ratio == Rational::ONE {
        pct(Rational::ONE - (Rational::from(2i64) * s1 - span).abs() / span)
    } else {
        pct(s1 / span)
    }
}

pub fn rescale_bar(s2: Rational, ratio: Rational) -> Rational {
    let worst = ratio.max(Rational::ONE - ratio);
    if worst.is_zero() {
        return Rational::from(HUNDRED);
    }
    pct((worst - s2) / worst)
}

pub fn rescale_dollar(s3: Rational, gold: u64) -> Rational {
    let g = Rational::from(gold);
    pct((g - s3) / g)
}

pub fn rescale_public_goods(s4: Rational, endowment: u64, multiplier: Rational, n: usize) -> Rational {
    let t = Rational::from(endowment);
    if multiplier / Rational::from(n) <= Rational::ONE {
        pct((t - s4) / t)
    } else {
        pct(s4 / t)
    }
}

pub fn rescale_diner(s5: Rational) -> Rational {
    pct(Rational::ONE - s5)
}

pub fn rescale_auction(s6: Rational) -> Rational {
    pct(s6)
}

pub fn rescale_royale(s7: Rational) -> Rational {
    pct(s7)
}

pub fn rescale_pirate(s8p: Rational, s8v: Rational, gold: u64) -> Rational {
    let two_g = Rational::from(2 * gold);
    let fifty = Rational::from(50i64);
    let proposal = if two_g.is_zero() { fifty } else { (two_g - s8p) / two_g * fifty };
    clamp100(proposal + s8v * fifty)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PirateVoteScore {
    /// S8V.
    pub accuracy: Rational,
    pub per_round_accuracy: Vec<Rational>,
    pub correct: usize,
    pub votes: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoreReport {
    /// SHA-256 of the scored log.
    pub run_id: String,
    pub game: GameKind,
    /// Rounds (simultaneous games), turns (Royale) or proposals (Pirate).
    pub rounds: usize,
    /// S1..S7, or S8P for the pirate game.
    pub raw: Rational,
    pub per_round: Vec<Rational>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pirate_votes: Option<PirateVoteScore>,
    pub score: Rational,
    #[serde(default)]
    pub coerced_moves: usize,
}

impl ScoreReport {
    pub fn score_f64(&self) -> f64 {
        self.score.to_f64()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ScoreError {
    #[error("log is incomplete: {0}")]
    IncompleteLog(String),
    #[error("match was abandoned: {0}")]
    InvalidMatch(String),
    #[error("{0} is logged but not scored")]
    NotScored(String),
    #[error("log is inconsistent: {0}")]
    Inconsistent(String),
}

fn mean(values: &[Rational]) -> Rational {
    if values.is_empty() {
        return Rational::ZERO;
    }
    values.iter().copied().sum::<Rational>() / Rational::from(values.len())
}

fn inconsistent(round: u32) -> ScoreError {
    ScoreError::Inconsistent(format!("round {round} does not match the game"))
}

pub fn score(log: &MatchLog) -> Result<ScoreReport, ScoreError> {
    if let Some(reason) = &log.invalid {
        return Err(ScoreError::InvalidMatch(reason.clone()));
    }
    if log.terminal.is_none() {
        return Err(ScoreError::IncompleteLog("no terminal record".into()));
    }
    let cfg = &log.config;
    if !cfg.kind.is_sequential() && log.rounds.len() != cfg.n_rounds as usize {
        return Err(ScoreError::IncompleteLog(format!(
            "{} of {} rounds logged",
            log.rounds.len(),
            cfg.n_rounds
        )));
    }
    let (raw, per_round, score, pirate_votes) = match &cfg.params {
        GameParams::Guess(p) => {
            let per_round = per_round_mean(log, |a| match a {
                Action::ChosenNumber(c) => Some(Rational::from(c - p.min)),
                _ => None,
            })?;
            let s1 = mean(&per_round);
            (s1, per_round, rescale_guess(s1, p.min, p.max, p.ratio), None)
        }
        GameParams::Bar(p) => {
            if p.info_mode == InfoMode::Explicit {
                return Err(ScoreError::NotScored("the explicit-information bar".into()));
            }
            let n = Rational::from(cfg.n_players);
            let per_round = log
                .rounds
                .iter()
                .map(|r| {
                    let goers = r.actions.values().filter(|a| **a == Action::BarDecision(BarChoice::Go)).count();
                    (Rational::from(goers) / n - p.capacity_ratio).abs()
                })
                .collect::<Vec<_>>();
            let s2 = mean(&per_round);
            (s2, per_round, rescale_bar(s2, p.capacity_ratio), None)
        }
        GameParams::Dollar(p) => {
            let per_round = log
                .rounds
                .iter()
                .map(|r| {
                    let total: u64 = r
                        .actions
                        .values()
                        .map(|a| match a {
                            Action::Bid(b) => Ok(*b),
                            _ => Err(inconsistent(r.round)),
                        })
                        .sum::<Result<u64, _>>()?;
                    Ok((Rational::from(total) - Rational::from(p.gold)).abs())
                })
                .collect::<Result<Vec<_>, ScoreError>>()?;
            let s3 = mean(&per_round);
            (s3, per_round, rescale_dollar(s3, p.gold), None)
        }
        GameParams::PublicGoods(p) => {
            let per_round = per_round_mean(log, |a| match a {
                Action::Contribution(c) => Some(Rational::from(*c)),
                _ => None,
            })?;
            let s4 = mean(&per_round);
            (s4, per_round, rescale_public_goods(s4, p.endowment, p.multiplier, cfg.n_players), None)
        }
        GameParams::Diner(_) => {
            let per_round = per_round_mean(log, |a| match a {
                Action::Dish(d) => Some(Rational::from(i64::from(*d == DishChoice::Cheap))),
                _ => None,
            })?;
            let s5 = mean(&per_round);
            (s5, per_round, rescale_diner(s5), None)
        }
        GameParams::Auction(p) => {
            if p.pricing == Pricing::SecondPrice {
                return Err(ScoreError::NotScored("the second-price auction".into()));
            }
            let per_round = log
                .rounds
                .iter()
                .map(|r| {
                    let RoundOutcome::Auction { valuations, .. } = &r.outcome else {
                        return Err(inconsistent(r.round));
                    };
                    let mut shading = Vec::new();
                    for (player, action) in &r.actions {
                        let (Action::AuctionBid(b), Some(v)) = (action, valuations.get(*player)) else {
                            return Err(inconsistent(r.round));
                        };
                        let v = Rational::from(*v);
                        shading.push((v - Rational::from(*b)) / v);
                    }
                    // Keeps long exact sums inside i128.
                    Ok(mean(&shading).round_to(AUCTION_PRECISION))
                })
                .collect::<Result<Vec<_>, ScoreError>>()?;
            let s6 = mean(&per_round);
            (s6, per_round, rescale_auction(s6), None)
        }
        GameParams::Royale(p) => {
            let per_round = score_royale_turns(log, &p.hit_rates)?;
            let s7 = mean(&per_round);
            (s7, per_round, rescale_royale(s7), None)
        }
        GameParams::Pirate(p) => {
            let (distances, votes) = score_pirate_rounds(cfg, log, p.gold)?;
            let s8p = mean(&distances);
            let score = rescale_pirate(s8p, votes.accuracy, p.gold);
            (s8p, distances, score, Some(votes))
        }
    };
    Ok(ScoreReport {
        run_id: log.digest(),
        game: cfg.kind,
        rounds: per_round.len(),
        raw,
        per_round,
        pirate_votes,
        score,
        coerced_moves: log.coerced_count(),
    })
}

/// Per-round mean over players of `value(action)`.
fn per_round_mean(log: &MatchLog, value: impl Fn(&Action) -> Option<Rational>) -> Result<Vec<Rational>, ScoreError> {
    log.rounds
        .iter()
        .map(|r| {
            let values = r.actions.values().map(&value).collect::<Option<Vec<_>>>().ok_or_else(|| inconsistent(r.round))?;
            Ok(mean(&values))
        })
        .collect()
}

/// One indicator per turn: did the shooter aim at a top-rate alive opponent?
fn score_royale_turns(log: &MatchLog, rates: &[Rational]) -> Result<Vec<Rational>, ScoreError> {
    let mut alive: Vec<usize> = (0..rates.len()).collect();
    let mut out = Vec::with_capacity(log.rounds.len());
    for r in &log.rounds {
        let RoundOutcome::Shot { actor, target, alive: after, .. } = &r.outcome else {
            return Err(inconsistent(r.round));
        };
        let best = alive.iter().filter(|p| *p != actor).map(|p| rates[*p]).max();
        let correct = match (target, best) {
            (Some(t), Some(best)) => *t != *actor && rates.get(*t) == Some(&best) && alive.contains(t),
            _ => false,
        };
        out.push(Rational::from(i64::from(correct)));
        alive = after.clone();
    }
    Ok(out)
}

fn score_pirate_rounds(cfg: &MatchConfig, log: &MatchLog, gold: u64) -> Result<(Vec<Rational>, PirateVoteScore), ScoreError> {
    let mut distances = Vec::new();
    let mut per_round_accuracy = Vec::new();
    let mut correct_total = 0usize;
    let mut votes_total = 0usize;
    let mut pending: Option<(usize, Vec<usize>, Vec<u64>)> = None;
    for r in &log.rounds {
        match &r.outcome {
            RoundOutcome::PirateProposal { proposer, seats, allocation } => {
                let optimal = pirate_optimal_proposal(seats.len(), proposer + 1, gold);
                let l1: u64 = allocation.iter().zip(&optimal).map(|(a, o)| a.abs_diff(*o)).sum();
                distances.push(Rational::from(l1));
                pending = Some((*proposer, seats.clone(), allocation.clone()));
            }
            RoundOutcome::PirateVote { .. } => {
                let (proposer, seats, allocation) = pending.take().ok_or_else(|| inconsistent(r.round))?;
                let mut correct = 0usize;
                let mut votes = 0usize;
                for (voter, action) in &r.actions {
                    let Action::PirateVote(vote) = action else { return Err(inconsistent(r.round)) };
                    if *voter == proposer {
                        continue;
                    }
                    let share = seats.iter().position(|s| s == voter).map(|i| allocation[i]).unwrap_or(0);
                    votes += 1;
                    if *vote == pirate_optimal_vote(voter + 1, proposer + 1, share) {
                        correct += 1;
                    }
                }
                per_round_accuracy.push(if votes == 0 {
                    Rational::ONE
                } else {
                    Rational::from(correct) / Rational::from(votes)
                });
                correct_total += correct;
                votes_total += votes;
            }
            _ => return Err(inconsistent(r.round)),
        }
    }
    if pending.is_some() {
        return Err(ScoreError::IncompleteLog("last proposal was never voted on".into()));
    }
    let k = distances.len() as i128;
    let n = cfg.n_players as i128;
    let slots = k * (2 * n - k - 1);
    let accuracy = if slots <= 0 {
        Rational::ONE
    } else {
        Rational::new(2 * correct_total as i128, slots)
    };
    Ok((distances, PirateVoteScore { accuracy, per_round_accuracy, correct: correct_total, votes: votes_total }))
}

/// Mean and spread over repeated runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    pub mean: f64,
    /// Sample standard deviation; 0 when there is a single run.
    pub std: f64,
    pub runs: usize,
    /// Fewer than two runs, so `std` carries no information.
    pub degenerate: bool,
}

pub fn summarize(values: &[f64]) -> RunStats {
    let n = values.len();
    if n == 0 {
        return RunStats { mean: 0.0, std: 0.0, runs: 0, degenerate: true };
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return RunStats { mean, std: 0.0, runs: 1, degenerate: true };
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    RunStats { mean, std: var.sqrt(), runs: n, degenerate: false }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub per_game: BTreeMap<GameKind, RunStats>,
    /// Mean of the per-game means; `None` unless all eight games are present.
    pub overall: Option<f64>,
}

pub fn aggregate(reports: &[ScoreReport]) -> AggregateReport {
    let mut by_game: BTreeMap<GameKind, Vec<f64>> = BTreeMap::new();
    for r in reports {
        by_game.entry(r.game).or_default().push(r.score_f64());
    }
    let per_game: BTreeMap<GameKind, RunStats> = by_game.iter().map(|(g, v)| (*g, summarize(v))).collect();
    let overall = (per_game.len() == GameKind::ALL.len())
        .then(|| per_game.values().map(|s| s.mean).sum::<f64>() / per_game.len() as f64);
    AggregateReport { per_game, overall }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeaderboardRow {
    pub model: String,
    pub game: String,
    pub mean: String,
    pub std: String,
    pub runs: usize,
}

impl LeaderboardRow {
    pub fn new(model: &str, game: &str, stats: &RunStats) -> Self {
        LeaderboardRow {
            model: model.to_string(),
            game: game.to_string(),
            mean: format!("{:.2}", stats.mean),
            std: format!("{:.2}", stats.std),
            runs: stats.runs,
        }
    }
}

/// Rows for one model's aggregate, with an `overall` row when complete.
pub fn leaderboard_rows(model: &str, report: &AggregateReport) -> Vec<LeaderboardRow> {
    let mut rows: Vec<LeaderboardRow> =
        report.per_game.iter().map(|(g, s)| LeaderboardRow::new(model, g.name(), s)).collect();
    if let Some(overall) = report.overall {
        let runs = report.per_game.values().map(|s| s.runs).min().unwrap_or(0);
        rows.push(LeaderboardRow::new(model, "overall", &RunStats { mean: overall, std: 0.0, runs, degenerate: true }));
    }
    rows
}

pub fn write_leaderboard<W: Write>(out: W, rows: &[LeaderboardRow]) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(s: &str) -> Rational {
        s.parse().unwrap()
    }

    #[test]
    fn diner_anchor() {
        assert_eq!(rescale_diner(r("0.96")), Rational::from(4i64));
    }

    #[test]
    fn auction_anchor() {
        assert_eq!(rescale_auction(r("0.146")), r("14.6"));
    }

    #[test]
    fn guess_anchor() {
        assert_eq!(rescale_guess(r("34.59"), 0, 100, Rational::new(2, 3)), r("65.41"));
    }

    #[test]
    fn guess_midpoint_branch() {
        assert_eq!(rescale_guess(r("50"), 0, 100, Rational::ONE), Rational::from(100i64));
        assert_eq!(rescale_guess(r("0"), 0, 100, Rational::ONE), Rational::ZERO);
        assert_eq!(rescale_guess(r("100"), 0, 100, r("1.5")), Rational::from(100i64));
    }

    #[test]
    fn clamped_to_range() {
        assert_eq!(rescale_dollar(r("300"), 100), Rational::ZERO);
        assert_eq!(rescale_auction(r("-0.5")), Rational::ZERO);
    }

    #[test]
    fn pirate_table_value() {
        let s = rescale_pirate(r("36"), Rational::new(19, 24), 100);
        assert!((s.to_f64() - 80.6).abs() < 0.05);
    }

    #[test]
    fn aggregation_anchor() {
        let s = summarize(&[65.4, 62.3, 63.9, 58.3, 67.3]);
        assert!((s.mean - 63.44).abs() < 1e-9);
        assert!((s.std - 3.4158).abs() < 1e-3);
        assert!(!s.degenerate);
    }

    #[test]
    fn single_run_is_degenerate() {
        let s = summarize(&[42.0]);
        assert_eq!((s.std, s.degenerate), (0.0, true));
    }
}
