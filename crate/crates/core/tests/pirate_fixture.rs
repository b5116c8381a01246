use std::path::PathBuf;

use gamebench::orchestrator::{replay, run_match, RunOptions};
use gamebench::{score, MatchConfig, MatchLog, Rational};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn table_log() -> MatchLog {
    MatchLog::read(&fixture("pirate_table.jsonl")).expect("fixture parses")
}

#[test]
fn table_scores_match_the_published_row_values() {
    let report = score(&table_log()).unwrap();
    let ints = |v: &[i64]| v.iter().map(|x| Rational::from(*x)).collect::<Vec<_>>();
    assert_eq!(report.per_round, ints(&[8, 6, 94]));
    let votes = report.pirate_votes.expect("pirate report has vote scores");
    assert_eq!(votes.per_round_accuracy, vec![Rational::ONE, Rational::new(3, 4), Rational::new(4, 7)]);
    assert_eq!(votes.accuracy, Rational::new(19, 24));
    assert_eq!((votes.correct, votes.votes), (19, 24));
    assert!((report.score.to_f64() - 80.6).abs() < 0.05, "score {}", report.score);
}

#[test]
fn table_replays_row_by_row() {
    let log = table_log();
    assert_eq!(replay(&log).unwrap(), log);
}

#[test]
fn scripted_seats_reproduce_the_table() {
    let config = MatchConfig::load(&fixture("pirate_table.toml")).unwrap();
    let run = run_match(&config, &RunOptions::default()).unwrap();
    let table = table_log();
    assert_eq!(run.log.rounds, table.rounds);
    assert_eq!(run.log.terminal, table.terminal);
    assert!((run.score.unwrap().score.to_f64() - 80.6).abs() < 0.05);
}
