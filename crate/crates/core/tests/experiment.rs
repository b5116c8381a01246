use std::fs;

use gamebench::orchestrator::{replay, run_experiment, run_match, ExperimentPlan, Manifest, ReplayError, RunOptions};
use gamebench::rng::derive_seed;
use gamebench::{AgentSpec, GameKind, MatchConfig, MatchLog, Rational};

const PLAN: &str = r#"
name = "small"
base_seed = 42
repeats = 2

[[axes]]
axis = "temperature"
values = ["0", "1/2"]

[[axes]]
axis = "param"
game = "guess_average"
field = "ratio"
values = ["2/3", "4/3"]

[[matches]]
game = "guess_average"
n_players = 3
n_rounds = 3
agents = [{ kind = "oracle" }, { kind = "random" }, { kind = "random" }]

[[matches]]
game = "divide_dollar"
n_players = 3
n_rounds = 2
agents = [{ kind = "oracle" }, { kind = "oracle" }, { kind = "oracle" }]
"#;

fn plan() -> ExperimentPlan {
    ExperimentPlan::from_toml_str(PLAN).unwrap()
}

#[test]
fn cells_cover_the_grid_with_derived_seeds() {
    let cells = plan().cells().unwrap();
    assert_eq!(cells.len(), 2 * 2 * 2 + 2 * 2);
    let first = &cells[0];
    assert_eq!(first.label, "guess_average@temperature=0,ratio=2/3");
    assert_eq!(first.model, "oracle+random");
    assert_eq!(first.config.seed, derive_seed(42, "cell", &[0, 0, 0, 0]));
    let dollar: Vec<_> = cells.iter().filter(|c| c.config.kind == GameKind::DivideDollar).collect();
    assert_eq!(dollar.len(), 4);
    assert_eq!(dollar[3].label, "divide_dollar@temperature=1/2");
    assert_eq!(dollar[3].config.seed, derive_seed(42, "cell", &[1, 1, 1]));
    assert_eq!(dollar[3].config.temperature, Rational::new(1, 2));
    let mut seeds: Vec<u64> = cells.iter().map(|c| c.config.seed).collect();
    seeds.sort_unstable();
    seeds.dedup();
    assert_eq!(seeds.len(), cells.len());
}

#[test]
fn reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let ra = run_experiment(&plan(), Some(a.path()), 4).unwrap();
    let rb = run_experiment(&plan(), Some(b.path()), 1).unwrap();
    assert_eq!(ra.failures().count(), 0);
    assert_eq!(ra.leaderboard_csv, rb.leaderboard_csv);
    for cell in &ra.cells {
        let name = format!("logs/cell-{:04}.jsonl", cell.index);
        assert_eq!(fs::read(a.path().join(&name)).unwrap(), fs::read(b.path().join(&name)).unwrap(), "{name}");
    }
    assert_eq!(fs::read(a.path().join("manifest.json")).unwrap(), fs::read(b.path().join("manifest.json")).unwrap());
    let csv = fs::read_to_string(a.path().join("leaderboard.csv")).unwrap();
    assert!(csv.starts_with("model,game,mean,std,runs\n"));
    assert!(csv.contains("oracle,divide_dollar@temperature=0,100.00,0.00,2\n"), "{csv}");
}

#[test]
fn manifest_hashes_match_the_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    run_experiment(&plan(), Some(dir.path()), 2).unwrap();
    let manifest: Manifest = serde_json::from_str(&fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest.plan, plan());
    for cell in &manifest.cells {
        let log = MatchLog::read(&dir.path().join(cell.log.as_ref().unwrap())).unwrap();
        assert_eq!(Some(log.digest()), cell.log_sha256);
        assert_eq!(log.config.seed, cell.seed);
        assert_eq!(replay(&log).unwrap(), log);
    }
}

#[test]
fn resume_keeps_finished_logs() {
    let dir = tempfile::tempdir().unwrap();
    let first = run_experiment(&plan(), Some(dir.path()), 2).unwrap();
    let victim = dir.path().join("logs/cell-0003.jsonl");
    let kept = dir.path().join("logs/cell-0001.jsonl");
    fs::remove_file(&victim).unwrap();
    let second = run_experiment(&plan(), Some(dir.path()), 2).unwrap();
    assert!(victim.exists());
    assert_eq!(second.leaderboard_csv, first.leaderboard_csv);
    assert_eq!(
        MatchLog::read(&kept).unwrap().digest(),
        first.cells[1].log_sha256.clone().unwrap()
    );
}

#[test]
fn truncated_logs_are_rerun() {
    let dir = tempfile::tempdir().unwrap();
    let first = run_experiment(&plan(), Some(dir.path()), 2).unwrap();
    let path = dir.path().join("logs/cell-0000.jsonl");
    let text = fs::read_to_string(&path).unwrap();
    let partial: String = text.lines().take(2).map(|l| format!("{l}\n")).collect();
    fs::write(&path, partial).unwrap();
    run_experiment(&plan(), Some(dir.path()), 2).unwrap();
    assert_eq!(MatchLog::read(&path).unwrap().digest(), first.cells[0].log_sha256.clone().unwrap());
}

#[test]
fn bad_plans_are_rejected_before_running() {
    let empty = ExperimentPlan::from_toml_str("name = \"x\"\nmatches = []").unwrap();
    assert!(run_experiment(&empty, None, 1).is_err());
    let bad_field = PLAN.replace("field = \"ratio\"", "field = \"nonsense\"");
    assert!(ExperimentPlan::from_toml_str(&bad_field).unwrap().cells().is_err());
    let human = PLAN.replace("{ kind = \"random\" }, { kind = \"random\" }", "{ kind = \"random\" }, { kind = \"human\" }");
    let report = run_experiment(&ExperimentPlan::from_toml_str(&human).unwrap(), None, 1).unwrap();
    assert_eq!(report.failures().count(), 8);
    assert!(report.failures().all(|c| c.note.as_deref().unwrap_or("").contains("human")));
}

#[test]
fn tampered_logs_fail_replay_at_the_edited_line() {
    let cfg = MatchConfig::uniform(GameKind::DivideDollar, 4, AgentSpec::random()).with_rounds(4).with_seed(3);
    let run = run_match(&cfg, &RunOptions::default()).unwrap();
    let mut tampered = run.log.clone();
    let action = tampered.rounds[2].actions.get_mut(&1).unwrap();
    *action = gamebench::Action::Bid(match action {
        gamebench::Action::Bid(b) => (*b + 1) % 101,
        _ => unreachable!(),
    });
    let text = tampered.to_jsonl();
    let reread = MatchLog::from_jsonl(&text).unwrap();
    match replay(&reread) {
        Err(ReplayError::Divergence { index, .. }) => assert_eq!(index, 4),
        other => panic!("expected divergence, got {other:?}"),
    }

    let mut short = run.log.clone();
    short.rounds.pop();
    assert!(matches!(replay(&short), Err(ReplayError::Divergence { index: 5, .. })));
}

#[test]
fn random_guessers_score_fifty() {
    let cfg = MatchConfig::uniform(GameKind::GuessAverage, 10, AgentSpec::random()).with_rounds(10_000).with_seed(2024);
    let run = run_match(&cfg, &RunOptions::default()).unwrap();
    let score = run.score.unwrap().score.to_f64();
    assert!((score - 50.0).abs() <= 1.0, "score {score}");
}
