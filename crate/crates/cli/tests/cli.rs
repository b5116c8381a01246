use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use gamebench::llm::stub::{prompt_oracle, StubServer};
use gamebench::MatchLog;

fn gamebench(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gamebench")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn fixture(name: &str) -> String {
    format!("{}/../core/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

const GUESS: &str = r#"
game = "guess_average"
n_players = 4
n_rounds = 5
seed = 1

[[agents]]
kind = "oracle"

[[agents]]
kind = "random"
count = 3
"#;

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.display().to_string()
}

#[test]
fn oracle_prints_the_pirate_proposal() {
    let o = gamebench(&["oracle", "pirate", "--n", "10", "--gold", "100"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("(96,0,1,0,1,0,1,0,1,0)"), "{}", stdout(&o));
    let o = gamebench(&["oracle", "guess_average", "--param", "ratio=4/3"]);
    assert!(stdout(&o).contains("every player chooses 100"), "{}", stdout(&o));
}

#[test]
fn score_of_the_pirate_fixture() {
    let o = gamebench(&["score", &fixture("pirate_table.jsonl")]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("pirate_game score: 80.6 "), "{}", stdout(&o));
    assert!(stdout(&o).contains("vote accuracy: 19/24"));
}

#[test]
fn exit_codes() {
    let o = gamebench(&["run", "missing.toml"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("missing.toml"), "{}", stderr(&o));
    assert_eq!(gamebench(&[]).status.code(), Some(2));
    assert_eq!(gamebench(&["bogus"]).status.code(), Some(2));
    assert_eq!(gamebench(&["run"]).status.code(), Some(2));
    assert_eq!(gamebench(&["run", "x.toml", "--seed", "minus-one"]).status.code(), Some(2));
    assert_eq!(gamebench(&["oracle", "chess"]).status.code(), Some(2));
    assert_eq!(gamebench(&["replay", "missing.jsonl"]).status.code(), Some(1));
}

#[test]
fn run_then_rescore_and_replay() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(dir.path(), "guess.toml", GUESS);
    let out = dir.path().join("out");
    let o = gamebench(&["run", "--config", &config, "--out-dir", out.to_str().unwrap(), "--seed", "77", "--param", "ratio=1/2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let log_path = out.join("guess.jsonl");
    assert!(stdout(&o).contains(&format!("log: {}", log_path.display())));
    let log = MatchLog::read(&log_path).unwrap();
    assert_eq!(log.config.seed, 77);
    assert_eq!(log.config.guess_params().unwrap().ratio, gamebench::Rational::new(1, 2));
    assert_eq!(log.rounds.len(), 5);

    let embedded: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("guess.score.json")).unwrap()).unwrap();
    let o = gamebench(&["score", "--json", log_path.to_str().unwrap()]);
    let rescored: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(rescored, embedded);

    let o = gamebench(&["replay", log_path.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains(&log.digest()));

    let tampered = fs::read_to_string(&log_path).unwrap().replacen("\"round\":3", "\"round\":4", 1);
    let bad = write(dir.path(), "bad.jsonl", &tampered);
    let o = gamebench(&["replay", &bad]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("diverges at log line 4"), "{}", stderr(&o));
}

#[test]
fn sweeps_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let plan = write(
        dir.path(),
        "plan.toml",
        &format!(
            "name = \"cli\"\nbase_seed = 5\nrepeats = 3\n\n[[axes]]\naxis = \"prompt_version\"\nvalues = [\"v1\", \"v2\"]\n\n[[matches]]\n{}",
            GUESS.replace("\n[[agents]]", "\n[[matches.agents]]")
        ),
    );
    let run = |out: &str, extra: &[&str]| {
        let out = dir.path().join(out);
        let mut args = vec!["sweep", plan.as_str(), "--out-dir", out.to_str().unwrap(), "--jobs", "2"];
        args.extend_from_slice(extra);
        let o = gamebench(&args);
        assert!(o.status.success(), "{}", stderr(&o));
        out
    };
    let a = run("a", &[]);
    let b = run("b", &[]);
    let c = run("c", &["--seed", "6"]);
    let csv = fs::read_to_string(a.join("leaderboard.csv")).unwrap();
    assert_eq!(csv, fs::read_to_string(b.join("leaderboard.csv")).unwrap());
    assert_eq!(csv.lines().count(), 3, "{csv}");
    assert!(csv.contains("oracle+random,guess_average@prompt=v2,"), "{csv}");
    for i in 0..6 {
        let name = format!("logs/cell-{i:04}.jsonl");
        assert_eq!(fs::read(a.join(&name)).unwrap(), fs::read(b.join(&name)).unwrap());
        assert_ne!(fs::read(a.join(&name)).unwrap(), fs::read(c.join(&name)).unwrap());
    }
}

#[test]
fn run_with_stub_llm_seats() {
    let server = StubServer::start(prompt_oracle).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let seats: String = (1..=4)
        .map(|p| format!("[[agents]]\nkind = \"llm\"\nbase_url = \"{}\"\nmodel = \"stub:player_{p}\"\n\n", server.base_url()))
        .collect();
    let config = write(dir.path(), "dollar.toml", &format!("game = \"divide_dollar\"\nn_players = 4\nn_rounds = 2\n\n{seats}"));
    let out = dir.path().join("out");
    let o = gamebench(&["run", &config, "--out-dir", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("divide_dollar score: 100.0"), "{}", stdout(&o));
    let transcript = fs::read_to_string(out.join("dollar.transcript.jsonl")).unwrap();
    assert_eq!(transcript.lines().count(), 8);
    assert_eq!(server.hits(), 8);
}
