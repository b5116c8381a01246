use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use gamebench::agents::{pirate_backward_induction, reference_strategy, StrategyProfile};
use gamebench::llm::stub::{prompt_oracle, StubServer};
use gamebench::orchestrator::{replay, run_experiment, run_match, ExperimentPlan, RunOptions};
use gamebench::{score, AgentSpec, GameKind, MatchConfig, MatchLog, PromptVersion, Rational, ScoreReport};

#[derive(Parser)]
#[command(name = "gamebench", version, about = "Multi-agent game-theory benchmark")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Play one match and write its log and score report.
    Run {
        /// Match config (TOML or JSON).
        config: Option<PathBuf>,
        #[arg(long = "config", conflicts_with = "config")]
        config_flag: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
        #[arg(long)]
        n_rounds: Option<u32>,
        /// Game parameter override, e.g. `--param ratio=4/3`. Repeatable.
        #[arg(long = "param", value_name = "KEY=VALUE")]
        params: Vec<String>,
        #[arg(long, default_value = "runs")]
        out_dir: PathBuf,
    },
    /// Run an experiment plan and write logs, leaderboard.csv and manifest.json.
    Sweep {
        plan: Option<PathBuf>,
        #[arg(long = "plan", conflicts_with = "plan")]
        plan_flag: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
        /// Parallel matches.
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long, default_value = "sweep")]
        out_dir: PathBuf,
    },
    /// Recompute the score report of a match log.
    Score {
        log: PathBuf,
        /// Print the full report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Re-resolve a match log and check it reproduces.
    Replay { log: PathBuf },
    /// Serve the session HTTP API.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        bind: String,
    },
    /// Serve a loopback chat endpoint that answers with reference moves.
    StubLlm {
        #[arg(long, default_value = "127.0.0.1:8089")]
        bind: String,
    },
    /// Print the reference strategy for a game.
    Oracle {
        game: GameKind,
        /// Number of players.
        #[arg(long, default_value_t = 10)]
        n: usize,
        /// Pirate or Dollar gold.
        #[arg(long)]
        gold: Option<u64>,
        #[arg(long = "param", value_name = "KEY=VALUE")]
        params: Vec<String>,
    },
}

#[derive(Args, Clone, Default)]
struct Overrides {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    prompt_version: Option<PromptVersion>,
    #[arg(long)]
    temperature: Option<Rational>,
}

impl Overrides {
    fn apply(&self, config: &mut MatchConfig) {
        if let Some(s) = self.seed {
            config.seed = s;
        }
        if let Some(v) = self.prompt_version {
            config.prompt_version = v;
        }
        if let Some(t) = self.temperature {
            config.temperature = t;
        }
    }
}

type Result<T> = std::result::Result<T, String>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Run { config, config_flag, overrides, n_rounds, params, out_dir } => {
            let path = required(config.or(config_flag), "a config path")?;
            cmd_run(&path, &overrides, n_rounds, &params, &out_dir)
        }
        Command::Sweep { plan, plan_flag, overrides, jobs, out_dir } => {
            let path = required(plan.or(plan_flag), "a plan path")?;
            cmd_sweep(&path, &overrides, jobs, &out_dir)
        }
        Command::Score { log, json } => cmd_score(&log, json),
        Command::Replay { log } => cmd_replay(&log),
        Command::Serve { bind } => cmd_serve(&bind),
        Command::StubLlm { bind } => {
            let server = StubServer::bind(&bind, prompt_oracle).map_err(|e| format!("bind {bind}: {e}"))?;
            println!("stub chat endpoint at {}", server.base_url());
            server.wait();
            Ok(())
        }
        Command::Oracle { game, n, gold, params } => cmd_oracle(game, n, gold, &params),
    }
}

fn required(path: Option<PathBuf>, what: &str) -> Result<PathBuf> {
    match path {
        Some(p) => Ok(p),
        None => {
            use clap::CommandFactory;
            Cli::command().error(clap::error::ErrorKind::MissingRequiredArgument, format!("expected {what}")).exit()
        }
    }
}

fn parse_param(raw: &str) -> Result<(String, serde_json::Value)> {
    let (key, value) = raw.split_once('=').ok_or_else(|| format!("--param {raw:?} is not KEY=VALUE"))?;
    let value = serde_json::from_str(value).unwrap_or_else(|_| serde_json::Value::String(value.to_string()));
    Ok((key.trim().to_string(), value))
}

fn cmd_run(path: &Path, overrides: &Overrides, n_rounds: Option<u32>, params: &[String], out_dir: &Path) -> Result<()> {
    let mut config = MatchConfig::load(path).map_err(|e| format!("{}: {e}", path.display()))?;
    overrides.apply(&mut config);
    if let Some(k) = n_rounds {
        config.n_rounds = k;
    }
    for raw in params {
        let (key, value) = parse_param(raw)?;
        config.params.set(&key, value)?;
    }
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("match").to_string();
    std::fs::create_dir_all(out_dir).map_err(|e| format!("{}: {e}", out_dir.display()))?;
    let has_llm = config.roster.iter().any(|s| matches!(s, AgentSpec::Llm(_)));
    let options = RunOptions { transcripts: has_llm.then(|| out_dir.join(format!("{stem}.transcript.jsonl"))) };
    let run = run_match(&config, &options).map_err(|e| e.to_string())?;
    let log_path = out_dir.join(format!("{stem}.jsonl"));
    run.log.write(&log_path).map_err(|e| e.to_string())?;
    println!("log: {}", log_path.display());
    if let Some(reason) = &run.log.invalid {
        return Err(format!("match aborted: {reason}"));
    }
    match run.score {
        Ok(report) => {
            let score_path = out_dir.join(format!("{stem}.score.json"));
            write_json(&score_path, &report)?;
            println!("score report: {}", score_path.display());
            print_report(&report);
            Ok(())
        }
        Err(gamebench::scoring::ScoreError::NotScored(what)) => {
            println!("{what} is not scored");
            Ok(())
        }
        Err(e) => Err(e.to_string()),
    }
}

fn write_json(path: &Path, value: &ScoreReport) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| e.to_string())?;
    std::fs::write(path, text + "\n").map_err(|e| format!("{}: {e}", path.display()))
}

fn cmd_sweep(path: &Path, overrides: &Overrides, jobs: Option<usize>, out_dir: &Path) -> Result<()> {
    let mut plan = ExperimentPlan::load(path).map_err(|e| format!("{}: {e}", path.display()))?;
    if let Some(seed) = overrides.seed {
        plan.base_seed = seed;
    }
    let per_match = Overrides { seed: None, ..overrides.clone() };
    for m in &mut plan.matches {
        per_match.apply(m);
    }
    let jobs = jobs.unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1));
    let report = run_experiment(&plan, Some(out_dir), jobs).map_err(|e| e.to_string())?;
    print!("{}", report.leaderboard_csv);
    println!("leaderboard: {}", out_dir.join("leaderboard.csv").display());
    let failures: Vec<String> = report
        .failures()
        .map(|c| format!("cell {} ({}): {}", c.index, c.label, c.note.as_deref().unwrap_or("failed")))
        .collect();
    if failures.is_empty() {
        Ok(())
    } else {
        Err(format!("{} cell(s) failed\n{}", failures.len(), failures.join("\n")))
    }
}

/// `places` decimals with trailing zeros dropped.
fn trimmed(r: Rational, places: u32) -> String {
    let s = r.to_decimal_string(places);
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn short(r: Rational) -> String {
    trimmed(r, 2)
}

fn print_report(report: &ScoreReport) {
    println!("{} score: {} (exact {})", report.game, report.score.to_decimal_string(1), trimmed(report.score, 4));
    let rounds: Vec<String> = report.per_round.iter().map(|r| short(*r)).collect();
    println!("raw: {}  per round: [{}]", short(report.raw), rounds.join(", "));
    if let Some(v) = &report.pirate_votes {
        println!("vote accuracy: {}/{}", v.correct, v.votes);
    }
    if report.coerced_moves > 0 {
        println!("coerced moves: {}", report.coerced_moves);
    }
}

fn read_log(path: &Path) -> Result<MatchLog> {
    MatchLog::read(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn cmd_score(path: &Path, json: bool) -> Result<()> {
    let log = read_log(path)?;
    let report = score(&log).map_err(|e| e.to_string())?;
    if json {
        println!("{}", serde_json::to_string_pretty(&report).map_err(|e| e.to_string())?);
    } else {
        print_report(&report);
    }
    Ok(())
}

fn cmd_replay(path: &Path) -> Result<()> {
    let log = read_log(path)?;
    let replayed = replay(&log).map_err(|e| e.to_string())?;
    println!("replay matches: {} steps, sha256 {}", replayed.rounds.len(), replayed.digest());
    if let Ok(report) = score(&replayed) {
        print_report(&report);
    }
    Ok(())
}

fn cmd_serve(bind: &str) -> Result<()> {
    let rt = tokio::runtime::Runtime::new().map_err(|e| e.to_string())?;
    rt.block_on(async {
        let listener = tokio::net::TcpListener::bind(bind).await.map_err(|e| format!("bind {bind}: {e}"))?;
        println!("listening on http://{}", listener.local_addr().map_err(|e| e.to_string())?);
        gamebench_server::serve(listener, gamebench_server::AppState::default()).await.map_err(|e| e.to_string())
    })
}

fn tuple(values: &[u64]) -> String {
    let parts: Vec<String> = values.iter().map(u64::to_string).collect();
    format!("({})", parts.join(","))
}

fn cmd_oracle(game: GameKind, n: usize, gold: Option<u64>, params: &[String]) -> Result<()> {
    let mut config = MatchConfig::uniform(game, n, AgentSpec::oracle());
    if let Some(g) = gold {
        config.params.set("gold", serde_json::json!(g))?;
    }
    for raw in params {
        let (key, value) = parse_param(raw)?;
        config.params.set(&key, value)?;
    }
    config.validate().map_err(|v| format!("invalid setting: {v:?}"))?;
    println!("{game} with {n} players");
    match reference_strategy(&config) {
        StrategyProfile::Number { value } => println!("every player chooses {value}"),
        StrategyProfile::Midpoint { min, max } => println!("players alternate around the midpoint of [{min}, {max}]"),
        StrategyProfile::MixedBar { go_probability, rotation_attendees } => {
            println!("mixed: go with probability {}", go_probability.to_percent_string());
            println!("rotation: {rotation_attendees} of {n} go each round, player i goes when (i + round) mod {n} < {rotation_attendees}");
        }
        StrategyProfile::EvenSplit { gold, n } => println!("each player bids {} of {gold}", gold / n.max(1) as u64),
        StrategyProfile::FreeRide => println!("contribute nothing"),
        StrategyProfile::ContributeAll => println!("contribute every token"),
        StrategyProfile::Dish { dish } => println!("order the {} dish", serde_json::to_value(dish).unwrap_or_default().as_str().unwrap_or("?")),
        StrategyProfile::ShadedBid { factor } => println!("bid floor({} x valuation)", short(factor)),
        StrategyProfile::Truthful => println!("bid your valuation"),
        StrategyProfile::TargetStrongest => println!("shoot the alive opponent with the highest hit rate"),
        StrategyProfile::Pirate { gold, first_proposal } => {
            println!("first proposal: {}", tuple(&first_proposal));
            println!("alive  survives  proposal");
            for suffix in pirate_backward_induction(n, gold).iter().rev() {
                let verdict = if suffix.proposer_survives { "yes" } else { "no" };
                println!("{:>5}  {verdict:>8}  {}", suffix.alive, tuple(&suffix.proposal));
            }
        }
    }
    Ok(())
}
