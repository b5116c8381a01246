use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::agents::AgentSpec;
use crate::config::{GameKind, MatchConfig, PromptVersion};
use crate::matchlog::MatchLog;
use crate::rational::Rational;
use crate::rng::derive_seed;
use crate::scoring::{score, summarize, write_leaderboard, LeaderboardRow, ScoreError};

use super::session::{run_match, RunOptions};

/// One sweep dimension.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "axis", rename_all = "snake_case")]
pub enum Axis {
    Temperature { values: Vec<Rational> },
    PromptVersion { values: Vec<PromptVersion> },
    /// Varies one parameter of matches of `game`; other matches ignore it.
    Param { game: GameKind, field: String, values: Vec<serde_json::Value> },
}

impl Axis {
    fn applies(&self, config: &MatchConfig) -> bool {
        match self {
            Axis::Param { game, .. } => *game == config.kind,
            _ => true,
        }
    }

    fn len(&self) -> usize {
        match self {
            Axis::Temperature { values } => values.len(),
            Axis::PromptVersion { values } => values.len(),
            Axis::Param { values, .. } => values.len(),
        }
    }

    fn apply(&self, config: &mut MatchConfig, i: usize) -> Result<String, String> {
        match self {
            Axis::Temperature { values } => {
                config.temperature = values[i];
                Ok(format!("temperature={}", values[i]))
            }
            Axis::PromptVersion { values } => {
                config.prompt_version = values[i];
                Ok(format!("prompt={}", values[i]))
            }
            Axis::Param { field, values, .. } => {
                config.params.set(field, values[i].clone())?;
                let shown = match &values[i] {
                    serde_json::Value::String(s) => s.clone(),
                    other => other.to_string(),
                };
                Ok(format!("{field}={shown}"))
            }
        }
    }
}

fn one() -> u32 {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "one")]
    pub repeats: u32,
    #[serde(default)]
    pub axes: Vec<Axis>,
    pub matches: Vec<MatchConfig>,
}

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error("plan error: {0}")]
    Plan(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

impl ExperimentPlan {
    pub fn from_toml_str(text: &str) -> Result<Self, ExperimentError> {
        toml::from_str(text).map_err(|e| ExperimentError::Plan(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, ExperimentError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    /// Every cell's config, label and coordinates, in a fixed order.
    pub fn cells(&self) -> Result<Vec<Cell>, ExperimentError> {
        if self.matches.is_empty() {
            return Err(ExperimentError::Plan("plan has no matches".into()));
        }
        if self.repeats == 0 {
            return Err(ExperimentError::Plan("repeats must be >= 1".into()));
        }
        let mut cells = Vec::new();
        for (m, base) in self.matches.iter().enumerate() {
            let axes: Vec<&Axis> = self.axes.iter().filter(|a| a.applies(base)).collect();
            if axes.iter().any(|a| a.len() == 0) {
                return Err(ExperimentError::Plan("an axis has no values".into()));
            }
            let mut grid: Vec<Vec<usize>> = vec![Vec::new()];
            for axis in &axes {
                grid = grid.into_iter().flat_map(|g| (0..axis.len()).map(move |i| [g.clone(), vec![i]].concat())).collect();
            }
            for point in grid {
                let mut config = base.clone();
                let mut parts = Vec::new();
                for (axis, i) in axes.iter().zip(&point) {
                    parts.push(axis.apply(&mut config, *i).map_err(ExperimentError::Plan)?);
                }
                let label = if parts.is_empty() {
                    config.kind.name().to_string()
                } else {
                    format!("{}@{}", config.kind.name(), parts.join(","))
                };
                for r in 0..self.repeats {
                    let mut coords = vec![m as u64];
                    coords.extend(point.iter().map(|i| *i as u64));
                    coords.push(u64::from(r));
                    let seed = derive_seed(self.base_seed, "cell", &coords);
                    cells.push(Cell {
                        index: cells.len(),
                        label: label.clone(),
                        model: roster_label(&config.roster),
                        coords,
                        config: config.clone().with_seed(seed),
                    });
                }
            }
        }
        Ok(cells)
    }
}

/// Distinct seat labels in seat order, joined by `+`.
pub fn roster_label(roster: &[AgentSpec]) -> String {
    let mut seen: Vec<String> = Vec::new();
    for spec in roster {
        let l = spec.label();
        if !seen.contains(&l) {
            seen.push(l);
        }
    }
    seen.join("+")
}

#[derive(Clone, Debug)]
pub struct Cell {
    pub index: usize,
    pub label: String,
    pub model: String,
    pub coords: Vec<u64>,
    pub config: MatchConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub index: usize,
    pub label: String,
    pub model: String,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub log: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub log_sha256: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub score: Option<Rational>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    /// The cell failed and is excluded from the leaderboard.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub failed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestCell {
    pub index: usize,
    pub label: String,
    pub coords: Vec<u64>,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub log: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub log_sha256: Option<String>,
}

/// Run record: the plan, derived seeds and artifact hashes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub plan: ExperimentPlan,
    pub cells: Vec<ManifestCell>,
    pub leaderboard_sha256: String,
}

#[derive(Clone, Debug)]
pub struct ExperimentReport {
    pub cells: Vec<CellResult>,
    pub rows: Vec<LeaderboardRow>,
    pub leaderboard_csv: String,
}

impl ExperimentReport {
    pub fn failures(&self) -> impl Iterator<Item = &CellResult> {
        self.cells.iter().filter(|c| c.failed)
    }
}

fn cell_log_path(dir: &Path, index: usize) -> PathBuf {
    dir.join("logs").join(format!("cell-{index:04}.jsonl"))
}

/// A complete log already on disk for exactly this cell's config.
fn resume(path: &Path, config: &MatchConfig) -> Option<MatchLog> {
    let log = MatchLog::read(path).ok()?;
    (log.config == *config && (log.terminal.is_some() || log.invalid.is_some())).then_some(log)
}

fn run_cell(cell: &Cell, out_dir: Option<&Path>) -> CellResult {
    let mut result = CellResult {
        index: cell.index,
        label: cell.label.clone(),
        model: cell.model.clone(),
        seed: cell.config.seed,
        log: None,
        log_sha256: None,
        score: None,
        note: None,
        failed: false,
    };
    let log_path = out_dir.map(|d| cell_log_path(d, cell.index));
    let log = match log_path.as_deref().and_then(|p| resume(p, &cell.config)) {
        Some(log) => log,
        None => {
            let has_llm = cell.config.roster.iter().any(|s| matches!(s, AgentSpec::Llm(_)));
            let options = RunOptions {
                transcripts: log_path.as_ref().filter(|_| has_llm).map(|p| p.with_extension("transcript.jsonl")),
            };
            match run_match(&cell.config, &options) {
                Ok(run) => run.log,
                Err(e) => {
                    result.failed = true;
                    result.note = Some(e.to_string());
                    return result;
                }
            }
        }
    };
    if let Some(path) = &log_path {
        if let Err(e) = log.write(path) {
            result.failed = true;
            result.note = Some(e.to_string());
            return result;
        }
        result.log = Some(path.clone());
    }
    result.log_sha256 = Some(log.digest());
    match score(&log) {
        Ok(report) => result.score = Some(report.score),
        Err(ScoreError::NotScored(what)) => result.note = Some(format!("{what} is not scored")),
        Err(e) => {
            result.failed = true;
            result.note = Some(e.to_string());
        }
    }
    result
}

/// Runs every cell (in parallel up to `jobs`), writes logs, the leaderboard
/// and a manifest under `out_dir` when given. Failed cells are reported,
/// not fatal.
pub fn run_experiment(plan: &ExperimentPlan, out_dir: Option<&Path>, jobs: usize) -> Result<ExperimentReport, ExperimentError> {
    let cells = plan.cells()?;
    for cell in &cells {
        cell.config
            .validate()
            .map_err(|v| ExperimentError::Plan(format!("cell {} ({}): {v:?}", cell.index, cell.label)))?;
    }
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir.join("logs"))?;
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| ExperimentError::Plan(e.to_string()))?;
    let results: Vec<CellResult> = pool.install(|| {
        use rayon::prelude::*;
        cells.par_iter().map(|c| run_cell(c, out_dir)).collect()
    });

    let mut groups: Vec<((String, String), Vec<f64>)> = Vec::new();
    let mut slot: BTreeMap<(String, String), usize> = BTreeMap::new();
    for r in &results {
        let key = (r.model.clone(), r.label.clone());
        let i = *slot.entry(key.clone()).or_insert_with(|| {
            groups.push((key, Vec::new()));
            groups.len() - 1
        });
        if let Some(s) = r.score {
            groups[i].1.push(s.to_f64());
        }
    }
    let rows: Vec<LeaderboardRow> = groups
        .iter()
        .filter(|(_, scores)| !scores.is_empty())
        .map(|((model, label), scores)| LeaderboardRow::new(model, label, &summarize(scores)))
        .collect();
    let mut csv_bytes = Vec::new();
    write_leaderboard(&mut csv_bytes, &rows)?;
    let leaderboard_csv = String::from_utf8(csv_bytes).expect("csv output is UTF-8");

    if let Some(dir) = out_dir {
        std::fs::write(dir.join("leaderboard.csv"), &leaderboard_csv)?;
        let manifest = Manifest {
            plan: plan.clone(),
            cells: cells
                .iter()
                .zip(&results)
                .map(|(c, r)| ManifestCell {
                    index: c.index,
                    label: c.label.clone(),
                    coords: c.coords.clone(),
                    seed: r.seed,
                    log: r.log.as_ref().and_then(|p| p.strip_prefix(dir).ok()).map(|p| p.display().to_string()),
                    log_sha256: r.log_sha256.clone(),
                })
                .collect(),
            leaderboard_sha256: hex::encode(Sha256::digest(leaderboard_csv.as_bytes())),
        };
        let text = serde_json::to_string_pretty(&manifest).map_err(|e| ExperimentError::Plan(e.to_string()))?;
        std::fs::write(dir.join("manifest.json"), text + "\n")?;
    }
    Ok(ExperimentReport { cells: results, rows, leaderboard_csv })
}
