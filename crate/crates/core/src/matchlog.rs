//! JSONL match log: a config header, one line per resolved step, then the
//! terminal line.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::action::Action;
use crate::config::{MatchConfig, PlayerId};
use crate::games::{Phase, RoundOutcome, RoundRecord, TerminalState};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogRound {
    pub round: u32,
    pub phase: Phase,
    #[serde(with = "seat_map")]
    pub actions: BTreeMap<PlayerId, Action>,
    pub outcome: RoundOutcome,
    /// Seats whose move was a fallback substitute.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub coerced: Vec<PlayerId>,
}

impl LogRound {
    pub fn from_record(record: &RoundRecord, coerced: Vec<PlayerId>) -> Self {
        LogRound {
            round: record.round,
            phase: record.phase,
            actions: record.actions.clone(),
            outcome: record.outcome.clone(),
            coerced,
        }
    }
}

/// Seat-keyed maps with string keys, readable through tagged enums.
pub mod seat_map {
    use std::collections::BTreeMap;

    use serde::de::Error;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::config::PlayerId;

    pub fn serialize<T: Serialize, S: Serializer>(map: &BTreeMap<PlayerId, T>, s: S) -> Result<S::Ok, S::Error> {
        s.collect_map(map.iter().map(|(k, v)| (k.to_string(), v)))
    }

    pub fn deserialize<'de, T: Deserialize<'de>, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<PlayerId, T>, D::Error> {
        let raw: BTreeMap<String, T> = BTreeMap::deserialize(d)?;
        raw.into_iter()
            .map(|(k, v)| k.parse::<PlayerId>().map(|k| (k, v)).map_err(|_| D::Error::custom(format!("bad seat {k:?}"))))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
enum Line {
    Config { config: MatchConfig },
    Round(LogRound),
    Terminal { terminal: TerminalState },
    Invalid { reason: String },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatchLog {
    pub config: MatchConfig,
    pub rounds: Vec<LogRound>,
    pub terminal: Option<TerminalState>,
    /// Set when the match was abandoned (e.g. an agent failed).
    pub invalid: Option<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum LogError {
    #[error("log line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("log is empty")]
    Empty,
    #[error("log I/O: {0}")]
    Io(#[from] std::io::Error),
}

impl MatchLog {
    pub fn new(config: MatchConfig) -> Self {
        MatchLog { config, rounds: Vec::new(), terminal: None, invalid: None }
    }

    pub fn to_jsonl(&self) -> String {
        let mut lines = vec![Line::Config { config: self.config.clone() }];
        lines.extend(self.rounds.iter().cloned().map(Line::Round));
        if let Some(t) = &self.terminal {
            lines.push(Line::Terminal { terminal: t.clone() });
        }
        if let Some(reason) = &self.invalid {
            lines.push(Line::Invalid { reason: reason.clone() });
        }
        let mut out = String::new();
        for line in lines {
            out.push_str(&serde_json::to_string(&line).expect("log lines serialize"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Self, LogError> {
        let mut log: Option<MatchLog> = None;
        for (i, raw) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let malformed = |message: String| LogError::Malformed { line: i + 1, message };
            let line: Line = serde_json::from_str(raw).map_err(|e| malformed(e.to_string()))?;
            match (line, log.as_mut()) {
                (Line::Config { config }, None) => log = Some(MatchLog::new(config)),
                (Line::Config { .. }, Some(_)) => return Err(malformed("duplicate config line".into())),
                (_, None) => return Err(malformed("first line must be the config".into())),
                (Line::Round(r), Some(l)) => l.rounds.push(r),
                (Line::Terminal { terminal }, Some(l)) => l.terminal = Some(terminal),
                (Line::Invalid { reason }, Some(l)) => l.invalid = Some(reason),
            }
        }
        log.ok_or(LogError::Empty)
    }

    pub fn write(&self, path: &Path) -> Result<(), LogError> {
        std::fs::write(path, self.to_jsonl())?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self, LogError> {
        Self::from_jsonl(&std::fs::read_to_string(path)?)
    }

    /// Hex SHA-256 of the serialized log.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.to_jsonl().as_bytes()))
    }

    pub fn coerced_count(&self) -> usize {
        self.rounds.iter().map(|r| r.coerced.len()).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::AgentSpec;
    use crate::config::GameKind;
    use crate::rational::Rational;

    #[test]
    fn jsonl_round_trip() {
        let config = MatchConfig::uniform(GameKind::DivideDollar, 2, AgentSpec::oracle()).with_rounds(1);
        let mut log = MatchLog::new(config);
        log.rounds.push(LogRound {
            round: 1,
            phase: Phase::Simultaneous,
            actions: [(0, Action::Bid(50)), (1, Action::Bid(50))].into(),
            outcome: RoundOutcome::Dollar { total: 100, exceeded: false, payouts: vec![50, 50] },
            coerced: vec![1],
        });
        log.terminal = Some(TerminalState {
            reason: crate::games::TerminalReason::RoundsComplete,
            rounds: 1,
            totals: vec![Rational::from(50u64); 2],
            survivors: vec![0, 1],
        });
        let text = log.to_jsonl();
        assert_eq!(text.lines().count(), 3);
        assert_eq!(MatchLog::from_jsonl(&text).unwrap(), log);
    }

    #[test]
    fn first_line_must_be_config() {
        assert!(matches!(MatchLog::from_jsonl("{\"record\":\"invalid\",\"reason\":\"x\"}"), Err(LogError::Malformed { .. })));
        assert!(matches!(MatchLog::from_jsonl(""), Err(LogError::Empty)));
    }
}
