//! Moves, the per-step action schema, and legality reasons.

use serde::{Deserialize, Serialize};

use crate::config::PlayerId;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BarChoice {
    Go,
    Stay,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DishChoice {
    Costly,
    Cheap,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Vote {
    Accept,
    Reject,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    ChosenNumber(i64),
    BarDecision(BarChoice),
    Bid(u64),
    Contribution(u64),
    Dish(DishChoice),
    AuctionBid(u64),
    /// `None` is an intentional miss.
    Shot(Option<PlayerId>),
    /// Gold for each alive pirate, proposer first, in seniority order.
    PirateProposal(Vec<u64>),
    PirateVote(Vote),
}

/// Which move a step asks for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RequestKind {
    ChosenNumber,
    BarDecision,
    DollarBid,
    Contribution,
    Dish,
    AuctionBid,
    Shot,
    PirateProposal,
    PirateVote,
}

impl RequestKind {
    /// JSON field name used in prompts and replies.
    pub fn field(self) -> &'static str {
        match self {
            RequestKind::ChosenNumber => "chosen_number",
            RequestKind::BarDecision => "decision",
            RequestKind::DollarBid => "bid_amount",
            RequestKind::Contribution => "tokens_contributed",
            RequestKind::Dish => "chosen_dish",
            RequestKind::AuctionBid => "bid",
            RequestKind::Shot => "target",
            RequestKind::PirateProposal => "proposal",
            RequestKind::PirateVote => "decision",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Constraint {
    /// Inclusive integer range.
    Range { min: i64, max: i64 },
    OneOf { options: Vec<String> },
    Target { targets: Vec<PlayerId>, allow_miss: bool },
    /// Non-negative integers for `seats` (seniority order) summing to `total`.
    Allocation { seats: Vec<PlayerId>, total: u64 },
}

/// Legal-action schema for one player at the current step.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionRequest {
    pub kind: RequestKind,
    pub field: String,
    pub constraint: Constraint,
}

impl ActionRequest {
    pub fn new(kind: RequestKind, constraint: Constraint) -> Self {
        ActionRequest { kind, field: kind.field().to_string(), constraint }
    }

    /// Builds an integer move of the requested kind (range not checked).
    pub fn integer_action(&self, value: i64) -> Option<Action> {
        let unsigned = u64::try_from(value).ok();
        match self.kind {
            RequestKind::ChosenNumber => Some(Action::ChosenNumber(value)),
            RequestKind::DollarBid => unsigned.map(Action::Bid),
            RequestKind::Contribution => unsigned.map(Action::Contribution),
            RequestKind::AuctionBid => unsigned.map(Action::AuctionBid),
            _ => None,
        }
    }

    /// Builds a categorical move from one of the option strings.
    pub fn choice_action(&self, option: &str) -> Option<Action> {
        let opt = option.trim().to_ascii_lowercase();
        match (self.kind, opt.as_str()) {
            (RequestKind::BarDecision, "go") => Some(Action::BarDecision(BarChoice::Go)),
            (RequestKind::BarDecision, "stay") => Some(Action::BarDecision(BarChoice::Stay)),
            (RequestKind::Dish, "costly") => Some(Action::Dish(DishChoice::Costly)),
            (RequestKind::Dish, "cheap") => Some(Action::Dish(DishChoice::Cheap)),
            (RequestKind::PirateVote, "accept") => Some(Action::PirateVote(Vote::Accept)),
            (RequestKind::PirateVote, "reject") => Some(Action::PirateVote(Vote::Reject)),
            _ => None,
        }
    }
}

impl ActionRequest {
    /// Checks `action` against this schema. `actor` distinguishes self-targets.
    pub fn check(&self, action: &Action, actor: PlayerId) -> Result<(), IllegalReason> {
        if action.request_kind() != self.kind {
            return Err(IllegalReason::WrongActionType { expected: self.kind });
        }
        match (&self.constraint, action) {
            (Constraint::Range { min, max }, _) => {
                let got = action.integer_value().unwrap_or(i64::MAX);
                if got < *min || got > *max {
                    return Err(IllegalReason::OutOfRange { min: *min, max: *max, got });
                }
            }
            (Constraint::Target { targets, allow_miss }, Action::Shot(target)) => match target {
                None if !allow_miss => return Err(IllegalReason::TargetNotAlive),
                None => {}
                Some(t) if !targets.contains(t) => {
                    return Err(if *t == actor { IllegalReason::TargetIsSelf } else { IllegalReason::TargetNotAlive });
                }
                Some(_) => {}
            },
            (Constraint::Allocation { seats, total }, Action::PirateProposal(alloc)) => {
                if alloc.len() != seats.len() {
                    return Err(IllegalReason::WrongLength { expected: seats.len(), got: alloc.len() });
                }
                let sum = alloc.iter().try_fold(0u64, |acc, g| acc.checked_add(*g)).unwrap_or(u64::MAX);
                if sum != *total {
                    return Err(IllegalReason::SumMismatch { expected: *total, got: sum });
                }
            }
            _ => {}
        }
        Ok(())
    }
}

impl Action {
    pub fn request_kind(&self) -> RequestKind {
        match self {
            Action::ChosenNumber(_) => RequestKind::ChosenNumber,
            Action::BarDecision(_) => RequestKind::BarDecision,
            Action::Bid(_) => RequestKind::DollarBid,
            Action::Contribution(_) => RequestKind::Contribution,
            Action::Dish(_) => RequestKind::Dish,
            Action::AuctionBid(_) => RequestKind::AuctionBid,
            Action::Shot(_) => RequestKind::Shot,
            Action::PirateProposal(_) => RequestKind::PirateProposal,
            Action::PirateVote(_) => RequestKind::PirateVote,
        }
    }

    /// Scalar value of integer moves.
    pub fn integer_value(&self) -> Option<i64> {
        match self {
            Action::ChosenNumber(v) => Some(*v),
            Action::Bid(v) | Action::Contribution(v) | Action::AuctionBid(v) => i64::try_from(*v).ok(),
            _ => None,
        }
    }

    /// The reply-format JSON an agent would have sent for this move, e.g.
    /// `{"chosen_number": "42"}`. `seat_label` renders a seat id for prompts.
    pub fn echo(&self, seats: &[PlayerId], seat_label: impl Fn(PlayerId) -> String) -> String {
        use serde_json::{json, Map, Value};

        let field = self.request_kind().field();
        let value = match self {
            Action::ChosenNumber(v) => json!(v.to_string()),
            Action::Bid(v) | Action::Contribution(v) | Action::AuctionBid(v) => json!(v.to_string()),
            Action::BarDecision(BarChoice::Go) => json!("go"),
            Action::BarDecision(BarChoice::Stay) => json!("stay"),
            Action::Dish(DishChoice::Costly) => json!("costly"),
            Action::Dish(DishChoice::Cheap) => json!("cheap"),
            Action::PirateVote(Vote::Accept) => json!("accept"),
            Action::PirateVote(Vote::Reject) => json!("reject"),
            Action::Shot(None) => json!("null"),
            Action::Shot(Some(t)) => json!(seat_label(*t)),
            Action::PirateProposal(alloc) => {
                // Built by hand to keep seniority order rather than key order.
                let entries: Vec<String> =
                    seats.iter().zip(alloc).map(|(seat, gold)| format!("\"{}\":\"{gold}\"", seat + 1)).collect();
                return format!("{{\"{field}\":{{{}}}}}", entries.join(","));
            }
        };
        let mut obj = Map::new();
        obj.insert(field.to_string(), value);
        Value::Object(obj).to_string()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, thiserror::Error)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum IllegalReason {
    #[error("value {got} is outside [{min}, {max}]")]
    OutOfRange { min: i64, max: i64, got: i64 },
    #[error("expected a {expected:?} action")]
    WrongActionType { expected: RequestKind },
    #[error("allocation sums to {got}, expected {expected}")]
    SumMismatch { expected: u64, got: u64 },
    #[error("allocation has {got} entries, expected {expected}")]
    WrongLength { expected: usize, got: usize },
    #[error("target is not an alive player")]
    TargetNotAlive,
    #[error("players may not target themselves")]
    TargetIsSelf,
    #[error("it is not this player's turn")]
    NotYourTurn,
    #[error("the game is over")]
    GameOver,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn echo_uses_reply_format() {
        let label = |p: PlayerId| format!("player_{}", p + 1);
        assert_eq!(Action::ChosenNumber(42).echo(&[], label), r#"{"chosen_number":"42"}"#);
        assert_eq!(Action::Shot(None).echo(&[], label), r#"{"target":"null"}"#);
        assert_eq!(Action::Shot(Some(6)).echo(&[], label), r#"{"target":"player_7"}"#);
        assert_eq!(
            Action::PirateProposal(vec![98, 0, 2]).echo(&[7, 8, 9], label),
            r#"{"proposal":{"8":"98","9":"0","10":"2"}}"#
        );
    }

    #[test]
    fn request_check_reasons() {
        let range = ActionRequest::new(RequestKind::ChosenNumber, Constraint::Range { min: 0, max: 100 });
        assert!(range.check(&Action::ChosenNumber(100), 0).is_ok());
        assert_eq!(
            range.check(&Action::ChosenNumber(101), 0),
            Err(IllegalReason::OutOfRange { min: 0, max: 100, got: 101 })
        );
        assert!(matches!(range.check(&Action::Bid(3), 0), Err(IllegalReason::WrongActionType { .. })));

        let alloc = ActionRequest::new(RequestKind::PirateProposal, Constraint::Allocation { seats: vec![0, 1], total: 100 });
        assert_eq!(
            alloc.check(&Action::PirateProposal(vec![99, 0]), 0),
            Err(IllegalReason::SumMismatch { expected: 100, got: 99 })
        );
        assert!(matches!(alloc.check(&Action::PirateProposal(vec![100]), 0), Err(IllegalReason::WrongLength { .. })));

        let shot = ActionRequest::new(RequestKind::Shot, Constraint::Target { targets: vec![1, 2], allow_miss: true });
        assert_eq!(shot.check(&Action::Shot(Some(0)), 0), Err(IllegalReason::TargetIsSelf));
        assert_eq!(shot.check(&Action::Shot(Some(5)), 0), Err(IllegalReason::TargetNotAlive));
        assert!(shot.check(&Action::Shot(None), 0).is_ok());
    }

    #[test]
    fn action_serde_shape() {
        assert_eq!(serde_json::to_string(&Action::Shot(None)).unwrap(), r#"{"shot":null}"#);
        assert_eq!(
            serde_json::to_string(&Action::BarDecision(BarChoice::Go)).unwrap(),
            r#"{"bar_decision":"go"}"#
        );
    }
}
