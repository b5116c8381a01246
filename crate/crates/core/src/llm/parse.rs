use serde_json::{Map, Value};

use crate::action::{Action, ActionRequest, Constraint, IllegalReason, RequestKind};
use crate::config::PlayerId;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("no JSON object found in the reply")]
    NoJsonFound,
    #[error("reply does not match the requested format: {0}")]
    SchemaMismatch(String),
    #[error("illegal value: {0}")]
    IllegalValue(IllegalReason),
}

/// First well-formed JSON object embedded in `text`.
pub fn first_json_object(text: &str) -> Option<Map<String, Value>> {
    let mut from = 0;
    while let Some(offset) = text[from..].find('{') {
        let start = from + offset;
        let mut stream = serde_json::Deserializer::from_str(&text[start..]).into_iter::<Value>();
        if let Some(Ok(Value::Object(obj))) = stream.next() {
            return Some(obj);
        }
        from = start + 1;
    }
    None
}

fn integer(value: &Value) -> Option<i64> {
    match value {
        Value::Number(n) => n.as_i64().or_else(|| n.as_f64().filter(|f| f.fract() == 0.0).map(|f| f as i64)),
        Value::String(s) => {
            let s = s.trim();
            s.parse::<i64>().ok().or_else(|| s.parse::<f64>().ok().filter(|f| f.fract() == 0.0).map(|f| f as i64))
        }
        _ => None,
    }
}

fn target(value: &Value) -> Result<Option<PlayerId>, String> {
    let label = match value {
        Value::Null => return Ok(None),
        Value::String(s) => s.trim().to_ascii_lowercase(),
        Value::Number(_) => integer(value).map(|n| n.to_string()).unwrap_or_default(),
        _ => return Err("target must be a player label or null".into()),
    };
    if matches!(label.as_str(), "null" | "none" | "") {
        return Ok(None);
    }
    let digits = label.strip_prefix("player_").unwrap_or(&label);
    match digits.parse::<usize>() {
        Ok(n) if n >= 1 => Ok(Some(n - 1)),
        _ => Err(format!("unrecognized target {label:?}")),
    }
}

fn allocation(value: &Value, seats: &[PlayerId]) -> Result<Vec<u64>, String> {
    let gold = |v: &Value| {
        integer(v).and_then(|g| u64::try_from(g).ok()).ok_or_else(|| format!("gold amount {v} is not a non-negative integer"))
    };
    match value {
        Value::Object(map) => seats
            .iter()
            .map(|s| {
                let key = (s + 1).to_string();
                map.get(&key).ok_or_else(|| format!("proposal has no entry for pirate {key}")).and_then(gold)
            })
            .collect(),
        Value::Array(items) => items.iter().map(gold).collect(),
        _ => Err("proposal must be an object keyed by pirate rank".into()),
    }
}

/// Extracts the move requested by `request` from a free-text reply and
/// checks it against the schema.
pub fn parse_action(reply: &str, request: &ActionRequest, actor: PlayerId) -> Result<Action, ParseError> {
    let obj = first_json_object(reply).ok_or(ParseError::NoJsonFound)?;
    let value = obj
        .get(&request.field)
        .ok_or_else(|| ParseError::SchemaMismatch(format!("missing field {:?}", request.field)))?;
    let mismatch = |m: String| ParseError::SchemaMismatch(m);
    let action = match (&request.constraint, request.kind) {
        (Constraint::Range { .. }, _) => {
            let n = integer(value).ok_or_else(|| mismatch(format!("{value} is not an integer")))?;
            match request.integer_action(n) {
                Some(a) => a,
                None => return Err(ParseError::IllegalValue(out_of_range(request, n))),
            }
        }
        (Constraint::OneOf { options }, _) => {
            let s = value.as_str().ok_or_else(|| mismatch(format!("{value} is not a string")))?;
            request
                .choice_action(s)
                .ok_or_else(|| mismatch(format!("{s:?} is not one of {}", options.join(", "))))?
        }
        (Constraint::Target { .. }, RequestKind::Shot) => Action::Shot(target(value).map_err(mismatch)?),
        (Constraint::Allocation { seats, .. }, RequestKind::PirateProposal) => {
            Action::PirateProposal(allocation(value, seats).map_err(mismatch)?)
        }
        _ => return Err(mismatch("unsupported request".into())),
    };
    request.check(&action, actor).map_err(ParseError::IllegalValue)?;
    Ok(action)
}

fn out_of_range(request: &ActionRequest, got: i64) -> IllegalReason {
    match request.constraint {
        Constraint::Range { min, max } => IllegalReason::OutOfRange { min, max, got },
        _ => IllegalReason::WrongActionType { expected: request.kind },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action::BarChoice;

    fn range(kind: RequestKind, max: i64) -> ActionRequest {
        ActionRequest::new(kind, Constraint::Range { min: 0, max })
    }

    #[test]
    fn string_number() {
        let r = range(RequestKind::ChosenNumber, 100);
        assert_eq!(parse_action(r#"{"chosen_number": "42"}"#, &r, 0), Ok(Action::ChosenNumber(42)));
        assert_eq!(parse_action(r#"{"chosen_number": 42}"#, &r, 0), Ok(Action::ChosenNumber(42)));
    }

    #[test]
    fn leading_prose_ignored() {
        let r = ActionRequest::new(RequestKind::BarDecision, Constraint::OneOf { options: vec!["go".into(), "stay".into()] });
        assert_eq!(parse_action(r#"Sure! {"decision": "go"}"#, &r, 0), Ok(Action::BarDecision(BarChoice::Go)));
    }

    #[test]
    fn out_of_range_is_illegal() {
        let r = range(RequestKind::ChosenNumber, 100);
        assert_eq!(
            parse_action(r#"{"chosen_number": "150"}"#, &r, 0),
            Err(ParseError::IllegalValue(IllegalReason::OutOfRange { min: 0, max: 100, got: 150 }))
        );
    }

    #[test]
    fn negative_bid_is_illegal_not_a_format_error() {
        let r = range(RequestKind::DollarBid, 100);
        assert!(matches!(parse_action(r#"{"bid_amount": -3}"#, &r, 0), Err(ParseError::IllegalValue(_))));
    }

    #[test]
    fn broken_braces_are_skipped() {
        let r = range(RequestKind::DollarBid, 100);
        assert_eq!(parse_action(r#"I think {maybe} {"bid_amount": "10"}"#, &r, 0), Ok(Action::Bid(10)));
        assert_eq!(parse_action("no json here", &r, 0), Err(ParseError::NoJsonFound));
        assert!(matches!(parse_action(r#"{"bid": 3}"#, &r, 0), Err(ParseError::SchemaMismatch(_))));
    }

    #[test]
    fn targets_and_proposals() {
        let shot = ActionRequest::new(RequestKind::Shot, Constraint::Target { targets: vec![1, 6], allow_miss: true });
        assert_eq!(parse_action(r#"{"target": "player_7"}"#, &shot, 0), Ok(Action::Shot(Some(6))));
        assert_eq!(parse_action(r#"{"target": "null"}"#, &shot, 0), Ok(Action::Shot(None)));
        assert_eq!(parse_action(r#"{"target": null}"#, &shot, 0), Ok(Action::Shot(None)));

        let plan = ActionRequest::new(RequestKind::PirateProposal, Constraint::Allocation { seats: vec![7, 8, 9], total: 100 });
        assert_eq!(
            parse_action(r#"{"proposal": {"8": "98", "9": 0, "10": "2"}}"#, &plan, 7),
            Ok(Action::PirateProposal(vec![98, 0, 2]))
        );
    }
}
