//! Loopback chat-completions endpoint for offline runs and tests.
//!
//! [`StubServer`] answers `POST .../chat/completions` on 127.0.0.1 with
//! whatever its responder returns. [`prompt_oracle`] is a responder that
//! reads the default-wording prompt and replies with the reference move.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Arc;
use std::thread;

use serde_json::{json, Map, Value};

use crate::action::Vote;
use crate::agents::{pirate_optimal_proposal, pirate_optimal_vote, rotation_attendees, rotation_goes};
use crate::rational::Rational;

/// What the stub sends back for one request.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StubReply {
    /// A 200 response carrying this assistant message.
    Content(String),
    /// A bare status code, e.g. 500 or 429.
    Status(u16),
}

type Responder = dyn Fn(&Value) -> StubReply + Send + Sync;

pub struct StubServer {
    addr: SocketAddr,
    stop: Arc<AtomicBool>,
    hits: Arc<AtomicUsize>,
    handle: Option<thread::JoinHandle<()>>,
}

impl StubServer {
    pub fn start(responder: impl Fn(&Value) -> StubReply + Send + Sync + 'static) -> std::io::Result<Self> {
        Self::bind("127.0.0.1:0", responder)
    }

    pub fn bind(addr: &str, responder: impl Fn(&Value) -> StubReply + Send + Sync + 'static) -> std::io::Result<Self> {
        let listener = TcpListener::bind(addr)?;
        let addr = listener.local_addr()?;
        let stop = Arc::new(AtomicBool::new(false));
        let hits = Arc::new(AtomicUsize::new(0));
        let responder: Arc<Responder> = Arc::new(responder);
        let handle = {
            let stop = stop.clone();
            let hits = hits.clone();
            thread::spawn(move || {
                for conn in listener.incoming() {
                    if stop.load(Ordering::SeqCst) {
                        break;
                    }
                    let Ok(conn) = conn else { continue };
                    let responder = responder.clone();
                    let hits = hits.clone();
                    thread::spawn(move || {
                        let _ = serve(conn, &*responder, &hits);
                    });
                }
            })
        };
        Ok(StubServer { addr, stop, hits, handle: Some(handle) })
    }

    /// Base URL to put in an endpoint descriptor.
    pub fn base_url(&self) -> String {
        format!("http://{}/v1", self.addr)
    }

    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    /// Requests answered so far.
    pub fn hits(&self) -> usize {
        self.hits.load(Ordering::SeqCst)
    }

    /// Serves until the process exits.
    pub fn wait(mut self) {
        if let Some(h) = self.handle.take() {
            let _ = h.join();
        }
    }
}

impl Drop for StubServer {
    fn drop(&mut self) {
        if let Some(h) = self.handle.take() {
            self.stop.store(true, Ordering::SeqCst);
            let _ = TcpStream::connect(self.addr);
            let _ = h.join();
        }
    }
}

fn serve(conn: TcpStream, responder: &Responder, hits: &AtomicUsize) -> std::io::Result<()> {
    let mut reader = BufReader::new(conn.try_clone()?);
    let mut length = 0usize;
    let mut line = String::new();
    reader.read_line(&mut line)?;
    if line.is_empty() {
        return Ok(());
    }
    loop {
        line.clear();
        if reader.read_line(&mut line)? == 0 || line.trim().is_empty() {
            break;
        }
        if let Some((name, value)) = line.split_once(':') {
            if name.trim().eq_ignore_ascii_case("content-length") {
                length = value.trim().parse().unwrap_or(0);
            }
        }
    }
    let mut body = vec![0u8; length];
    reader.read_exact(&mut body)?;
    let request: Value = serde_json::from_slice(&body).unwrap_or(Value::Null);
    hits.fetch_add(1, Ordering::SeqCst);
    let (status, payload) = match responder(&request) {
        StubReply::Content(text) => (
            200,
            json!({"choices": [{"index": 0, "message": {"role": "assistant", "content": text}}]}).to_string(),
        ),
        StubReply::Status(code) => (code, json!({"error": {"message": "stub error"}}).to_string()),
    };
    let mut out = conn;
    write!(
        out,
        "HTTP/1.1 {status} STUB\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{payload}",
        payload.len()
    )?;
    out.flush()
}

/// Replies with the reference move for the prompt in `body`, or a refusal
/// when the prompt is not recognized.
///
/// The `model` field may carry `player_N`, which enables seat-dependent
/// rules (Bar rotation, Dollar remainders), and `zero_bid`, which makes
/// auction bids 0.
pub fn prompt_oracle(body: &Value) -> StubReply {
    StubReply::Content(oracle_reply(body).unwrap_or_else(|| "I am not sure what to do.".to_string()))
}

fn oracle_reply(body: &Value) -> Option<String> {
    let messages = body.get("messages")?.as_array()?;
    let text = |role: &str| {
        messages
            .iter()
            .filter(|m| m.get("role").and_then(Value::as_str) == Some(role))
            .filter_map(|m| m.get("content").and_then(Value::as_str))
            .collect::<Vec<_>>()
    };
    let system = text("system").join("\n");
    let request = *text("user").last()?;
    let model = body.get("model").and_then(Value::as_str).unwrap_or("");
    let seat = model
        .split(|c: char| !c.is_ascii_alphanumeric() && c != '_')
        .find_map(|t| t.strip_prefix("player_"))
        .and_then(|n| n.parse::<usize>().ok())
        .and_then(|n| n.checked_sub(1));
    let zero_bid = model.contains("zero_bid");
    let n: usize = between(&system, "played by ", " players")?.parse().ok()?;

    let reply = if request.contains("\"chosen_number\"") {
        let min: i64 = between(&system, "number between ", " and ")?.parse().ok()?;
        let max: i64 = between(&system, &format!("number between {min} and "), ",")?.parse().ok()?;
        let ratio: Rational = between(&system, "The target number is ", " of")?.parse().ok()?;
        let value = if ratio < Rational::ONE {
            min
        } else if ratio > Rational::ONE {
            max
        } else {
            min + (max - min) / 2
        };
        json!({"chosen_number": value.to_string()})
    } else if request.contains("\"go_or_stay\"") {
        let capacity: Rational = between(&system, "less than ", " of")?.parse().ok()?;
        let round: u32 = between(request, "Now round ", " starts")?.parse().ok()?;
        let attendees = rotation_attendees(capacity, n);
        let go = seat.is_some_and(|s| rotation_goes(s, round, n, attendees));
        json!({"decision": if go { "go" } else { "stay" }})
    } else if request.contains("\"bid_amount\"") {
        let gold: u64 = between(&system, "dividing ", " golds")?.parse().ok()?;
        let extra = u64::from(seat.is_some_and(|s| (s as u64) < gold % n as u64));
        json!({"bid_amount": (gold / n as u64 + extra).to_string()})
    } else if request.contains("\"tokens_contributed\"") {
        let factor: Rational = between(&system, "by the factor ", " ")?.parse().ok()?;
        let limit: u64 = between(request, "integer_between_0_and_", "\"")?.parse().ok()?;
        let all = factor / Rational::from(n) > Rational::ONE;
        json!({"tokens_contributed": (if all { limit } else { 0 }).to_string()})
    } else if request.contains("\"costly_or_cheap\"") {
        json!({"chosen_dish": "costly"})
    } else if request.contains("{\"bid\":") {
        let valuation: u64 = between(request, "item is ", ".")?.parse().ok()?;
        let bid = if zero_bid { 0 } else { valuation * (n as u64 - 1) / n as u64 };
        json!({"bid": bid.to_string()})
    } else if request.contains("\"playerID_or_null\"") {
        let me = format!("player_{}", between(request, "You are player_", ".")?);
        let rates = json_after(request, "shooting order are: ")?;
        let target = rates
            .iter()
            .filter(|(name, _)| **name != me)
            .filter_map(|(name, rate)| {
                let id: usize = name.strip_prefix("player_")?.parse().ok()?;
                let rate: u32 = rate.as_str()?.trim_end_matches('%').parse().ok()?;
                Some((rate, std::cmp::Reverse(id), name))
            })
            .max()
            .map(|(_, _, name)| name.clone());
        json!({"target": target})
    } else if request.contains("\"proposal\"") {
        let gold: u64 = between(request, "divide ", " golds")?.parse().ok()?;
        let format = json_after(request, "{\"proposal\": ")?;
        let mut ranks: Vec<usize> = format.keys().filter_map(|k| k.parse().ok()).collect();
        ranks.sort_unstable();
        let plan = pirate_optimal_proposal(ranks.len(), *ranks.first()?, gold);
        let proposal: Map<String, Value> =
            ranks.iter().zip(plan).map(|(r, g)| (r.to_string(), Value::String(g.to_string()))).collect();
        json!({"proposal": proposal})
    } else if request.contains("\"accept_or_reject\"") {
        let my_rank = ordinal(between(&system, "You are the ", " most senior")?)?;
        let plan = json_after(request, "The proposed plan is ")?;
        let proposer = plan.keys().filter_map(|k| k.parse::<usize>().ok()).min()?;
        let share: u64 = between(request, "You will get ", " golds")?.parse().ok()?;
        let vote = pirate_optimal_vote(my_rank, proposer, share);
        json!({"decision": if vote == Vote::Accept { "accept" } else { "reject" }})
    } else {
        return None;
    };
    Some(reply.to_string())
}

/// Text strictly between the last `start` and the next `end`.
fn between<'a>(text: &'a str, start: &str, end: &str) -> Option<&'a str> {
    let from = text.rfind(start)? + start.len();
    let len = text[from..].find(end)?;
    Some(text[from..from + len].trim())
}

fn json_after(text: &str, marker: &str) -> Option<Map<String, Value>> {
    let from = text.rfind(marker)? + marker.len();
    let mut stream = serde_json::Deserializer::from_str(&text[from..]).into_iter::<Map<String, Value>>();
    stream.next()?.ok()
}

/// "3rd" -> 3.
fn ordinal(text: &str) -> Option<usize> {
    text.trim_end_matches(|c: char| c.is_ascii_alphabetic()).parse().ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ask(system: &str, user: &str, model: &str) -> Value {
        let body = json!({"model": model, "messages": [
            {"role": "system", "content": system},
            {"role": "user", "content": user},
        ]});
        let StubReply::Content(text) = prompt_oracle(&body) else { panic!() };
        serde_json::from_str(&text).unwrap_or(Value::Null)
    }

    #[test]
    fn helpers() {
        assert_eq!(between("a [x] b [y] c", "[", "]"), Some("y"));
        assert_eq!(ordinal("10th"), Some(10));
        assert_eq!(ordinal("1st"), Some(1));
    }

    #[test]
    fn royale_targets_the_strongest_other_player() {
        let system = "You are participating in a game played by 3 players.";
        let user = "The remaining players' names and hit rates ranked by shooting order are: {\"player_1\": \"35%\", \"player_2\": \"80%\", \"player_3\": \"80%\"}. You are player_3. Your hit rate is 80%.\n{\"target\": \"playerID_or_null\"}";
        assert_eq!(ask(system, user, "m"), json!({"target": "player_2"}));
    }

    #[test]
    fn unknown_prompts_get_prose() {
        let body = json!({"model": "m", "messages": [{"role": "user", "content": "hello"}]});
        assert_eq!(prompt_oracle(&body), StubReply::Content("I am not sure what to do.".into()));
    }

    #[test]
    fn serves_over_http() {
        let server = StubServer::start(|_| StubReply::Content("{\"bid\": \"3\"}".into())).unwrap();
        let reply = ureq::post(&format!("{}/chat/completions", server.base_url()))
            .send("{}")
            .unwrap()
            .body_mut()
            .read_to_string()
            .unwrap();
        assert_eq!(super::super::client::extract_reply(&reply).unwrap(), "{\"bid\": \"3\"}");
        assert_eq!(server.hits(), 1);
    }
}
