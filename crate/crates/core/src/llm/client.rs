use std::collections::HashMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::{Arc, Mutex, OnceLock};
use std::thread;
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use serde_json::{json, Value};

use super::EndpointDescriptor;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum QueryError {
    #[error("transport error: {0}")]
    Transport(String),
    #[error("rate limited")]
    RateLimited,
    #[error("request timed out")]
    Timeout,
    #[error("unexpected response: {0}")]
    BadResponse(String),
}

/// Sends one chat-completions request body and returns the reply text.
pub trait ChatBackend: Send {
    fn complete(&mut self, body: &Value) -> Result<String, QueryError>;
}

pub struct HttpBackend {
    endpoint: EndpointDescriptor,
    agent: ureq::Agent,
}

impl HttpBackend {
    pub fn new(endpoint: EndpointDescriptor) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_millis(endpoint.timeout_ms)))
            .http_status_as_error(false)
            .build()
            .into();
        HttpBackend { endpoint, agent }
    }

    fn url(&self) -> String {
        format!("{}/chat/completions", self.endpoint.base_url.trim_end_matches('/'))
    }

    fn once(&self, body: &Value) -> Result<String, QueryError> {
        throttle(&self.endpoint);
        let mut request = self.agent.post(&self.url()).header("Content-Type", "application/json");
        if let Some(var) = &self.endpoint.api_key_env {
            if let Ok(key) = std::env::var(var) {
                request = request.header("Authorization", &format!("Bearer {key}"));
            }
        }
        let mut response = request.send(body.to_string()).map_err(|e| match e {
            ureq::Error::Timeout(_) => QueryError::Timeout,
            other => QueryError::Transport(other.to_string()),
        })?;
        let status = response.status().as_u16();
        if status == 429 {
            return Err(QueryError::RateLimited);
        }
        let text = response.body_mut().read_to_string().map_err(|e| QueryError::Transport(e.to_string()))?;
        if status >= 400 {
            return Err(QueryError::Transport(format!("HTTP {status}: {text}")));
        }
        extract_reply(&text)
    }
}

/// Reply text from a chat-completions response body.
pub fn extract_reply(text: &str) -> Result<String, QueryError> {
    let v: Value = serde_json::from_str(text).map_err(|e| QueryError::BadResponse(e.to_string()))?;
    v.pointer("/choices/0/message/content")
        .and_then(Value::as_str)
        .map(str::to_string)
        .ok_or_else(|| QueryError::BadResponse("missing choices[0].message.content".into()))
}

impl ChatBackend for HttpBackend {
    fn complete(&mut self, body: &Value) -> Result<String, QueryError> {
        let attempts = self.endpoint.max_retries.max(1);
        let mut last = QueryError::Transport("no attempt made".into());
        for attempt in 0..attempts {
            match self.once(body) {
                Ok(reply) => return Ok(reply),
                Err(QueryError::BadResponse(m)) => return Err(QueryError::BadResponse(m)),
                Err(e) => last = e,
            }
            if attempt + 1 < attempts {
                thread::sleep(backoff(attempt));
            }
        }
        Err(last)
    }
}

fn backoff(attempt: u32) -> Duration {
    Duration::from_millis(200u64.saturating_mul(1 << attempt.min(6)))
}

/// Spaces requests to one base URL to honor `requests_per_minute`.
fn throttle(endpoint: &EndpointDescriptor) {
    let Some(rpm) = endpoint.requests_per_minute.filter(|r| *r > 0) else { return };
    static NEXT: OnceLock<Mutex<HashMap<String, Instant>>> = OnceLock::new();
    let gap = Duration::from_secs(60) / rpm;
    let wait = {
        let mut next = NEXT.get_or_init(Default::default).lock().unwrap_or_else(|e| e.into_inner());
        let now = Instant::now();
        let slot = next.get(&endpoint.base_url).copied().filter(|t| *t > now).unwrap_or(now);
        next.insert(endpoint.base_url.clone(), slot + gap);
        slot - now
    };
    if !wait.is_zero() {
        thread::sleep(wait);
    }
}

/// JSONL mirror of every request and reply.
#[derive(Clone)]
pub struct TranscriptSink {
    out: Arc<Mutex<BufWriter<File>>>,
}

impl TranscriptSink {
    pub fn create(path: &Path) -> std::io::Result<Self> {
        Ok(TranscriptSink { out: Arc::new(Mutex::new(BufWriter::new(File::create(path)?))) })
    }

    pub fn record(&self, player: usize, round: u32, attempt: u32, request: &Value, result: &Result<String, QueryError>) {
        let ts = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis()).unwrap_or(0);
        let (reply, error) = match result {
            Ok(r) => (Some(r.as_str()), None),
            Err(e) => (None, Some(e.to_string())),
        };
        let line = json!({
            "timestamp_ms": ts as u64,
            "player": player,
            "round": round,
            "attempt": attempt,
            "request": request,
            "reply": reply,
            "error": error,
        });
        let mut out = self.out.lock().unwrap_or_else(|e| e.into_inner());
        let _ = writeln!(out, "{line}");
        let _ = out.flush();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extracts_message_content() {
        let body = r#"{"choices":[{"message":{"role":"assistant","content":"{\"bid\": \"3\"}"}}]}"#;
        assert_eq!(extract_reply(body).unwrap(), r#"{"bid": "3"}"#);
        assert!(extract_reply("{}").is_err());
    }

    #[test]
    fn unreachable_endpoint_fails_after_retries() {
        let mut ep = EndpointDescriptor::new("http://127.0.0.1:9", "m");
        ep.max_retries = 1;
        ep.timeout_ms = 500;
        let mut backend = HttpBackend::new(ep);
        assert!(backend.complete(&json!({})).is_err());
    }
}
