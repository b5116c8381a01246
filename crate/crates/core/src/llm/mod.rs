//! Chat-model agents: transcripts, the wire client and reply parsing.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::agents::{random_action, ActContext, ActOutcome, Agent, AgentError};
use crate::games::Observation;
use crate::rational::Rational;
use crate::rng::{purpose, rng_stream};

mod client;
mod parse;
pub mod stub;

pub use client::{ChatBackend, HttpBackend, QueryError, TranscriptSink};
pub use parse::{first_json_object, parse_action, ParseError};

fn default_timeout_ms() -> u64 {
    60_000
}
fn default_retries() -> u32 {
    3
}

/// Where and how to reach a chat-completions endpoint.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EndpointDescriptor {
    /// Base URL; requests go to `{base_url}/chat/completions`.
    pub base_url: String,
    pub model: String,
    /// Environment variable holding the bearer token.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub api_key_env: Option<String>,
    /// Overrides the match temperature for this seat.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperature: Option<Rational>,
    #[serde(default = "default_timeout_ms")]
    pub timeout_ms: u64,
    /// Transport attempts before the seat fails.
    #[serde(default = "default_retries")]
    pub max_retries: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub requests_per_minute: Option<u32>,
}

impl EndpointDescriptor {
    pub fn new(base_url: &str, model: &str) -> Self {
        EndpointDescriptor {
            base_url: base_url.trim_end_matches('/').to_string(),
            model: model.to_string(),
            api_key_env: None,
            temperature: None,
            timeout_ms: default_timeout_ms(),
            max_retries: default_retries(),
            requests_per_minute: None,
        }
    }
}

/// What the model is told about its opponents.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InformedSetting {
    /// Others are smart and always play the equilibrium.
    SmartEquilibrium,
    /// Others are smart.
    Smart,
    /// Others choose at random.
    RandomOpponents,
}

impl InformedSetting {
    pub fn preamble(self) -> &'static str {
        match self {
            InformedSetting::SmartEquilibrium => {
                "Note: the other players are smart and will always play the Nash equilibrium."
            }
            InformedSetting::Smart => "Note: the other players are smart.",
            InformedSetting::RandomOpponents => "Note: the other players are not smart and will choose randomly.",
        }
    }
}

fn default_reasks() -> u32 {
    3
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LlmSpec {
    #[serde(flatten)]
    pub endpoint: EndpointDescriptor,
    /// Role text for a "You are ..." prefix.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub persona: Option<String>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub chain_of_thought: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub informed: Option<InformedSetting>,
    /// Re-asks after an unusable reply before the fallback move is used.
    #[serde(default = "default_reasks")]
    pub max_reasks: u32,
}

impl LlmSpec {
    pub fn new(endpoint: EndpointDescriptor) -> Self {
        LlmSpec { endpoint, persona: None, chain_of_thought: false, informed: None, max_reasks: default_reasks() }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.endpoint.base_url.is_empty() || self.endpoint.model.is_empty() {
            return Err("llm agents need base_url and model".into());
        }
        if let Some(t) = self.endpoint.temperature {
            if t < Rational::ZERO || t > Rational::ONE {
                return Err("temperature must lie in [0, 1]".into());
            }
        }
        if self.endpoint.max_retries == 0 {
            return Err("max_retries must be >= 1".into());
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: Role,
    pub content: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatTranscript {
    pub messages: Vec<ChatMessage>,
}

impl ChatTranscript {
    /// Appends to the last message when it has the same role.
    fn push(&mut self, role: Role, content: &str) {
        if content.is_empty() {
            return;
        }
        match self.messages.last_mut() {
            Some(last) if last.role == role => {
                last.content.push_str("\n\n");
                last.content.push_str(content);
            }
            _ => self.messages.push(ChatMessage { role, content: content.to_string() }),
        }
    }

    pub fn request_body(&self, model: &str, temperature: Rational) -> Value {
        json!({
            "model": model,
            "temperature": temperature.to_f64(),
            "messages": self.messages,
        })
    }
}

/// Assembles the conversation: system rules, then per past step a user
/// result block with the player's own reply as an assistant turn, then the
/// current request.
pub fn build_transcript(observation: &Observation, spec: &LlmSpec) -> ChatTranscript {
    let mut system = Vec::new();
    if let Some(role) = &spec.persona {
        system.push(format!("You are {role}."));
    }
    system.push(observation.system.clone());
    if let Some(informed) = spec.informed {
        system.push(informed.preamble().to_string());
    }
    if spec.chain_of_thought {
        system.push("Let's think step by step.".to_string());
    }
    let mut t = ChatTranscript::default();
    t.push(Role::System, &system.join("\n\n"));
    for block in &observation.history {
        t.push(Role::User, &block.before_echo);
        if let Some(echo) = &block.echo {
            t.push(Role::Assistant, echo);
        }
        t.push(Role::User, &block.after_echo);
    }
    if let Some(request) = &observation.request {
        t.push(Role::User, request);
    }
    t
}

pub fn correction_notice(error: &ParseError) -> String {
    format!("Your previous reply could not be used ({error}). Reply again with only the JSON object in the requested format.")
}

/// One seat played by a chat model.
pub struct LlmAgent {
    spec: LlmSpec,
    backend: Box<dyn ChatBackend>,
    sink: Option<TranscriptSink>,
}

impl LlmAgent {
    pub fn new(spec: LlmSpec, backend: Box<dyn ChatBackend>, sink: Option<TranscriptSink>) -> Self {
        LlmAgent { spec, backend, sink }
    }

    pub fn http(spec: LlmSpec, sink: Option<TranscriptSink>) -> Self {
        let backend = Box::new(HttpBackend::new(spec.endpoint.clone()));
        LlmAgent::new(spec, backend, sink)
    }
}

impl Agent for LlmAgent {
    fn act(&mut self, ctx: &ActContext<'_>) -> Result<ActOutcome, AgentError> {
        let config = ctx.game.config();
        let observation = ctx.game.render_observation(ctx.player, config.prompt_version);
        let mut transcript = build_transcript(&observation, &self.spec);
        let temperature = self.spec.endpoint.temperature.unwrap_or(config.temperature);
        for attempt in 0..=self.spec.max_reasks {
            let body = transcript.request_body(&self.spec.endpoint.model, temperature);
            let result = self.backend.complete(&body);
            if let Some(sink) = &self.sink {
                sink.record(ctx.player, ctx.view.round, attempt, &body, &result);
            }
            let reply = result.map_err(|e| AgentError::Failure(e.to_string()))?;
            match parse_action(&reply, &ctx.view.request, ctx.player) {
                Ok(action) => return Ok(ActOutcome::chosen(action)),
                Err(e) => {
                    transcript.push(Role::Assistant, &reply);
                    transcript.push(Role::User, &correction_notice(&e));
                }
            }
        }
        let mut rng = rng_stream(config.seed, purpose::AGENT_FALLBACK, u64::from(ctx.view.round), ctx.player as u64);
        Ok(ActOutcome { action: random_action(&ctx.view.request, &mut rng), coerced: true })
    }
}
