//! Chat-completion gateway with interchangeable backends.
//!
//! - [`RemoteChat`]: OpenAI-compatible HTTP endpoint with bounded retries.
//! - [`ScriptedChat`]: ordered pattern → canned reply rules, for tests and
//!   offline runs.
//! - [`ReplayChat`] / [`RecordingChat`]: record a session to JSONL and play
//!   it back keyed by request hash.
//!
//! All backends implement [`ChatModel`].

mod config;
mod remote;
mod replay;
mod scripted;

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use config::{BackendKind, GatewayConfig};
pub use remote::{RemoteChat, RemoteChatConfig};
pub use replay::{ReplayChat, ReplayRecord, RecordingChat};
pub use scripted::{Script, ScriptRule, ScriptedChat};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: Role,
    pub content: String,
}

impl ChatMessage {
    pub fn system(content: impl Into<String>) -> Self {
        Self {
            role: Role::System,
            content: content.into(),
        }
    }

    pub fn user(content: impl Into<String>) -> Self {
        Self {
            role: Role::User,
            content: content.into(),
        }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        Self {
            role: Role::Assistant,
            content: content.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionRequest {
    pub messages: Vec<ChatMessage>,
    pub temperature: f64,
    pub max_output: u32,
    pub model_tag: String,
}

impl CompletionRequest {
    pub fn new(messages: Vec<ChatMessage>) -> Self {
        Self {
            messages,
            temperature: 0.0,
            max_output: 512,
            model_tag: String::new(),
        }
    }

    /// Single user turn.
    pub fn prompt(text: impl Into<String>) -> Self {
        Self::new(vec![ChatMessage::user(text)])
    }

    pub fn validate(&self) -> Result<(), GatewayError> {
        if self.messages.is_empty() {
            return Err(GatewayError::InvalidRequest("no messages".into()));
        }
        if self.temperature.is_nan() || self.temperature < 0.0 {
            return Err(GatewayError::InvalidRequest(format!(
                "temperature {} must be >= 0",
                self.temperature
            )));
        }
        for (i, m) in self.messages.iter().enumerate() {
            if m.role == Role::System && i != 0 {
                return Err(GatewayError::InvalidRequest(
                    "system message only allowed first".into(),
                ));
            }
            if m.role != Role::System && m.content.is_empty() {
                return Err(GatewayError::InvalidRequest(format!("message {i} is empty")));
            }
        }
        Ok(())
    }

    pub fn last_user(&self) -> Option<&str> {
        self.messages
            .iter()
            .rev()
            .find(|m| m.role == Role::User)
            .map(|m| m.content.as_str())
    }

    /// SHA-256 over the canonical JSON of the whole request.
    pub fn request_hash(&self) -> String {
        sha256_hex(&serde_json::to_vec(self).expect("request serializes"))
    }

    /// SHA-256 over the messages only.
    pub fn messages_digest(&self) -> String {
        sha256_hex(&serde_json::to_vec(&self.messages).expect("messages serialize"))
    }

    /// Token measure of everything sent.
    pub fn input_tokens(&self) -> usize {
        self.messages.iter().map(|m| count_tokens(&m.content)).sum()
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GatewayError {
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("transport failure after {attempts} attempt(s): {message}")]
    Transport { attempts: u32, message: String },
    #[error("HTTP {status}: {body}")]
    Http { status: u16, body: String },
    #[error("request of {tokens} tokens exceeds the input limit of {limit}")]
    TokenLimit { tokens: usize, limit: usize },
    #[error("no scripted rule matches: {0}")]
    ScriptExhausted(String),
    #[error("no recorded response for request {0}")]
    ReplayMiss(String),
    #[error("malformed response: {0}")]
    BadResponse(String),
    #[error("gateway configuration: {0}")]
    Config(String),
    #[error("io: {0}")]
    Io(String),
}

pub trait ChatModel: Send + Sync {
    fn complete(&self, request: &CompletionRequest) -> Result<String, GatewayError>;
}

impl<T: ChatModel + ?Sized> ChatModel for &T {
    fn complete(&self, request: &CompletionRequest) -> Result<String, GatewayError> {
        (**self).complete(request)
    }
}

impl<T: ChatModel + ?Sized> ChatModel for Box<T> {
    fn complete(&self, request: &CompletionRequest) -> Result<String, GatewayError> {
        (**self).complete(request)
    }
}

impl<T: ChatModel + ?Sized> ChatModel for Arc<T> {
    fn complete(&self, request: &CompletionRequest) -> Result<String, GatewayError> {
        (**self).complete(request)
    }
}

/// Token proxy: ceil(UTF-8 byte length / 4).
pub fn count_tokens(text: &str) -> usize {
    text.len().div_ceil(4)
}

/// Rejects requests whose input exceeds a fixed token ceiling before they
/// reach the wrapped model.
pub struct TokenCeiling<M> {
    inner: M,
    limit: usize,
}

impl<M: ChatModel> TokenCeiling<M> {
    pub fn new(inner: M, limit: usize) -> Self {
        Self { inner, limit }
    }
}

impl<M: ChatModel> ChatModel for TokenCeiling<M> {
    fn complete(&self, request: &CompletionRequest) -> Result<String, GatewayError> {
        let tokens = request.input_tokens();
        if tokens > self.limit {
            return Err(GatewayError::TokenLimit {
                tokens,
                limit: self.limit,
            });
        }
        self.inner.complete(request)
    }
}
