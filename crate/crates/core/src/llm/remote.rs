use std::sync::atomic::{AtomicU32, Ordering};
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{ChatModel, CompletionRequest, GatewayError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemoteChatConfig {
    /// Full chat-completions URL, e.g. `https://api.openai.com/v1/chat/completions`.
    pub endpoint: String,
    pub model: String,
    /// Environment variable holding the bearer token; unset means no auth.
    pub api_key_env: Option<String>,
    pub timeout_secs: u64,
    pub retries: u32,
    /// Initial backoff; doubled after every failed attempt.
    pub backoff_ms: u64,
}

impl Default for RemoteChatConfig {
    fn default() -> Self {
        Self {
            endpoint: "http://localhost:11434/v1/chat/completions".into(),
            model: "gpt-4o-mini".into(),
            api_key_env: Some("OPENAI_API_KEY".into()),
            timeout_secs: 60,
            retries: 2,
            backoff_ms: 500,
        }
    }
}

/// Blocking client for OpenAI-style chat-completion endpoints.
pub struct RemoteChat {
    config: RemoteChatConfig,
    agent: ureq::Agent,
    last_retries: AtomicU32,
    total_retries: AtomicU32,
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: ResponseMessage,
}

#[derive(Deserialize)]
struct ResponseMessage {
    content: Option<String>,
}

enum Attempt {
    Retry(GatewayError),
    Fatal(GatewayError),
}

fn looks_like_length_error(body: &str) -> bool {
    let b = body.to_ascii_lowercase();
    ["context_length", "context length", "maximum context", "too many tokens", "too long"]
        .iter()
        .any(|needle| b.contains(needle))
}

impl RemoteChat {
    pub fn new(config: RemoteChatConfig) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(config.timeout_secs)))
            .http_status_as_error(false)
            .build()
            .into();
        Self {
            config,
            agent,
            last_retries: AtomicU32::new(0),
            total_retries: AtomicU32::new(0),
        }
    }

    pub fn config(&self) -> &RemoteChatConfig {
        &self.config
    }

    /// Retries spent by the most recent `complete` call.
    pub fn last_retry_count(&self) -> u32 {
        self.last_retries.load(Ordering::Relaxed)
    }

    pub fn total_retry_count(&self) -> u32 {
        self.total_retries.load(Ordering::Relaxed)
    }

    fn attempt(&self, request: &CompletionRequest) -> Result<String, Attempt> {
        let model = if request.model_tag.is_empty() {
            &self.config.model
        } else {
            &request.model_tag
        };
        let body = json!({
            "model": model,
            "messages": request.messages,
            "temperature": request.temperature,
            "max_tokens": request.max_output,
        });
        let mut req = self.agent.post(&self.config.endpoint);
        if let Some(var) = &self.config.api_key_env {
            if let Ok(key) = std::env::var(var) {
                req = req.header("Authorization", &format!("Bearer {key}"));
            }
        }
        let mut resp = req.send_json(&body).map_err(|e| {
            Attempt::Retry(GatewayError::Transport {
                attempts: 1,
                message: e.to_string(),
            })
        })?;
        let status = resp.status().as_u16();
        if status == 200 {
            let parsed: ChatResponse = resp
                .body_mut()
                .read_json()
                .map_err(|e| Attempt::Fatal(GatewayError::BadResponse(e.to_string())))?;
            return parsed
                .choices
                .into_iter()
                .next()
                .and_then(|c| c.message.content)
                .ok_or_else(|| Attempt::Fatal(GatewayError::BadResponse("no choices".into())));
        }
        let text = resp.body_mut().read_to_string().unwrap_or_default();
        if status == 400 || status == 413 {
            if looks_like_length_error(&text) {
                return Err(Attempt::Fatal(GatewayError::TokenLimit {
                    tokens: request.input_tokens(),
                    limit: 0,
                }));
            }
            return Err(Attempt::Fatal(GatewayError::Http { status, body: text }));
        }
        let err = GatewayError::Http { status, body: text };
        if status == 429 || status >= 500 {
            Err(Attempt::Retry(err))
        } else {
            Err(Attempt::Fatal(err))
        }
    }
}

impl ChatModel for RemoteChat {
    fn complete(&self, request: &CompletionRequest) -> Result<String, GatewayError> {
        request.validate()?;
        let mut backoff = Duration::from_millis(self.config.backoff_ms);
        let mut retries = 0;
        loop {
            match self.attempt(request) {
                Ok(text) => {
                    self.last_retries.store(retries, Ordering::Relaxed);
                    return Ok(text);
                }
                Err(Attempt::Fatal(e)) => {
                    self.last_retries.store(retries, Ordering::Relaxed);
                    return Err(e);
                }
                Err(Attempt::Retry(e)) => {
                    if retries >= self.config.retries {
                        self.last_retries.store(retries, Ordering::Relaxed);
                        return Err(match e {
                            GatewayError::Transport { message, .. } => GatewayError::Transport {
                                attempts: retries + 1,
                                message,
                            },
                            other => other,
                        });
                    }
                    retries += 1;
                    self.total_retries.fetch_add(1, Ordering::Relaxed);
                    thread::sleep(backoff);
                    backoff *= 2;
                }
            }
        }
    }
}
