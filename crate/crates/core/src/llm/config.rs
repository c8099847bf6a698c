use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{
    ChatModel, GatewayError, RemoteChat, RemoteChatConfig, ReplayChat, Script, ScriptedChat,
    TokenCeiling,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Remote,
    Scripted,
    Replay,
}

impl FromStr for BackendKind {
    type Err = GatewayError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "remote" => Ok(Self::Remote),
            "scripted" => Ok(Self::Scripted),
            "replay" => Ok(Self::Replay),
            other => Err(GatewayError::Config(format!("unknown backend {other:?}"))),
        }
    }
}

/// Gateway settings as read from the `[llm]` table of a config file, with
/// `SGRAG_LLM_*` environment variables taking precedence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GatewayConfig {
    pub backend: BackendKind,
    pub endpoint: String,
    pub model: String,
    pub api_key_env: String,
    pub timeout_secs: u64,
    pub retries: u32,
    pub backoff_ms: u64,
    pub script: Option<PathBuf>,
    pub replay: Option<PathBuf>,
    pub token_ceiling: Option<usize>,
}

impl Default for GatewayConfig {
    fn default() -> Self {
        let remote = RemoteChatConfig::default();
        Self {
            backend: BackendKind::Scripted,
            endpoint: remote.endpoint,
            model: remote.model,
            api_key_env: "OPENAI_API_KEY".into(),
            timeout_secs: remote.timeout_secs,
            retries: remote.retries,
            backoff_ms: remote.backoff_ms,
            script: None,
            replay: None,
            token_ceiling: None,
        }
    }
}

#[derive(Deserialize)]
struct FileLayout {
    #[serde(default)]
    llm: GatewayConfig,
}

impl GatewayConfig {
    pub fn from_toml(text: &str) -> Result<Self, GatewayError> {
        toml::from_str::<FileLayout>(text)
            .map(|f| f.llm)
            .map_err(|e| GatewayError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, GatewayError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| GatewayError::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Applies overrides from the process environment.
    pub fn apply_env(&mut self) -> Result<(), GatewayError> {
        self.apply_env_from(|k| std::env::var(k).ok())
    }

    pub fn apply_env_from<F>(&mut self, lookup: F) -> Result<(), GatewayError>
    where
        F: Fn(&str) -> Option<String>,
    {
        let parse_num = |key: &str, v: String| {
            v.trim()
                .parse::<u64>()
                .map_err(|_| GatewayError::Config(format!("{key}={v:?} is not a number")))
        };
        if let Some(v) = lookup("SGRAG_LLM_BACKEND") {
            self.backend = v.parse()?;
        }
        if let Some(v) = lookup("SGRAG_LLM_ENDPOINT") {
            self.endpoint = v;
        }
        if let Some(v) = lookup("SGRAG_LLM_MODEL") {
            self.model = v;
        }
        if let Some(v) = lookup("SGRAG_LLM_API_KEY_ENV") {
            self.api_key_env = v;
        }
        if let Some(v) = lookup("SGRAG_LLM_TIMEOUT_SECS") {
            self.timeout_secs = parse_num("SGRAG_LLM_TIMEOUT_SECS", v)?;
        }
        if let Some(v) = lookup("SGRAG_LLM_RETRIES") {
            self.retries = parse_num("SGRAG_LLM_RETRIES", v)? as u32;
        }
        if let Some(v) = lookup("SGRAG_LLM_SCRIPT") {
            self.script = Some(PathBuf::from(v));
        }
        if let Some(v) = lookup("SGRAG_LLM_REPLAY") {
            self.replay = Some(PathBuf::from(v));
        }
        Ok(())
    }

    pub fn remote_config(&self) -> RemoteChatConfig {
        RemoteChatConfig {
            endpoint: self.endpoint.clone(),
            model: self.model.clone(),
            api_key_env: Some(self.api_key_env.clone()).filter(|s| !s.is_empty()),
            timeout_secs: self.timeout_secs,
            retries: self.retries,
            backoff_ms: self.backoff_ms,
        }
    }

    /// Builds the configured backend. The scripted backend needs a script
    /// file here; callers with an in-memory script build `ScriptedChat`
    /// directly.
    pub fn build(&self) -> Result<Box<dyn ChatModel>, GatewayError> {
        let model: Box<dyn ChatModel> = match self.backend {
            BackendKind::Remote => Box::new(RemoteChat::new(self.remote_config())),
            BackendKind::Scripted => {
                let path = self.script.as_ref().ok_or_else(|| {
                    GatewayError::Config("scripted backend requires a script file".into())
                })?;
                Box::new(ScriptedChat::new(Script::load(path)?)?)
            }
            BackendKind::Replay => {
                let path = self.replay.as_ref().ok_or_else(|| {
                    GatewayError::Config("replay backend requires a replay store".into())
                })?;
                Box::new(ReplayChat::load(path)?)
            }
        };
        Ok(match self.token_ceiling {
            Some(limit) => Box::new(TokenCeiling::new(model, limit)),
            None => model,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    #[test]
    fn file_then_env_override() {
        let mut cfg = GatewayConfig::from_toml(
            r#"
            [llm]
            backend = "remote"
            endpoint = "http://example.invalid/v1/chat/completions"
            model = "llama3.1:70b"
            retries = 4
            "#,
        )
        .unwrap();
        assert_eq!(cfg.backend, BackendKind::Remote);
        assert_eq!(cfg.retries, 4);
        assert_eq!(cfg.timeout_secs, 60);

        let env: HashMap<&str, &str> = [
            ("SGRAG_LLM_MODEL", "gpt-4o-mini"),
            ("SGRAG_LLM_RETRIES", "1"),
            ("SGRAG_LLM_BACKEND", "replay"),
        ]
        .into();
        cfg.apply_env_from(|k| env.get(k).map(|v| v.to_string())).unwrap();
        assert_eq!(cfg.model, "gpt-4o-mini");
        assert_eq!(cfg.retries, 1);
        assert_eq!(cfg.backend, BackendKind::Replay);
        assert_eq!(cfg.endpoint, "http://example.invalid/v1/chat/completions");
    }

    #[test]
    fn bad_env_values_rejected() {
        let mut cfg = GatewayConfig::default();
        assert!(cfg
            .apply_env_from(|k| (k == "SGRAG_LLM_RETRIES").then(|| "many".to_string()))
            .is_err());
        assert!(cfg
            .apply_env_from(|k| (k == "SGRAG_LLM_BACKEND").then(|| "magic".to_string()))
            .is_err());
    }

    #[test]
    fn missing_script_is_config_error() {
        let cfg = GatewayConfig::default();
        assert!(matches!(cfg.build(), Err(GatewayError::Config(_))));
    }
}
