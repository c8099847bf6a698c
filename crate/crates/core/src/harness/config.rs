//! TOML run configuration: `[llm]`, `[retrieval]`, `[embedding]`, `[run]`.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::agent::{AgentMode, STEP_CAP};
use crate::embedding::{
    Embedder, RemoteEmbedder, RemoteEmbedderConfig, TrigramEmbedder, DEFAULT_DIM,
};
use crate::index::{RetrievalParams, DEFAULT_K, DEFAULT_THRESHOLD};
use crate::llm::GatewayConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RetrievalSection {
    pub k: usize,
    pub threshold: f64,
}

impl Default for RetrievalSection {
    fn default() -> Self {
        Self {
            k: DEFAULT_K,
            threshold: DEFAULT_THRESHOLD,
        }
    }
}

impl RetrievalSection {
    pub fn params(&self) -> RetrievalParams {
        RetrievalParams::new(self.k, self.threshold)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmbeddingBackend {
    #[default]
    Trigram,
    Remote,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmbeddingConfig {
    pub backend: EmbeddingBackend,
    pub dim: usize,
    pub endpoint: String,
    pub model: String,
    pub api_key_env: Option<String>,
    pub timeout_secs: u64,
}

impl Default for EmbeddingConfig {
    fn default() -> Self {
        Self {
            backend: EmbeddingBackend::Trigram,
            dim: DEFAULT_DIM,
            endpoint: "http://localhost:11434/v1/embeddings".into(),
            model: "nomic-embed-text".into(),
            api_key_env: None,
            timeout_secs: 60,
        }
    }
}

impl EmbeddingConfig {
    pub fn build(&self) -> Result<Arc<dyn Embedder>, HarnessError> {
        match self.backend {
            EmbeddingBackend::Trigram => {
                if self.dim == 0 {
                    return Err(HarnessError::Config("embedding dim must be positive".into()));
                }
                Ok(Arc::new(TrigramEmbedder::new(self.dim)))
            }
            EmbeddingBackend::Remote => Ok(Arc::new(RemoteEmbedder::new(RemoteEmbedderConfig {
                endpoint: self.endpoint.clone(),
                model: self.model.clone(),
                api_key_env: self.api_key_env.clone(),
                timeout_secs: self.timeout_secs,
            }))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub variants: Vec<AgentMode>,
    pub distractors: Vec<usize>,
    pub repetitions: usize,
    pub seed: u64,
    pub step_cap: usize,
    pub parallelism: usize,
    pub out_dir: PathBuf,
    /// Task ids to run; empty means all bundled tasks.
    pub tasks: Vec<String>,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            variants: vec![AgentMode::EragStrict],
            distractors: vec![0],
            repetitions: 1,
            seed: 0,
            step_cap: STEP_CAP,
            parallelism: 1,
            out_dir: PathBuf::from("runs"),
            tasks: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HarnessConfig {
    pub llm: GatewayConfig,
    pub retrieval: RetrievalSection,
    pub embedding: EmbeddingConfig,
    pub run: RunSection,
}

impl HarnessConfig {
    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        let c: HarnessConfig = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        c.retrieval.params().validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }
}
