//! Text embedders for entity labels.
//!
//! [`TrigramEmbedder`] is the deterministic, offline default: character
//! trigrams of the normalized, space-padded text are hashed with 64-bit
//! FNV-1a into `dim` buckets, counted, and L2-normalized. Identical text
//! always yields a bit-identical vector.
//!
//! [`RemoteEmbedder`] calls an OpenAI-style `/embeddings` endpoint and is
//! only used when configured explicitly.

use std::sync::OnceLock;
use std::time::Duration;

use serde::Deserialize;
use serde_json::json;
use thiserror::Error;

pub const DEFAULT_DIM: usize = 256;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

#[derive(Debug, Error, PartialEq)]
pub enum EmbedError {
    #[error("cannot embed empty text")]
    EmptyText,
    #[error("text {0:?} has no embeddable features")]
    Unembeddable(String),
    #[error("embedding dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("remote embedding backend: {0}")]
    Remote(String),
}

/// Unit-norm vector, or the zero vector for texts without features.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingVector {
    values: Vec<f64>,
    unembeddable: bool,
}

impl EmbeddingVector {
    /// Normalizes `raw`; an all-zero input becomes a flagged zero vector.
    pub fn from_raw(raw: Vec<f64>) -> Self {
        let norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Self::zero(raw.len());
        }
        Self {
            values: raw.into_iter().map(|x| x / norm).collect(),
            unembeddable: false,
        }
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            values: vec![0.0; dim],
            unembeddable: true,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn is_unembeddable(&self) -> bool {
        self.unembeddable
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Cosine similarity of two unit vectors: their dot product, accumulated
    /// in index order. Zero vectors score 0.
    pub fn cosine(&self, other: &EmbeddingVector) -> f64 {
        if self.unembeddable || other.unembeddable {
            return 0.0;
        }
        let mut acc = 0.0;
        for (a, b) in self.values.iter().zip(&other.values) {
            acc += a * b;
        }
        acc.clamp(-1.0, 1.0)
    }
}

pub trait Embedder: Send + Sync {
    fn embed(&self, text: &str) -> Result<EmbeddingVector, EmbedError>;

    fn name(&self) -> String;
}

/// Lowercase, turn every non-alphanumeric character into a space, collapse
/// runs of whitespace and trim.
pub fn normalize_text(text: &str) -> String {
    let lowered: String = text
        .chars()
        .flat_map(char::to_lowercase)
        .map(|c| if c.is_alphanumeric() { c } else { ' ' })
        .collect();
    lowered.split_whitespace().collect::<Vec<_>>().join(" ")
}

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    bytes.iter().fold(FNV_OFFSET, |h, b| (h ^ u64::from(*b)).wrapping_mul(FNV_PRIME))
}

/// Character trigrams of `" " + normalize_text(text) + " "`.
pub fn trigrams(text: &str) -> Vec<String> {
    let norm = normalize_text(text);
    if norm.is_empty() {
        return Vec::new();
    }
    let padded: Vec<char> = format!(" {norm} ").chars().collect();
    padded.windows(3).map(|w| w.iter().collect()).collect()
}

#[derive(Debug, Clone, Copy)]
pub struct TrigramEmbedder {
    dim: usize,
}

impl TrigramEmbedder {
    pub fn new(dim: usize) -> Self {
        assert!(dim > 0, "embedding dimension must be positive");
        Self { dim }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

impl Default for TrigramEmbedder {
    fn default() -> Self {
        Self::new(DEFAULT_DIM)
    }
}

impl Embedder for TrigramEmbedder {
    fn embed(&self, text: &str) -> Result<EmbeddingVector, EmbedError> {
        if text.trim().is_empty() {
            return Err(EmbedError::EmptyText);
        }
        let mut counts = vec![0.0f64; self.dim];
        for tri in trigrams(text) {
            let bucket = (fnv1a64(tri.as_bytes()) % self.dim as u64) as usize;
            counts[bucket] += 1.0;
        }
        Ok(EmbeddingVector::from_raw(counts))
    }

    fn name(&self) -> String {
        format!("trigram-fnv1a-{}", self.dim)
    }
}

/// Connection settings for an OpenAI-compatible embeddings endpoint.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct RemoteEmbedderConfig {
    /// Full URL, e.g. `http://localhost:11434/v1/embeddings`.
    pub endpoint: String,
    pub model: String,
    /// Name of the environment variable holding the bearer token.
    #[serde(default)]
    pub api_key_env: Option<String>,
    #[serde(default = "default_timeout_secs")]
    pub timeout_secs: u64,
}

fn default_timeout_secs() -> u64 {
    60
}

pub struct RemoteEmbedder {
    config: RemoteEmbedderConfig,
    agent: ureq::Agent,
    dim: OnceLock<usize>,
}

#[derive(Deserialize)]
struct EmbeddingResponse {
    data: Vec<EmbeddingDatum>,
}

#[derive(Deserialize)]
struct EmbeddingDatum {
    embedding: Vec<f64>,
}

impl RemoteEmbedder {
    pub fn new(config: RemoteEmbedderConfig) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(config.timeout_secs)))
            .http_status_as_error(false)
            .build()
            .into();
        Self {
            config,
            agent,
            dim: OnceLock::new(),
        }
    }

    /// Dimension learned from the first successful response.
    pub fn dim(&self) -> Option<usize> {
        self.dim.get().copied()
    }

    pub fn embed_batch(&self, texts: &[&str]) -> Result<Vec<EmbeddingVector>, EmbedError> {
        if texts.iter().any(|t| t.trim().is_empty()) {
            return Err(EmbedError::EmptyText);
        }
        let mut req = self.agent.post(&self.config.endpoint);
        if let Some(var) = &self.config.api_key_env {
            if let Ok(key) = std::env::var(var) {
                req = req.header("Authorization", &format!("Bearer {key}"));
            }
        }
        let body = json!({ "model": self.config.model, "input": texts });
        let mut resp = req
            .send_json(&body)
            .map_err(|e| EmbedError::Remote(e.to_string()))?;
        if !resp.status().is_success() {
            return Err(EmbedError::Remote(format!("HTTP {}", resp.status())));
        }
        let parsed: EmbeddingResponse = resp
            .body_mut()
            .read_json()
            .map_err(|e| EmbedError::Remote(e.to_string()))?;
        if parsed.data.len() != texts.len() {
            return Err(EmbedError::Remote(format!(
                "expected {} embeddings, got {}",
                texts.len(),
                parsed.data.len()
            )));
        }
        parsed
            .data
            .into_iter()
            .map(|d| {
                let expected = *self.dim.get_or_init(|| d.embedding.len());
                if d.embedding.len() != expected {
                    return Err(EmbedError::Dimension {
                        expected,
                        got: d.embedding.len(),
                    });
                }
                Ok(EmbeddingVector::from_raw(d.embedding))
            })
            .collect()
    }
}

impl Embedder for RemoteEmbedder {
    fn embed(&self, text: &str) -> Result<EmbeddingVector, EmbedError> {
        self.embed_batch(&[text])?
            .pop()
            .ok_or_else(|| EmbedError::Remote("empty response".into()))
    }

    fn name(&self) -> String {
        format!("remote:{}", self.config.model)
    }
}
