//! Experiment driver: single episodes, suites over variant × task × level ×
//! repetition grids, and text summaries of result files.

mod config;
mod episode;
mod suite;
mod summary;
mod task;

use thiserror::Error;

pub use config::{EmbeddingBackend, EmbeddingConfig, HarnessConfig, RetrievalSection, RunSection};
pub use episode::{
    read_log, run_episode, Episode, EpisodeConfig, EpisodeResult, FailureMode, FinalRecord, LogRecord,
    StepRecord, StepTrace,
};
pub use suite::{episode_key, run_suite, Cell, PlannerSource, SuiteConfig, SuiteOutcome};
pub use summary::{
    mean_std, read_results, summarize, summarize_files, GroupSummary, Stat, SuiteSummary,
};
pub use task::{Difficulty, Solution, SolutionStep, TaskSpec};

use crate::grounding::GroundingError;
use crate::index::IndexError;
use crate::llm::GatewayError;
use crate::scene_graph::GraphError;
use crate::sim::SimError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Index(#[from] IndexError),
    #[error(transparent)]
    Grounding(#[from] GroundingError),
    #[error(transparent)]
    Gateway(#[from] GatewayError),
    #[error("config: {0}")]
    Config(String),
    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for HarnessError {
    fn from(e: std::io::Error) -> Self {
        HarnessError::Io(e.to_string())
    }
}
