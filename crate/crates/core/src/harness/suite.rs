//! Grid runner: every (task, variant, distractor level, repetition) cell,
//! run concurrently up to a bound, folded into results and a summary.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;

use super::{
    run_episode, summarize, EpisodeConfig, EpisodeResult, HarnessError, SuiteSummary, TaskSpec,
};
use crate::agent::{AgentMode, STEP_CAP};
use crate::embedding::Embedder;
use crate::index::RetrievalParams;
use crate::llm::{ChatModel, GatewayConfig, RecordingChat, ScriptedChat, TokenCeiling};
use crate::sim::SceneSpec;

/// Where each episode's planner comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum PlannerSource {
    /// A scripted planner replaying each task's known solution.
    Solutions { thoughts: bool },
    /// A fresh backend per episode built from the gateway config.
    Gateway(GatewayConfig),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteConfig {
    pub variants: Vec<AgentMode>,
    pub tasks: Vec<TaskSpec>,
    pub scenes: Vec<SceneSpec>,
    pub distractor_levels: Vec<usize>,
    pub repetitions: usize,
    pub base_seed: u64,
    pub params: RetrievalParams,
    pub step_cap: usize,
    pub parallelism: usize,
    pub planner: PlannerSource,
    /// Per-request input token ceiling applied on top of the planner.
    pub token_ceiling: Option<usize>,
    /// Results, logs and the summary are written here when set.
    pub out_dir: Option<PathBuf>,
    /// Record every planner exchange under `out_dir/recordings`.
    pub record: bool,
}

impl SuiteConfig {
    pub fn new(variants: Vec<AgentMode>, tasks: Vec<TaskSpec>, scenes: Vec<SceneSpec>) -> Self {
        Self {
            variants,
            tasks,
            scenes,
            distractor_levels: vec![0],
            repetitions: 1,
            base_seed: 0,
            params: RetrievalParams::default(),
            step_cap: STEP_CAP,
            parallelism: 1,
            planner: PlannerSource::Solutions { thoughts: true },
            token_ceiling: None,
            out_dir: None,
            record: false,
        }
    }

    /// Cells in a fixed order: task, then variant, level, repetition.
    pub fn cells(&self) -> Vec<Cell> {
        let mut out = Vec::new();
        for task in 0..self.tasks.len() {
            for &variant in &self.variants {
                for &distractors in &self.distractor_levels {
                    for rep in 0..self.repetitions {
                        out.push(Cell {
                            task,
                            variant,
                            distractors,
                            seed: self.base_seed + rep as u64,
                        });
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cell {
    pub task: usize,
    pub variant: AgentMode,
    pub distractors: usize,
    pub seed: u64,
}

/// File stem identifying one episode.
pub fn episode_key(task: &str, scene: &str, variant: AgentMode, distractors: usize, seed: u64) -> String {
    format!("{task}__{scene}__{variant}__n{distractors}__s{seed}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteOutcome {
    pub results: Vec<EpisodeResult>,
    pub summary: SuiteSummary,
    /// Cells that could not run at all, described.
    pub errors: Vec<String>,
}

fn planner_for(
    config: &SuiteConfig,
    task: &TaskSpec,
    recording: Option<&Path>,
) -> Result<Box<dyn ChatModel>, HarnessError> {
    let base: Box<dyn ChatModel> = match &config.planner {
        PlannerSource::Solutions { thoughts } => {
            let sol = task.solution.as_ref().ok_or_else(|| {
                HarnessError::Config(format!("task {} has no solution to script", task.id))
            })?;
            Box::new(ScriptedChat::new(sol.script_with_thoughts(*thoughts))?)
        }
        PlannerSource::Gateway(g) => g.build()?,
    };
    let limited: Box<dyn ChatModel> = match config.token_ceiling {
        Some(limit) => Box::new(TokenCeiling::new(base, limit)),
        None => base,
    };
    Ok(match recording {
        Some(path) => Box::new(RecordingChat::to_file(limited, path)?),
        None => limited,
    })
}

fn run_cell(
    config: &SuiteConfig,
    cell: Cell,
    embedder: &Arc<dyn Embedder>,
) -> Result<(EpisodeResult, String), String> {
    let task = &config.tasks[cell.task];
    let key_err = |e: &dyn std::fmt::Display| {
        format!("{} {} n={} seed={}: {e}", task.id, cell.variant, cell.distractors, cell.seed)
    };
    let scene = config
        .scenes
        .iter()
        .find(|s| s.id == task.scene)
        .ok_or_else(|| key_err(&format!("scene {} not loaded", task.scene)))?;
    let key = episode_key(&task.id, &scene.id, cell.variant, cell.distractors, cell.seed);
    let recording = match (&config.out_dir, config.record) {
        (Some(dir), true) => Some(dir.join("recordings").join(format!("{key}.jsonl"))),
        _ => None,
    };
    let llm = planner_for(config, task, recording.as_deref()).map_err(|e| key_err(&e))?;
    let ep_config = EpisodeConfig::new(cell.variant)
        .seed(cell.seed)
        .distractors(cell.distractors)
        .params(config.params.clone())
        .step_cap(config.step_cap);
    let episode = run_episode(scene, task, &ep_config, llm.as_ref(), embedder.clone())
        .map_err(|e| key_err(&e))?;
    if let Some(dir) = &config.out_dir {
        fs::write(dir.join("logs").join(format!("{key}.jsonl")), episode.log_jsonl())
            .map_err(|e| key_err(&e))?;
    }
    Ok((episode.result, key))
}

/// Runs every cell. Episodes that cannot be set up are listed in `errors`;
/// the rest always produce a result.
pub fn run_suite(config: &SuiteConfig, embedder: Arc<dyn Embedder>) -> Result<SuiteOutcome, HarnessError> {
    if config.variants.is_empty() || config.tasks.is_empty() || config.distractor_levels.is_empty() || config.repetitions == 0 {
        return Err(HarnessError::Config("suite grid is empty".into()));
    }
    if let Some(dir) = &config.out_dir {
        fs::create_dir_all(dir.join("logs"))?;
        if config.record {
            fs::create_dir_all(dir.join("recordings"))?;
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.parallelism.max(1))
        .build()
        .map_err(|e| HarnessError::Config(e.to_string()))?;
    let cells = config.cells();
    let outcomes: Vec<Result<(EpisodeResult, String), String>> = pool.install(|| {
        cells
            .par_iter()
            .map(|&cell| run_cell(config, cell, &embedder))
            .collect()
    });

    let mut results = Vec::new();
    let mut errors = Vec::new();
    for o in outcomes {
        match o {
            Ok((r, _)) => results.push(r),
            Err(e) => errors.push(e),
        }
    }
    let summary = summarize(&results);
    if let Some(dir) = &config.out_dir {
        let mut body = String::new();
        for r in &results {
            body.push_str(&serde_json::to_string(r).expect("results serialize"));
            body.push('\n');
        }
        fs::write(dir.join("results.jsonl"), body)?;
        fs::write(dir.join("summary.txt"), summary.render())?;
        fs::write(dir.join("summary.csv"), summary.render_csv())?;
        if !errors.is_empty() {
            fs::write(dir.join("errors.txt"), errors.join("\n") + "\n")?;
        }
    }
    Ok(SuiteOutcome {
        results,
        summary,
        errors,
    })
}
