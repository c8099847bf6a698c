//! One episode: simulator, graph mirror, index, extraction, planner and
//! (for the feedback variant) self-query, looped until the goal holds or the
//! step cap is reached.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::{Difficulty, HarnessError, TaskSpec};
use crate::abstraction::{build_abstraction, Abstraction};
use crate::agent::{
    build_observation, plan_step, restrict_tool_message, ActionRegistry, AgentMode, AgentStep,
    ContextWindow, ToolOutput, FINISH, NOOP, STEP_CAP,
};
use crate::catalog::AttributeCatalog;
use crate::embedding::Embedder;
use crate::grounding::{extract, QueryTermSet};
use crate::index::{RetrievalParams, VectorIndex};
use crate::llm::{ChatModel, GatewayError};
use crate::scene_graph::SceneGraph;
use crate::self_query::{generate_query, merge_feedback};
use crate::sim::{default_vocabulary, inject_distractors, observe_graph, SceneSpec, World};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FailureMode {
    None,
    StepLimit,
    TokenLimit,
    MalformedPlanning,
    ScriptExhausted,
    /// The planner finished before the goal held.
    AgentQuit,
    /// Any other gateway failure (transport, HTTP, bad response).
    GatewayError,
}

impl FailureMode {
    pub fn as_str(self) -> &'static str {
        match self {
            FailureMode::None => "none",
            FailureMode::StepLimit => "step-limit",
            FailureMode::TokenLimit => "token-limit",
            FailureMode::MalformedPlanning => "malformed-planning",
            FailureMode::ScriptExhausted => "script-exhausted",
            FailureMode::AgentQuit => "agent-quit",
            FailureMode::GatewayError => "gateway-error",
        }
    }

    /// The failure a gateway error ends an episode with.
    pub fn from_gateway(e: &GatewayError) -> Self {
        match e {
            GatewayError::TokenLimit { .. } => FailureMode::TokenLimit,
            GatewayError::ScriptExhausted(_) | GatewayError::ReplayMiss(_) => {
                FailureMode::ScriptExhausted
            }
            GatewayError::Http { status: 413, .. } => FailureMode::TokenLimit,
            GatewayError::Http { status: 400, body } if mentions_length(body) => {
                FailureMode::TokenLimit
            }
            _ => FailureMode::GatewayError,
        }
    }
}

fn mentions_length(body: &str) -> bool {
    let b = body.to_ascii_lowercase();
    ["context length", "context_length", "maximum context", "too many tokens", "token limit"]
        .iter()
        .any(|k| b.contains(k))
}

impl fmt::Display for FailureMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeConfig {
    pub mode: AgentMode,
    pub seed: u64,
    pub distractors: usize,
    pub params: RetrievalParams,
    pub step_cap: usize,
    /// Keep every observation text and retrieved id set in the episode.
    #[serde(default)]
    pub keep_trace: bool,
}

impl EpisodeConfig {
    pub fn new(mode: AgentMode) -> Self {
        Self {
            mode,
            seed: 0,
            distractors: 0,
            params: RetrievalParams::default(),
            step_cap: STEP_CAP,
            keep_trace: false,
        }
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn distractors(mut self, n: usize) -> Self {
        self.distractors = n;
        self
    }

    pub fn params(mut self, params: RetrievalParams) -> Self {
        self.params = params;
        self
    }

    pub fn step_cap(mut self, cap: usize) -> Self {
        self.step_cap = cap;
        self
    }

    pub fn keep_trace(mut self, keep: bool) -> Self {
        self.keep_trace = keep;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeResult {
    pub task_id: String,
    pub scene_id: String,
    pub variant: AgentMode,
    pub difficulty: Difficulty,
    pub seed: u64,
    pub distractors: usize,
    pub success: bool,
    pub steps: usize,
    pub failure_mode: FailureMode,
    pub avg_step_latency_s: f64,
    pub cumulative_observation_tokens: usize,
    pub full_graph_requests: usize,
    pub malformed_steps: usize,
    pub llm_calls: usize,
}

impl EpisodeResult {
    /// Copy with wall-clock fields zeroed, for determinism comparisons.
    pub fn without_latency(&self) -> Self {
        Self {
            avg_step_latency_s: 0.0,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub thought: String,
    pub action: String,
    pub input: String,
    pub ok: bool,
    pub message: String,
    pub observation_tokens: usize,
    pub latency_ms: f64,
    /// Full-graph tool invocations in this step.
    pub tool_calls: usize,
    pub llm_calls: usize,
    pub malformed: bool,
    /// Entities in the subgraph shown this step.
    pub retrieved: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinalRecord {
    pub success: bool,
    pub failure_mode: FailureMode,
    pub steps: usize,
    pub cumulative_observation_tokens: usize,
    pub full_graph_requests: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
pub enum LogRecord {
    Step(StepRecord),
    Final(FinalRecord),
}

impl LogRecord {
    pub fn without_latency(&self) -> Self {
        match self {
            LogRecord::Step(s) => LogRecord::Step(StepRecord {
                latency_ms: 0.0,
                ..s.clone()
            }),
            other => other.clone(),
        }
    }
}

/// Parses an episode log written by [`Episode::log_jsonl`].
pub fn read_log(text: &str) -> Result<Vec<LogRecord>, HarnessError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(n, l)| {
            serde_json::from_str(l).map_err(|e| HarnessError::Config(format!("log line {}: {e}", n + 1)))
        })
        .collect()
}

/// Observation text and retrieved ids of one step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepTrace {
    pub observation: String,
    pub retrieved: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Episode {
    pub result: EpisodeResult,
    pub log: Vec<LogRecord>,
    pub steps: Vec<AgentStep>,
    pub abstraction: Abstraction,
    /// Filled when the config asks for it.
    pub trace: Vec<StepTrace>,
}

impl Episode {
    pub fn log_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.log {
            out.push_str(&serde_json::to_string(r).expect("log records serialize"));
            out.push('\n');
        }
        out
    }

    /// Log with latency fields zeroed.
    pub fn comparable_log(&self) -> Vec<LogRecord> {
        self.log.iter().map(LogRecord::without_latency).collect()
    }
}

const NOOP_MESSAGE: &str =
    "No action was taken: the reply did not name an available action in the required format.";
const FULL_GRAPH_MESSAGE: &str = "Discovered objects and their attributes:";

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1000.0
}

/// Runs `task` in `scene` with the planner `llm`.
pub fn run_episode(
    scene: &SceneSpec,
    task: &TaskSpec,
    config: &EpisodeConfig,
    llm: &dyn ChatModel,
    embedder: Arc<dyn Embedder>,
) -> Result<Episode, HarnessError> {
    config.params.validate()?;
    let mode = config.mode;
    let catalog = AttributeCatalog::household();
    let mut world = World::new(scene, config.seed)?;
    let vocabulary = if scene.distractor_vocabulary.is_empty() {
        default_vocabulary()
    } else {
        scene.distractor_vocabulary.clone()
    };
    inject_distractors(&mut world, &vocabulary, config.distractors, config.seed);

    let mut graph = SceneGraph::with_catalog(catalog.clone());
    let mut index = VectorIndex::new(embedder);
    let deltas = observe_graph(&world, &mut graph)?;
    if mode.uses_retrieval() {
        index.apply_graph_deltas(&deltas)?;
    }

    let registry = ActionRegistry::household(mode);
    let mut ctx = ContextWindow::new(&task.text, &registry);
    let mut log = Vec::new();
    let mut trace = Vec::new();
    let mut llm_calls = 0;
    let mut failure = None;
    let mut success = false;
    let mut cumulative = 0;
    let mut full_graph_requests = 0;
    let mut malformed_steps = 0;
    let mut latency_total = Duration::ZERO;

    let mut abstraction = Abstraction::empty(&task.text);
    if mode.uses_retrieval() {
        match build_abstraction(&task.text, &catalog, llm) {
            Ok((a, report)) => {
                abstraction = a;
                llm_calls += report.llm_calls;
            }
            Err(e) => failure = Some(FailureMode::from_gateway(&e)),
        }
    }
    let mut feedback = QueryTermSet::default();
    let mut tool = ToolOutput::message(format!("Task: {}", task.text));

    let mut step_no = 0;
    while failure.is_none() && step_no < config.step_cap {
        let started = Instant::now();
        let sub = if mode.uses_retrieval() {
            Some(extract(&graph, &index, &abstraction, &feedback, &config.params, &catalog)?)
        } else {
            None
        };
        if mode.is_strict() {
            if let Some(s) = &sub {
                tool.message = restrict_tool_message(&tool.message, &graph.entity_ids(), &s.entity_ids());
            }
        }
        let obs = build_observation(mode, &graph, sub.as_ref(), &tool);
        let prep = started.elapsed();

        let outcome = match plan_step(&mut ctx, &obs.text, &registry, llm) {
            Ok(o) => o,
            Err(e) => {
                failure = Some(FailureMode::from_gateway(&e));
                break;
            }
        };
        let mut step_llm = outcome.llm_calls;
        let mut self_query_time = Duration::ZERO;
        if mode.self_queries() && !outcome.step.thought.trim().is_empty() {
            let t = Instant::now();
            step_llm += 1;
            match generate_query(&outcome.step.thought, &catalog, llm) {
                Ok(q) => feedback = merge_feedback(&feedback, &q),
                Err(e) => {
                    if let m @ (FailureMode::TokenLimit | FailureMode::ScriptExhausted) =
                        FailureMode::from_gateway(&e)
                    {
                        failure = Some(m);
                        break;
                    }
                }
            }
            self_query_time = t.elapsed();
        }
        llm_calls += step_llm;
        let latency = prep + outcome.llm_latency + self_query_time;
        latency_total += latency;
        cumulative += obs.graph_tokens;
        step_no += 1;

        let step = &outcome.step;
        let mut tool_calls = 0;
        let (ok, message) = match step.action.as_str() {
            FINISH => (true, "Finished.".to_string()),
            NOOP => {
                world.idle();
                (false, NOOP_MESSAGE.to_string())
            }
            action => {
                let r = world.step(action, &step.action_input);
                if action == "getdiscoveredobjects" {
                    tool_calls = 1;
                }
                (r.ok, r.message)
            }
        };
        full_graph_requests += tool_calls;
        if outcome.malformed {
            malformed_steps += 1;
        }
        let deltas = observe_graph(&world, &mut graph)?;
        if mode.uses_retrieval() {
            index.apply_graph_deltas(&deltas)?;
        }
        tool = if tool_calls > 0 {
            ToolOutput {
                message: FULL_GRAPH_MESSAGE.into(),
                graph_text: Some(graph.serialize_full()),
            }
        } else {
            ToolOutput::message(message.clone())
        };

        if config.keep_trace {
            trace.push(StepTrace {
                observation: obs.text.clone(),
                retrieved: sub.as_ref().map(|s| s.entity_ids()).unwrap_or_default(),
            });
        }
        log.push(LogRecord::Step(StepRecord {
            step: step_no,
            thought: step.thought.clone(),
            action: step.action.clone(),
            input: step.action_input.clone(),
            ok,
            message,
            observation_tokens: obs.graph_tokens,
            latency_ms: ms(latency),
            tool_calls,
            llm_calls: step_llm,
            malformed: outcome.malformed,
            retrieved: sub.as_ref().map_or(0, |s| s.graph.len()),
        }));

        if task.goal.check(&world) {
            success = true;
            break;
        }
        if step.is_finish() {
            failure = Some(FailureMode::AgentQuit);
        }
    }

    let failure_mode = match failure {
        _ if success => FailureMode::None,
        Some(f) => f,
        None if step_no > 0 && 2 * malformed_steps >= step_no => FailureMode::MalformedPlanning,
        None => FailureMode::StepLimit,
    };
    log.push(LogRecord::Final(FinalRecord {
        success,
        failure_mode,
        steps: step_no,
        cumulative_observation_tokens: cumulative,
        full_graph_requests,
    }));
    let avg_step_latency_s = if step_no == 0 {
        0.0
    } else {
        latency_total.as_secs_f64() / step_no as f64
    };
    let result = EpisodeResult {
        task_id: task.id.clone(),
        scene_id: scene.id.clone(),
        variant: mode,
        difficulty: task.difficulty,
        seed: config.seed,
        distractors: config.distractors,
        success,
        steps: step_no,
        failure_mode,
        avg_step_latency_s,
        cumulative_observation_tokens: cumulative,
        full_graph_requests,
        malformed_steps,
        llm_calls,
    };
    Ok(Episode {
        result,
        log,
        steps: ctx.steps().cloned().collect(),
        abstraction,
        trace,
    })
}
