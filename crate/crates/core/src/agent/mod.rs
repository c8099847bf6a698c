//! ReAct planning loop: context window, reply parsing, action registry and
//! per-variant observation construction.

mod observation;
mod parse;

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::llm::{ChatMessage, ChatModel, CompletionRequest, GatewayError};
use crate::prompts;

pub use observation::{build_observation, restrict_tool_message, Observation, ToolOutput};
pub use parse::{normalize_action, parse_react, ParseError, ParsedReply};

/// Terminal action ending an episode. Always accepted.
pub const FINISH: &str = "finish";
/// Recorded in place of a reply that stayed malformed after the re-prompt.
pub const NOOP: &str = "noop";
/// Iteration cap on planning steps per episode.
pub const STEP_CAP: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentMode {
    React,
    FullMem,
    Erag,
    EragStrict,
    EragFeedback,
}

impl AgentMode {
    pub const ALL: [AgentMode; 5] = [
        AgentMode::React,
        AgentMode::FullMem,
        AgentMode::Erag,
        AgentMode::EragStrict,
        AgentMode::EragFeedback,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AgentMode::React => "react",
            AgentMode::FullMem => "full_mem",
            AgentMode::Erag => "erag",
            AgentMode::EragStrict => "erag_strict",
            AgentMode::EragFeedback => "erag_feedback",
        }
    }

    /// Whether observations carry a retrieved subgraph.
    pub fn uses_retrieval(self) -> bool {
        matches!(
            self,
            AgentMode::Erag | AgentMode::EragStrict | AgentMode::EragFeedback
        )
    }

    /// Whether the planner may ever see the full graph.
    pub fn has_full_graph_tool(self) -> bool {
        !self.is_strict()
    }

    /// Strict variants never see entities outside retrieved subgraphs.
    pub fn is_strict(self) -> bool {
        matches!(self, AgentMode::EragStrict | AgentMode::EragFeedback)
    }

    pub fn self_queries(self) -> bool {
        self == AgentMode::EragFeedback
    }
}

impl fmt::Display for AgentMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AgentMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        AgentMode::ALL
            .into_iter()
            .find(|m| m.as_str() == key)
            .ok_or_else(|| format!("unknown agent variant '{s}'"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionSpec {
    pub name: String,
    pub takes_object: bool,
    pub description: String,
}

impl ActionSpec {
    pub fn new(name: &str, takes_object: bool, description: &str) -> Self {
        Self {
            name: normalize_action(name),
            takes_object,
            description: description.into(),
        }
    }
}

const HOUSEHOLD_ACTIONS: [(&str, bool, &str); 15] = [
    ("randomlyexplore", false, "go to another part of the house and look around"),
    ("getdiscoveredobjects", false, "list every object discovered so far with its attributes"),
    ("getvisibleobjects", false, "list the objects visible from where you are"),
    ("moveto", true, "move next to an object"),
    ("inspect", true, "report the current attributes of an object"),
    ("pickup", true, "pick up an object next to you; you can hold one object at a time"),
    ("placeon", true, "put the held object on or in a receptacle next to you"),
    ("open", true, "open an object next to you"),
    ("close", true, "close an object next to you"),
    ("toggleon", true, "switch on an object next to you"),
    ("toggleoff", true, "switch off an object next to you"),
    ("search", true, "look inside an open container in your room"),
    ("fillheldobjectwithwater", false, "fill the held object at a running water source next to you"),
    ("pourwaterinto", true, "pour water from the held object into an object next to you"),
    ("adjustpositioning", false, "shift to a nearby position"),
];

/// The actions a run declares to the planner.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionRegistry {
    actions: Vec<ActionSpec>,
}

impl ActionRegistry {
    pub fn new(actions: Vec<ActionSpec>) -> Self {
        Self { actions }
    }

    /// Household simulator actions available to `mode`. Strict variants lack
    /// `getdiscoveredobjects`.
    pub fn household(mode: AgentMode) -> Self {
        let actions = HOUSEHOLD_ACTIONS
            .iter()
            .filter(|(name, ..)| mode.has_full_graph_tool() || *name != "getdiscoveredobjects")
            .map(|(n, o, d)| ActionSpec::new(n, *o, d))
            .collect();
        Self { actions }
    }

    pub fn actions(&self) -> &[ActionSpec] {
        &self.actions
    }

    /// Declared actions plus `finish`.
    pub fn accepts(&self, normalized: &str) -> bool {
        normalized == FINISH || self.actions.iter().any(|a| a.name == normalized)
    }

    pub fn names(&self) -> Vec<&str> {
        self.actions
            .iter()
            .map(|a| a.name.as_str())
            .chain([FINISH])
            .collect()
    }

    /// One line per action for the system prompt.
    pub fn describe(&self) -> String {
        let mut lines: Vec<String> = self
            .actions
            .iter()
            .map(|a| {
                let arg = if a.takes_object { "object" } else { "" };
                format!("- {}({arg}): {}", a.name, a.description)
            })
            .collect();
        lines.push(format!("- {FINISH}(): declare the task complete"));
        lines.join("\n")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentStep {
    pub thought: String,
    pub action: String,
    #[serde(rename = "input")]
    pub action_input: String,
    pub raw: String,
}

impl AgentStep {
    pub fn is_finish(&self) -> bool {
        self.action == FINISH
    }

    pub fn is_noop(&self) -> bool {
        self.action == NOOP
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub observation: String,
    pub step: AgentStep,
}

/// Task, system prompt and the (observation, step) history of one episode.
#[derive(Debug, Clone, PartialEq)]
pub struct ContextWindow {
    pub task: String,
    pub system_prompt: String,
    pub history: Vec<HistoryEntry>,
    serialized_bytes: usize,
}

impl ContextWindow {
    pub fn new(task: &str, registry: &ActionRegistry) -> Self {
        let system_prompt = prompts::react_system_prompt(
            task,
            &registry.describe(),
            &registry.names().join(", "),
        );
        Self {
            task: task.into(),
            serialized_bytes: system_prompt.len(),
            system_prompt,
            history: Vec::new(),
        }
    }

    /// Bytes of all message text in the window.
    pub fn serialized_bytes(&self) -> usize {
        self.serialized_bytes
    }

    pub fn steps(&self) -> impl Iterator<Item = &AgentStep> {
        self.history.iter().map(|h| &h.step)
    }

    /// System prompt, interleaved history, then the new observation.
    pub fn messages(&self, observation: &str) -> Vec<ChatMessage> {
        let mut m = Vec::with_capacity(2 * self.history.len() + 2);
        m.push(ChatMessage::system(self.system_prompt.clone()));
        for h in &self.history {
            m.push(ChatMessage::user(h.observation.clone()));
            m.push(ChatMessage::assistant(reply_text(&h.step.raw)));
        }
        m.push(ChatMessage::user(observation.to_string()));
        m
    }

    fn push(&mut self, observation: String, step: AgentStep) {
        self.serialized_bytes += observation.len() + step.raw.len();
        self.history.push(HistoryEntry { observation, step });
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanOutcome {
    pub step: AgentStep,
    /// True when both the reply and its re-prompt were unusable.
    pub malformed: bool,
    pub llm_calls: usize,
    pub llm_latency: Duration,
}

/// Requests reject empty messages, so an empty reply is replayed as a marker.
fn reply_text(raw: &str) -> String {
    if raw.trim().is_empty() {
        "(empty reply)".into()
    } else {
        raw.to_string()
    }
}

fn accept(reply: &str, registry: &ActionRegistry) -> Option<AgentStep> {
    let p = parse_react(reply).ok()?;
    registry.accepts(&p.action).then(|| AgentStep {
        thought: p.thought,
        action: p.action,
        action_input: p.input,
        raw: reply.to_string(),
    })
}

/// One planning step: prompt with the history plus `observation`, parse the
/// reply, re-prompt once with the format reminder on failure, and fall back
/// to a no-op. Appends the pair to the context's history.
pub fn plan_step(
    context: &mut ContextWindow,
    observation: &str,
    registry: &ActionRegistry,
    llm: &dyn ChatModel,
) -> Result<PlanOutcome, GatewayError> {
    let mut messages = context.messages(observation);
    let started = Instant::now();
    let first = llm.complete(&CompletionRequest::new(messages.clone()))?;
    let (step, malformed, llm_calls) = match accept(&first, registry) {
        Some(step) => (step, false, 1),
        None => {
            messages.push(ChatMessage::assistant(reply_text(&first)));
            messages.push(ChatMessage::user(prompts::FORMAT_REMINDER));
            let second = llm.complete(&CompletionRequest::new(messages))?;
            match accept(&second, registry) {
                Some(step) => (step, false, 2),
                None => {
                    let thought = parse_react(&second).map(|p| p.thought).unwrap_or_default();
                    let step = AgentStep {
                        thought,
                        action: NOOP.into(),
                        action_input: String::new(),
                        raw: second,
                    };
                    (step, true, 2)
                }
            }
        }
    };
    let llm_latency = started.elapsed();
    context.push(observation.to_string(), step.clone());
    Ok(PlanOutcome {
        step,
        malformed,
        llm_calls,
        llm_latency,
    })
}
