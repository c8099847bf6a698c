use std::collections::BTreeSet;
use std::sync::LazyLock;

use regex::Regex;

use super::AgentMode;
use crate::grounding::RetrievedSubgraph;
use crate::llm::count_tokens;
use crate::scene_graph::SceneGraph;

/// What the simulator (or a graph tool) returned for the last action.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ToolOutput {
    pub message: String,
    /// Graph text produced by a full-graph tool call.
    pub graph_text: Option<String>,
}

impl ToolOutput {
    pub fn message(message: impl Into<String>) -> Self {
        Self {
            message: message.into(),
            graph_text: None,
        }
    }
}

/// Text handed to the planner and the token count of the graph text in it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Observation {
    pub text: String,
    pub graph_tokens: usize,
}

/// Per-variant observation:
/// - react: the tool output alone;
/// - full_mem: tool output plus the whole graph;
/// - erag variants: tool output plus the retrieved subgraph.
///
/// Full-graph tool text is dropped for strict variants.
pub fn build_observation(
    mode: AgentMode,
    graph: &SceneGraph,
    subgraph: Option<&RetrievedSubgraph>,
    tool: &ToolOutput,
) -> Observation {
    let mut text = tool.message.clone();
    let mut graph_tokens = 0;
    if let Some(g) = tool.graph_text.as_deref().filter(|_| !mode.is_strict()) {
        text.push('\n');
        text.push_str(g);
        graph_tokens += count_tokens(g);
    }
    match mode {
        AgentMode::React => {}
        AgentMode::FullMem => {
            let g = graph.serialize_full();
            text.push_str("\nScene graph: ");
            text.push_str(&g);
            graph_tokens += count_tokens(&g);
        }
        AgentMode::Erag | AgentMode::EragStrict | AgentMode::EragFeedback => {
            let empty;
            let g = match subgraph {
                Some(s) => s.serialized.as_str(),
                None => {
                    empty = SceneGraph::new().serialize_full();
                    empty.as_str()
                }
            };
            text.push_str("\nRetrieved subgraph: ");
            text.push_str(g);
            graph_tokens += count_tokens(g);
        }
    }
    Observation { text, graph_tokens }
}

static ID_TOKEN: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"[A-Za-z0-9_]+").expect("valid pattern"));

/// Hides entity ids the planner may not see. Ids in `known` but not in
/// `allowed` are dropped from "...objects: a, b" lists and replaced by
/// "unretrieved" elsewhere. Other words pass through.
pub fn restrict_tool_message(
    message: &str,
    known: &BTreeSet<String>,
    allowed: &BTreeSet<String>,
) -> String {
    let hidden = |id: &str| known.contains(id) && !allowed.contains(id);
    if let Some((head, list)) = message.split_once(": ") {
        if head.ends_with("objects") {
            let kept: Vec<&str> = list.split(", ").filter(|id| !hidden(id.trim())).collect();
            return if kept.is_empty() {
                format!("{head}: none")
            } else {
                format!("{head}: {}", kept.join(", "))
            };
        }
    }
    ID_TOKEN
        .replace_all(message, |c: &regex::Captures<'_>| {
            let tok = &c[0];
            if hidden(tok) {
                "unretrieved".to_string()
            } else {
                tok.to_string()
            }
        })
        .into_owned()
}
