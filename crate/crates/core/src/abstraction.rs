//! Task-only pre-retrieval: which entities and which of their attributes
//! matter, asked of the language model before any scene knowledge exists.
//! Nothing here takes a graph or an index.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::AttributeCatalog;
use crate::llm::{ChatModel, CompletionRequest, GatewayError};
use crate::prompts;

/// Labels models like to put in front of the list itself.
const ANSWER_PREFIXES: [&str; 7] = [
    "final answer",
    "answer",
    "objects",
    "attributes",
    "output",
    "response",
    "list",
];

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Abstraction {
    pub task: String,
    pub entities: Vec<String>,
    /// Entity term to relevant attribute names. An empty set means the
    /// model gave nothing usable and the entity is shown with everything.
    pub attribute_map: BTreeMap<String, BTreeSet<String>>,
}

impl Abstraction {
    pub fn empty(task: impl Into<String>) -> Self {
        Self {
            task: task.into(),
            ..Self::default()
        }
    }

    pub fn attributes_for(&self, term: &str) -> BTreeSet<String> {
        self.attribute_map.get(term).cloned().unwrap_or_default()
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AbstractionError {
    #[error("task text is empty")]
    EmptyTask,
    #[error("attribute catalog is empty")]
    EmptyCatalog,
    #[error("no usable list in reply {0:?}")]
    Unparseable(String),
    #[error(transparent)]
    Gateway(#[from] GatewayError),
}

fn strip_answer_prefix(term: &str) -> Option<&str> {
    ANSWER_PREFIXES.iter().find_map(|p| {
        let head = term.get(..p.len())?;
        if !head.eq_ignore_ascii_case(p) {
            return None;
        }
        term[p.len()..].trim_start().strip_prefix(':')
    })
}

fn normalize_term(raw: &str) -> String {
    let mut term = raw
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase();
    loop {
        let before = term.len();
        if let Some(rest) = strip_answer_prefix(&term) {
            term = rest.to_string();
        }
        term = term
            .trim()
            .trim_end_matches(|c: char| c == '.' || c.is_whitespace())
            .to_string();
        if term.len() == before {
            return term;
        }
    }
}

/// Split a model reply into normalized terms: comma separated, trimmed,
/// lowercased, empties dropped, first occurrence kept. A first line ending
/// in ':' ("Here are the objects:") and `Answer:`-style labels are removed.
pub fn parse_comma_list(text: &str) -> Vec<String> {
    let mut body = text.trim();
    if let Some((first, rest)) = body.split_once('\n') {
        if first.trim_end().ends_with(':') {
            body = rest;
        }
    }
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for piece in body.split(',') {
        let term = normalize_term(piece);
        if !term.is_empty() && seen.insert(term.clone()) {
            out.push(term);
        }
    }
    out
}

fn ask_list(prompt: String, llm: &dyn ChatModel) -> Result<Vec<String>, AbstractionError> {
    let request = CompletionRequest::prompt(prompt);
    let mut last_reply = String::new();
    for _ in 0..2 {
        last_reply = llm.complete(&request)?;
        let terms = parse_comma_list(&last_reply);
        if !terms.is_empty() {
            return Ok(terms);
        }
    }
    Err(AbstractionError::Unparseable(last_reply))
}

pub fn propose_entities(task: &str, llm: &dyn ChatModel) -> Result<Vec<String>, AbstractionError> {
    if task.trim().is_empty() {
        return Err(AbstractionError::EmptyTask);
    }
    ask_list(prompts::entities_prompt(task), llm)
}

/// Attribute names the model picked for `entity`, restricted to the catalog
/// and spelled as the catalog spells them.
pub fn propose_attributes(
    task: &str,
    entity: &str,
    catalog: &AttributeCatalog,
    llm: &dyn ChatModel,
) -> Result<BTreeSet<String>, AbstractionError> {
    if task.trim().is_empty() {
        return Err(AbstractionError::EmptyTask);
    }
    if catalog.is_empty() {
        return Err(AbstractionError::EmptyCatalog);
    }
    let prompt = prompts::attributes_prompt(entity, task, &catalog.comma_list());
    let terms = ask_list(prompt, llm)?;
    Ok(terms
        .iter()
        .filter_map(|t| catalog.canonical(t))
        .map(str::to_string)
        .collect())
}

/// What went wrong while building an abstraction without stopping it.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AbstractionReport {
    pub entity_failure: Option<String>,
    /// Entity terms whose attribute request failed.
    pub attribute_failures: Vec<String>,
    pub llm_calls: usize,
}

struct Counting<'a> {
    inner: &'a dyn ChatModel,
    calls: std::sync::atomic::AtomicUsize,
}

impl ChatModel for Counting<'_> {
    fn complete(&self, request: &CompletionRequest) -> Result<String, GatewayError> {
        self.calls
            .fetch_add(1, std::sync::atomic::Ordering::Relaxed);
        self.inner.complete(request)
    }
}

/// Full pre-retrieval. Unusable replies degrade (no entities, or an empty
/// attribute subset for one entity); gateway errors are returned as-is.
pub fn build_abstraction(
    task: &str,
    catalog: &AttributeCatalog,
    llm: &dyn ChatModel,
) -> Result<(Abstraction, AbstractionReport), GatewayError> {
    let counting = Counting {
        inner: llm,
        calls: Default::default(),
    };
    let mut report = AbstractionReport::default();
    let mut abstraction = Abstraction::empty(task);
    let entities = match propose_entities(task, &counting) {
        Ok(e) => e,
        Err(AbstractionError::Gateway(e)) => return Err(e),
        Err(other) => {
            report.entity_failure = Some(other.to_string());
            Vec::new()
        }
    };
    for entity in &entities {
        let subset = match propose_attributes(task, entity, catalog, &counting) {
            Ok(s) => s,
            Err(AbstractionError::Gateway(e)) => return Err(e),
            Err(_) => {
                report.attribute_failures.push(entity.clone());
                BTreeSet::new()
            }
        };
        abstraction.attribute_map.insert(entity.clone(), subset);
    }
    abstraction.entities = entities;
    report.llm_calls = counting.calls.into_inner();
    Ok((abstraction, report))
}
