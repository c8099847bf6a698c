//! Structured queries generated from planner thoughts, and their
//! accumulation into the feedback term set used by later extractions.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::catalog::AttributeCatalog;
use crate::grounding::{normalize, FeedbackTerm, QueryTermSet};
use crate::index::{Comparator, MetadataFilter};
use crate::llm::{ChatModel, CompletionRequest, GatewayError};
use crate::prompts;
use crate::scene_graph::AttrValue;

pub const FEEDBACK_CAP: usize = 16;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StructuredQuery {
    pub search_terms: Vec<String>,
    pub attribute_filters: Vec<MetadataFilter>,
    pub attribute_unlocks: BTreeSet<String>,
}

impl StructuredQuery {
    pub fn is_empty(&self) -> bool {
        self.search_terms.is_empty()
            && self.attribute_filters.is_empty()
            && self.attribute_unlocks.is_empty()
    }
}

/// First JSON object embedded anywhere in `text` (code fences and prose
/// around it are ignored).
fn first_json_object(text: &str) -> Option<serde_json::Map<String, Value>> {
    text.match_indices('{').find_map(|(i, _)| {
        serde_json::Deserializer::from_str(&text[i..])
            .into_iter::<Value>()
            .next()
            .and_then(Result::ok)
            .and_then(|v| match v {
                Value::Object(m) => Some(m),
                _ => None,
            })
    })
}

fn strings(v: Option<&Value>) -> Vec<String> {
    match v {
        Some(Value::String(s)) => vec![s.clone()],
        Some(Value::Array(items)) => items
            .iter()
            .filter_map(|x| x.as_str().map(str::to_string))
            .collect(),
        _ => Vec::new(),
    }
}

fn scalar(v: &Value) -> Option<AttrValue> {
    match v {
        Value::Bool(b) => Some(AttrValue::Bool(*b)),
        Value::Number(n) => n.as_f64().map(AttrValue::Number),
        Value::String(s) => Some(AttrValue::Text(s.clone())),
        _ => None,
    }
}

fn comparator(v: &Value) -> Option<Comparator> {
    match v.as_str()?.trim().to_ascii_lowercase().as_str() {
        "eq" | "==" | "=" => Some(Comparator::Eq),
        "neq" | "ne" | "!=" => Some(Comparator::Neq),
        _ => None,
    }
}

/// One filter written either as `[name, cmp, value]` or as
/// `{"attribute":…, "comparator":…, "value":…}`.
fn parse_filter(v: &Value, catalog: &AttributeCatalog) -> Option<MetadataFilter> {
    let (name, cmp, value) = match v {
        Value::Array(parts) if parts.len() == 3 => (&parts[0], &parts[1], &parts[2]),
        Value::Object(m) => (m.get("attribute")?, m.get("comparator")?, m.get("value")?),
        _ => return None,
    };
    Some(MetadataFilter {
        attribute: catalog.canonical(name.as_str()?)?.to_string(),
        comparator: comparator(cmp)?,
        value: scalar(value)?,
    })
}

/// Parse a model reply. Anything unusable yields an empty query; attribute
/// names outside the catalog are dropped.
pub fn parse_structured_query(reply: &str, catalog: &AttributeCatalog) -> StructuredQuery {
    let Some(obj) = first_json_object(reply) else {
        return StructuredQuery::default();
    };
    let mut seen = BTreeSet::new();
    let search_terms = strings(obj.get("terms"))
        .iter()
        .map(|t| normalize(t))
        .filter(|t| !t.is_empty() && seen.insert(t.clone()))
        .collect();
    let attribute_filters = match obj.get("filters") {
        Some(Value::Array(items)) => {
            let mut out: Vec<MetadataFilter> = Vec::new();
            for f in items.iter().filter_map(|f| parse_filter(f, catalog)) {
                if !out.contains(&f) {
                    out.push(f);
                }
            }
            out
        }
        _ => Vec::new(),
    };
    let attribute_unlocks = strings(obj.get("unlocks"))
        .iter()
        .filter_map(|a| catalog.canonical(a))
        .map(str::to_string)
        .collect();
    StructuredQuery {
        search_terms,
        attribute_filters,
        attribute_unlocks,
    }
}

/// Ask the model to turn a thought into a structured query. An empty thought
/// returns the empty query without a model call. Gateway errors are passed
/// up so the caller can decide how strict to be.
pub fn generate_query(
    thought: &str,
    catalog: &AttributeCatalog,
    llm: &dyn ChatModel,
) -> Result<StructuredQuery, GatewayError> {
    if thought.trim().is_empty() {
        return Ok(StructuredQuery::default());
    }
    let prompt = prompts::self_query_prompt(thought.trim(), &catalog.json_list());
    let reply = llm.complete(&CompletionRequest::prompt(prompt))?;
    Ok(parse_structured_query(&reply, catalog))
}

fn same_filters(a: &[MetadataFilter], b: &[MetadataFilter]) -> bool {
    a.iter().all(|f| b.contains(f)) && b.iter().all(|f| a.contains(f))
}

/// Fold a query into the accumulated feedback. Each (term, filter set) pair
/// is one entry: a pair already present keeps its position and gains the
/// new unlocks, any other pair is appended. Entries are never narrowed, so
/// below the cap merging only adds retrievals. Past the cap the oldest
/// entries are evicted.
pub fn merge_feedback(accumulated: &QueryTermSet, q: &StructuredQuery) -> QueryTermSet {
    let mut out = accumulated.clone();
    for term in &q.search_terms {
        let term = normalize(term);
        if term.is_empty() {
            continue;
        }
        let existing = out
            .feedback_terms
            .iter_mut()
            .find(|f| f.term == term && same_filters(&f.filters, &q.attribute_filters));
        match existing {
            Some(entry) => entry.unlocks.extend(q.attribute_unlocks.iter().cloned()),
            None => out.feedback_terms.push(FeedbackTerm {
                term,
                unlocks: q.attribute_unlocks.clone(),
                filters: q.attribute_filters.clone(),
            }),
        }
    }
    if out.feedback_terms.len() > FEEDBACK_CAP {
        let excess = out.feedback_terms.len() - FEEDBACK_CAP;
        out.feedback_terms.drain(..excess);
    }
    out
}
