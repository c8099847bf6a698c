//! Shared helpers for the integration tests: brute-force oracles, random
//! instance generators, and a local chat-completions endpoint.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::{Arc, Mutex};
use std::thread;

use rand::seq::IndexedRandom;
use rand::Rng;
use serde_json::{json, Value};

use subgraph_rag::abstraction::Abstraction;
use subgraph_rag::embedding::{Embedder, EmbeddingVector, TrigramEmbedder, DEFAULT_DIM};
use subgraph_rag::grounding::{FeedbackTerm, QueryTermSet};
use subgraph_rag::index::{Comparator, MetadataFilter, RetrievalParams, VectorIndex};
use subgraph_rag::llm::{ChatMessage, ChatModel, CompletionRequest, GatewayError, ScriptedChat};
use subgraph_rag::scene_graph::{AttrValue, Attributes, Edge, Entity, SceneGraph};
use subgraph_rag::sim::World;

pub fn embedder() -> Arc<dyn Embedder> {
    Arc::new(TrigramEmbedder::new(DEFAULT_DIM))
}

// ---------------------------------------------------------------- ranking

fn filter_holds(f: &MetadataFilter, metadata: &Attributes) -> bool {
    let present = metadata.get(&f.attribute).is_some_and(|v| *v == f.value);
    match f.comparator {
        Comparator::Eq => present,
        Comparator::Neq => !present,
    }
}

fn dot(a: &EmbeddingVector, b: &EmbeddingVector) -> f64 {
    if a.is_unembeddable() || b.is_unembeddable() {
        return 0.0;
    }
    let mut s = 0.0;
    for i in 0..a.dim() {
        s += a.values()[i] * b.values()[i];
    }
    s.clamp(-1.0, 1.0)
}

/// Exhaustive scan over every stored document: score, threshold, filter,
/// then pick the best k one at a time (higher score first, lower id on ties).
pub fn oracle_scan(index: &VectorIndex, q: &EmbeddingVector, params: &RetrievalParams) -> Vec<(String, f64)> {
    let mut pool: Vec<(String, f64)> = Vec::new();
    for id in index.doc_ids() {
        let stored = index.get(&id).unwrap();
        if stored.vector.is_unembeddable() {
            continue;
        }
        let s = dot(q, &stored.vector);
        if s < params.threshold {
            continue;
        }
        if !params.metadata_filter.iter().all(|f| filter_holds(f, &stored.document.metadata)) {
            continue;
        }
        pool.push((id, s));
    }
    let mut out = Vec::new();
    while out.len() < params.k && !pool.is_empty() {
        let mut best = 0;
        for i in 1..pool.len() {
            let (ref id, s) = pool[i];
            let (ref bid, bs) = pool[best];
            if s > bs || (s == bs && id < bid) {
                best = i;
            }
        }
        out.push(pool.swap_remove(best));
    }
    out
}

/// Entity and edge ids the grounding step should return: per-term scans,
/// their union, and every edge with both endpoints in the union.
pub fn oracle_extract(
    graph: &SceneGraph,
    index: &VectorIndex,
    abstraction: &Abstraction,
    feedback: &QueryTermSet,
    params: &RetrievalParams,
) -> (BTreeSet<String>, BTreeSet<String>) {
    let mut queries: Vec<(String, RetrievalParams)> = Vec::new();
    for t in abstraction.entities.iter().chain(&feedback.base_terms) {
        if !t.is_empty() {
            queries.push((t.clone(), params.clone()));
        }
    }
    for fb in &feedback.feedback_terms {
        if fb.term.is_empty() {
            continue;
        }
        let mut p = params.clone();
        p.metadata_filter.extend(fb.filters.iter().cloned());
        queries.push((fb.term.clone(), p));
    }
    let mut nodes = BTreeSet::new();
    for (term, p) in queries {
        let Ok(q) = index.embedder().embed(&term) else {
            continue;
        };
        if q.is_unembeddable() {
            continue;
        }
        for (id, _) in oracle_scan(index, &q, &p) {
            if graph.entity(&id).is_some() {
                nodes.insert(id);
            }
        }
    }
    let edges = graph
        .edges()
        .filter(|e| nodes.contains(&e.source) && nodes.contains(&e.target))
        .map(|e| e.id.clone())
        .collect();
    (nodes, edges)
}

// ------------------------------------------------------------- generators

pub const WORDS: [&str; 24] = [
    "egg", "eggs", "pan", "pot", "mug", "cup", "cups", "apple", "bowl", "plate", "knife", "fork",
    "sink", "stove", "drawer", "cabinet", "fridge", "shelf", "table", "counter", "tomato",
    "kettle", "sponge", "card",
];

const BOOL_ATTRS: [&str; 6] = ["isOpen", "isCooked", "isToggled", "pickupable", "isDirty", "visible"];
const TEMPS: [&str; 3] = ["Hot", "Cold", "RoomTemp"];
const RELATIONS: [&str; 3] = ["on", "in", "near"];

pub fn random_label(rng: &mut impl Rng) -> String {
    let w = *WORDS.choose(rng).unwrap();
    match rng.random_range(0..6) {
        0 => format!("{w} {}", WORDS.choose(rng).unwrap()),
        1 => format!("{w}{}", rng.random_range(0..3)),
        _ => w.to_string(),
    }
}

pub fn random_attributes(rng: &mut impl Rng) -> Attributes {
    let mut a = Attributes::new();
    for name in BOOL_ATTRS {
        if rng.random_bool(0.7) {
            a.insert(name.to_string(), AttrValue::Bool(rng.random_bool(0.5)));
        }
    }
    if rng.random_bool(0.7) {
        a.insert("temperature".into(), AttrValue::Text(TEMPS.choose(rng).unwrap().to_string()));
    }
    a
}

pub fn random_filter(rng: &mut impl Rng) -> MetadataFilter {
    if rng.random_bool(0.3) {
        let t = *TEMPS.choose(rng).unwrap();
        return if rng.random_bool(0.5) {
            MetadataFilter::eq("temperature", t)
        } else {
            MetadataFilter::neq("temperature", t)
        };
    }
    let name = *BOOL_ATTRS.choose(rng).unwrap();
    let v = rng.random_bool(0.5);
    if rng.random_bool(0.5) {
        MetadataFilter::eq(name, v)
    } else {
        MetadataFilter::neq(name, v)
    }
}

/// Graph with `n` entities and up to `2n` random edges.
pub fn random_graph(rng: &mut impl Rng, n: usize) -> SceneGraph {
    let mut g = SceneGraph::new();
    for i in 0..n {
        let mut e = Entity::new(format!("e{i:03}"), random_label(rng));
        e.attributes = random_attributes(rng);
        g.upsert_entity(e).unwrap();
    }
    if n > 1 {
        for j in 0..rng.random_range(0..=2 * n) {
            let a = rng.random_range(0..n);
            let b = rng.random_range(0..n);
            if a == b {
                continue;
            }
            let rel = *RELATIONS.choose(rng).unwrap();
            let _ = g.upsert_edge(Edge::new(format!("r{j:03}"), format!("e{a:03}"), format!("e{b:03}"), rel));
        }
    }
    g
}

pub fn mirrored_index(graph: &SceneGraph) -> VectorIndex {
    let mut idx = VectorIndex::new(embedder());
    for e in graph.entities() {
        idx.upsert_document(subgraph_rag::index::Document::from_entity(e)).unwrap();
    }
    idx
}

pub fn random_abstraction(rng: &mut impl Rng, max_terms: usize) -> Abstraction {
    let n = rng.random_range(1..=max_terms);
    let mut entities: Vec<String> = Vec::new();
    for _ in 0..n {
        let t = random_label(rng);
        if !entities.contains(&t) {
            entities.push(t);
        }
    }
    let attribute_map = entities
        .iter()
        .map(|t| {
            let subset: BTreeSet<String> = BOOL_ATTRS
                .iter()
                .filter(|_| rng.random_bool(0.3))
                .map(|s| s.to_string())
                .collect();
            (t.clone(), subset)
        })
        .collect();
    Abstraction {
        task: "random task".into(),
        entities,
        attribute_map,
    }
}

pub fn random_feedback(rng: &mut impl Rng, terms: usize) -> QueryTermSet {
    let mut set = QueryTermSet::default();
    for _ in 0..terms {
        let mut fb = FeedbackTerm::new(random_label(rng));
        if set.feedback(&fb.term).is_some() {
            continue;
        }
        for _ in 0..rng.random_range(0..=2) {
            fb = fb.filter(random_filter(rng));
        }
        set.feedback_terms.push(fb);
    }
    set
}

// ---------------------------------------------------------- sim invariants

fn flag(a: &Attributes, name: &str) -> bool {
    a.get(name).and_then(AttrValue::as_bool).unwrap_or(false)
}

/// Capability implications, gripper exclusivity, and containment sanity
/// checked from the public attribute maps.
pub fn world_violations(world: &World) -> Vec<String> {
    const IMPLIES: [(&str, &str); 6] = [
        ("isToggled", "toggleable"),
        ("isOpen", "openable"),
        ("isFilledWithLiquid", "canFillWithLiquid"),
        ("isCooked", "cookable"),
        ("isSliced", "sliceable"),
        ("isPickedUp", "pickupable"),
    ];
    let mut out = Vec::new();
    let mut held = Vec::new();
    for o in world.objects.values() {
        let a = o.state.to_attributes();
        for (state, cap) in IMPLIES {
            if flag(&a, state) && !flag(&a, cap) {
                out.push(format!("{}: {state} without {cap}", o.id));
            }
        }
        if let Some(x) = a.get("openness").and_then(AttrValue::as_f64) {
            if !(0.0..=1.0).contains(&x) {
                out.push(format!("{}: openness {x}", o.id));
            }
        }
        if flag(&a, "isPickedUp") {
            held.push(o.id.clone());
            if o.parent.is_some() {
                out.push(format!("{}: held but has a parent", o.id));
            }
        }
        if let Some((p, _)) = &o.parent {
            if !world.objects.contains_key(p) {
                out.push(format!("{}: missing parent {p}", o.id));
            }
        }
    }
    if held.len() > 1 {
        out.push(format!("gripper holds {held:?}"));
    }
    if held.first() != world.agent.held.as_ref() {
        out.push(format!("agent holds {:?} but picked up {held:?}", world.agent.held));
    }
    out
}

// ------------------------------------------------------------ chat helpers

/// Passes requests through and keeps a copy of each.
pub struct Capture<M> {
    pub inner: M,
    pub requests: Mutex<Vec<CompletionRequest>>,
}

impl<M> Capture<M> {
    pub fn new(inner: M) -> Self {
        Self {
            inner,
            requests: Mutex::new(Vec::new()),
        }
    }

    /// Content of the single user message of every one-message request.
    pub fn prompts(&self) -> Vec<String> {
        self.requests
            .lock()
            .unwrap()
            .iter()
            .filter(|r| r.messages.len() == 1)
            .map(|r| r.messages[0].content.clone())
            .collect()
    }
}

impl<M: ChatModel> ChatModel for Capture<M> {
    fn complete(&self, request: &CompletionRequest) -> Result<String, GatewayError> {
        self.requests.lock().unwrap().push(request.clone());
        self.inner.complete(request)
    }
}

fn read_request(reader: &mut BufReader<TcpStream>) -> Option<Vec<u8>> {
    let mut len = 0usize;
    loop {
        let mut line = String::new();
        if reader.read_line(&mut line).ok()? == 0 {
            return None;
        }
        if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
            len = v.trim().parse().ok()?;
        }
        if line == "\r\n" {
            break;
        }
    }
    let mut body = vec![0u8; len];
    reader.read_exact(&mut body).ok()?;
    Some(body)
}

/// A local OpenAI-style `/chat/completions` endpoint whose replies come
/// from a scripted model.
pub struct ScriptServer {
    addr: String,
}

impl ScriptServer {
    pub fn start(model: ScriptedChat) -> Self {
        let listener = TcpListener::bind("127.0.0.1:0").expect("bind");
        let addr = listener.local_addr().unwrap().to_string();
        let model = Arc::new(model);
        thread::spawn(move || {
            for stream in listener.incoming() {
                let Ok(stream) = stream else { return };
                let mut reader = BufReader::new(stream);
                while let Some(body) = read_request(&mut reader) {
                    let (status, reply) = answer(&model, &body);
                    let text = reply.to_string();
                    let resp = format!(
                        "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\n\r\n{text}",
                        text.len()
                    );
                    if reader.get_mut().write_all(resp.as_bytes()).is_err() {
                        break;
                    }
                }
            }
        });
        Self { addr }
    }

    pub fn url(&self) -> String {
        format!("http://{}/v1/chat/completions", self.addr)
    }
}

fn answer(model: &ScriptedChat, body: &[u8]) -> (u16, Value) {
    let parsed: Value = match serde_json::from_slice(body) {
        Ok(v) => v,
        Err(e) => return (400, json!({"error": e.to_string()})),
    };
    let messages: Vec<ChatMessage> = match serde_json::from_value(parsed["messages"].clone()) {
        Ok(m) => m,
        Err(e) => return (400, json!({"error": e.to_string()})),
    };
    match model.complete(&CompletionRequest::new(messages)) {
        Ok(text) => (200, json!({"choices": [{"message": {"role": "assistant", "content": text}}]})),
        Err(e) => (500, json!({"error": e.to_string()})),
    }
}

/// Counts of each value, for readable failure messages.
pub fn histogram<I: IntoIterator<Item = String>>(items: I) -> BTreeMap<String, usize> {
    let mut m = BTreeMap::new();
    for i in items {
        *m.entry(i).or_insert(0) += 1;
    }
    m
}
