//! Time-varying scene graph: entities with scalar attributes, relation edges,
//! induced-subgraph extraction and canonical JSON serialization.
//!
//! The graph has a single owner that applies mutations; readers work on
//! clones (`SceneGraph` is a plain value), which gives every reader a
//! consistent snapshot.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::AttributeCatalog;

/// Closed scalar union for attribute values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AttrValue {
    Bool(bool),
    Number(f64),
    Text(String),
}

impl AttrValue {
    pub fn as_bool(&self) -> Option<bool> {
        match self {
            AttrValue::Bool(b) => Some(*b),
            _ => None,
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            AttrValue::Number(n) => Some(*n),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            AttrValue::Text(s) => Some(s),
            _ => None,
        }
    }
}

impl fmt::Display for AttrValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AttrValue::Bool(b) => write!(f, "{b}"),
            AttrValue::Number(n) => write!(f, "{n}"),
            AttrValue::Text(s) => f.write_str(s),
        }
    }
}

impl From<bool> for AttrValue {
    fn from(v: bool) -> Self {
        AttrValue::Bool(v)
    }
}

impl From<f64> for AttrValue {
    fn from(v: f64) -> Self {
        AttrValue::Number(v)
    }
}

impl From<&str> for AttrValue {
    fn from(v: &str) -> Self {
        AttrValue::Text(v.to_string())
    }
}

impl From<String> for AttrValue {
    fn from(v: String) -> Self {
        AttrValue::Text(v)
    }
}

pub type Attributes = BTreeMap<String, AttrValue>;

/// Per-entity attribute filter used by [`SceneGraph::serialize`]. Entities
/// without an entry are serialized with all of their attributes.
pub type AttributeView = BTreeMap<String, BTreeSet<String>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Entity {
    pub id: String,
    pub label: String,
    #[serde(default)]
    pub attributes: Attributes,
    #[serde(default)]
    pub last_updated: u64,
}

impl Entity {
    pub fn new(id: impl Into<String>, label: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            label: label.into(),
            attributes: Attributes::new(),
            last_updated: 0,
        }
    }

    pub fn with_attr(mut self, name: impl Into<String>, value: impl Into<AttrValue>) -> Self {
        self.attributes.insert(name.into(), value.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub id: String,
    pub source: String,
    pub target: String,
    pub relations: Vec<String>,
}

impl Edge {
    pub fn new(
        id: impl Into<String>,
        source: impl Into<String>,
        target: impl Into<String>,
        relation: impl Into<String>,
    ) -> Self {
        Self {
            id: id.into(),
            source: source.into(),
            target: target.into(),
            relations: vec![relation.into()],
        }
    }
}

/// Change record produced by every graph mutation. The vector index consumes
/// these to stay in lockstep with the graph.
#[derive(Debug, Clone, PartialEq)]
pub enum GraphDelta {
    EntityAdded(Entity),
    EntityUpdated {
        entity: Entity,
        changed: BTreeSet<String>,
        label_changed: bool,
    },
    EntityRemoved {
        id: String,
        removed_edges: Vec<String>,
    },
    EdgeUpserted(Edge),
    EdgeRemoved {
        id: String,
    },
}

#[derive(Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("invalid entity: {0}")]
    InvalidEntity(String),
    #[error("invalid edge: {0}")]
    InvalidEdge(String),
    #[error("entity not found: {0}")]
    EntityNotFound(String),
    #[error("edge not found: {0}")]
    EdgeNotFound(String),
    #[error("malformed snapshot: {0}")]
    Snapshot(String),
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SceneGraph {
    entities: BTreeMap<String, Entity>,
    edges: BTreeMap<String, Edge>,
    tick: u64,
    catalog: Option<AttributeCatalog>,
}

#[derive(Serialize)]
struct EntityOut<'a> {
    id: &'a str,
    label: &'a str,
    attributes: BTreeMap<&'a str, &'a AttrValue>,
}

#[derive(Serialize)]
struct EdgeOut<'a> {
    id: &'a str,
    source: &'a str,
    target: &'a str,
    relations: &'a [String],
}

#[derive(Serialize)]
struct GraphOut<'a> {
    entities: Vec<EntityOut<'a>>,
    edges: Vec<EdgeOut<'a>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tick: Option<u64>,
}

#[derive(Deserialize)]
struct SnapshotEntity {
    id: String,
    label: String,
    #[serde(default)]
    attributes: Attributes,
}

#[derive(Deserialize)]
struct Snapshot {
    entities: Vec<SnapshotEntity>,
    edges: Vec<Edge>,
    #[serde(default)]
    tick: u64,
}

impl SceneGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Graph that rejects attribute names outside `catalog`.
    pub fn with_catalog(catalog: AttributeCatalog) -> Self {
        Self {
            catalog: Some(catalog),
            ..Self::default()
        }
    }

    pub fn tick(&self) -> u64 {
        self.tick
    }

    pub fn set_tick(&mut self, tick: u64) {
        self.tick = tick;
    }

    pub fn catalog(&self) -> Option<&AttributeCatalog> {
        self.catalog.as_ref()
    }

    pub fn len(&self) -> usize {
        self.entities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entities.is_empty()
    }

    pub fn entity(&self, id: &str) -> Option<&Entity> {
        self.entities.get(id)
    }

    pub fn edge(&self, id: &str) -> Option<&Edge> {
        self.edges.get(id)
    }

    pub fn contains(&self, id: &str) -> bool {
        self.entities.contains_key(id)
    }

    /// Entities in id order.
    pub fn entities(&self) -> impl Iterator<Item = &Entity> {
        self.entities.values()
    }

    /// Edges in id order.
    pub fn edges(&self) -> impl Iterator<Item = &Edge> {
        self.edges.values()
    }

    pub fn entity_ids(&self) -> BTreeSet<String> {
        self.entities.keys().cloned().collect()
    }

    pub fn edge_ids(&self) -> BTreeSet<String> {
        self.edges.keys().cloned().collect()
    }

    fn validate_entity(&self, entity: &Entity) -> Result<(), GraphError> {
        if entity.id.trim().is_empty() {
            return Err(GraphError::InvalidEntity("empty id".into()));
        }
        if entity.label.trim().is_empty() {
            return Err(GraphError::InvalidEntity(format!(
                "entity {} has an empty label",
                entity.id
            )));
        }
        for (name, value) in &entity.attributes {
            if let Some(catalog) = &self.catalog {
                if !catalog.contains(name) {
                    return Err(GraphError::InvalidEntity(format!(
                        "entity {} uses attribute {name} outside the catalog",
                        entity.id
                    )));
                }
            }
            if let AttrValue::Number(n) = value {
                if !n.is_finite() {
                    return Err(GraphError::InvalidEntity(format!(
                        "entity {} attribute {name} is not finite",
                        entity.id
                    )));
                }
            }
        }
        Ok(())
    }

    /// Insert or replace an entity by id. The stored copy is stamped with the
    /// graph's current tick.
    pub fn upsert_entity(&mut self, mut entity: Entity) -> Result<GraphDelta, GraphError> {
        self.validate_entity(&entity)?;
        entity.last_updated = self.tick;
        match self.entities.get(&entity.id) {
            None => {
                self.entities.insert(entity.id.clone(), entity.clone());
                Ok(GraphDelta::EntityAdded(entity))
            }
            Some(old) => {
                let changed = changed_attributes(&old.attributes, &entity.attributes);
                let label_changed = old.label != entity.label;
                self.entities.insert(entity.id.clone(), entity.clone());
                Ok(GraphDelta::EntityUpdated {
                    entity,
                    changed,
                    label_changed,
                })
            }
        }
    }

    /// Remove an entity together with every incident edge.
    pub fn remove_entity(&mut self, id: &str) -> Result<GraphDelta, GraphError> {
        if self.entities.remove(id).is_none() {
            return Err(GraphError::EntityNotFound(id.to_string()));
        }
        let removed_edges: Vec<String> = self
            .edges
            .values()
            .filter(|e| e.source == id || e.target == id)
            .map(|e| e.id.clone())
            .collect();
        for edge_id in &removed_edges {
            self.edges.remove(edge_id);
        }
        Ok(GraphDelta::EntityRemoved {
            id: id.to_string(),
            removed_edges,
        })
    }

    pub fn upsert_edge(&mut self, edge: Edge) -> Result<GraphDelta, GraphError> {
        if edge.id.trim().is_empty() {
            return Err(GraphError::InvalidEdge("empty id".into()));
        }
        if edge.source == edge.target {
            return Err(GraphError::InvalidEdge(format!("{} is a self-loop", edge.id)));
        }
        if edge.relations.is_empty() || edge.relations.iter().any(|r| r.trim().is_empty()) {
            return Err(GraphError::InvalidEdge(format!(
                "{} has no relation labels",
                edge.id
            )));
        }
        for endpoint in [&edge.source, &edge.target] {
            if !self.entities.contains_key(endpoint) {
                return Err(GraphError::EntityNotFound(endpoint.clone()));
            }
        }
        self.edges.insert(edge.id.clone(), edge.clone());
        Ok(GraphDelta::EdgeUpserted(edge))
    }

    pub fn remove_edge(&mut self, id: &str) -> Result<GraphDelta, GraphError> {
        self.edges
            .remove(id)
            .map(|_| GraphDelta::EdgeRemoved { id: id.to_string() })
            .ok_or_else(|| GraphError::EdgeNotFound(id.to_string()))
    }

    /// The subgraph containing exactly the named entities and every edge whose
    /// endpoints are both named. Unknown ids are ignored.
    pub fn induced_subgraph<'a, I>(&self, node_ids: I) -> SceneGraph
    where
        I: IntoIterator<Item = &'a str>,
    {
        let entities: BTreeMap<String, Entity> = node_ids
            .into_iter()
            .filter_map(|id| self.entities.get(id))
            .map(|e| (e.id.clone(), e.clone()))
            .collect();
        let edges = self
            .edges
            .values()
            .filter(|e| entities.contains_key(&e.source) && entities.contains_key(&e.target))
            .map(|e| (e.id.clone(), e.clone()))
            .collect();
        SceneGraph {
            entities,
            edges,
            tick: self.tick,
            catalog: self.catalog.clone(),
        }
    }

    fn render(&self, view: &AttributeView, tick: Option<u64>) -> String {
        let entities = self
            .entities
            .values()
            .map(|e| {
                let attributes = match view.get(&e.id) {
                    Some(names) => e
                        .attributes
                        .iter()
                        .filter(|(k, _)| names.contains(*k))
                        .map(|(k, v)| (k.as_str(), v))
                        .collect(),
                    None => e.attributes.iter().map(|(k, v)| (k.as_str(), v)).collect(),
                };
                EntityOut {
                    id: &e.id,
                    label: &e.label,
                    attributes,
                }
            })
            .collect();
        let edges = self
            .edges
            .values()
            .map(|e| EdgeOut {
                id: &e.id,
                source: &e.source,
                target: &e.target,
                relations: &e.relations,
            })
            .collect();
        serde_json::to_string(&GraphOut {
            entities,
            edges,
            tick,
        })
        .expect("graph serialization is infallible")
    }

    /// Canonical compact JSON: entities and edges sorted by id, attribute
    /// keys sorted, each entity restricted to its view entry when present.
    pub fn serialize(&self, view: &AttributeView) -> String {
        self.render(view, None)
    }

    /// Serialization with every attribute of every entity.
    pub fn serialize_full(&self) -> String {
        self.render(&AttributeView::new(), None)
    }

    /// Snapshot file body: the full serialization plus the graph tick.
    pub fn to_snapshot(&self) -> String {
        self.render(&AttributeView::new(), Some(self.tick))
    }

    pub fn from_snapshot(text: &str) -> Result<Self, GraphError> {
        let snap: Snapshot =
            serde_json::from_str(text).map_err(|e| GraphError::Snapshot(e.to_string()))?;
        let mut graph = SceneGraph::new();
        graph.tick = snap.tick;
        for e in snap.entities {
            if graph.entities.contains_key(&e.id) {
                return Err(GraphError::Snapshot(format!("duplicate entity {}", e.id)));
            }
            graph.upsert_entity(Entity {
                id: e.id,
                label: e.label,
                attributes: e.attributes,
                last_updated: snap.tick,
            })?;
        }
        for edge in snap.edges {
            if graph.edges.contains_key(&edge.id) {
                return Err(GraphError::Snapshot(format!("duplicate edge {}", edge.id)));
            }
            graph.upsert_edge(edge)?;
        }
        Ok(graph)
    }

    /// True when no edge references a missing entity.
    pub fn is_consistent(&self) -> bool {
        self.edges
            .values()
            .all(|e| self.entities.contains_key(&e.source) && self.entities.contains_key(&e.target))
    }

    /// Structural equality ignoring `last_updated` stamps.
    pub fn same_content(&self, other: &SceneGraph) -> bool {
        self.edges == other.edges
            && self.entities.len() == other.entities.len()
            && self.entities.values().zip(other.entities.values()).all(|(a, b)| {
                a.id == b.id && a.label == b.label && a.attributes == b.attributes
            })
    }
}

/// Names whose values differ between two attribute maps, including names
/// present in only one of them.
pub fn changed_attributes(old: &Attributes, new: &Attributes) -> BTreeSet<String> {
    old.keys()
        .chain(new.keys())
        .filter(|k| old.get(*k) != new.get(*k))
        .cloned()
        .collect()
}
