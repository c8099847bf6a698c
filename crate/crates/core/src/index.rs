//! Document vector store over scene-graph entities.
//!
//! Every entity becomes one document: its label is the page content and its
//! attributes are the metadata. Search is exhaustive cosine scan, which keeps
//! results exactly reproducible at the sizes this crate targets.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embedding::{EmbedError, Embedder, EmbeddingVector, TrigramEmbedder};
use crate::scene_graph::{AttrValue, Attributes, Entity, GraphDelta};

pub const DEFAULT_K: usize = 5;
pub const DEFAULT_THRESHOLD: f64 = 0.35;

#[derive(Debug, Error, PartialEq)]
pub enum IndexError {
    #[error(transparent)]
    Embed(#[from] EmbedError),
    #[error("invalid document: {0}")]
    InvalidDocument(String),
    #[error("invalid retrieval parameters: {0}")]
    InvalidParams(String),
    #[error("query text {0:?} cannot be embedded")]
    UnembeddableQuery(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    pub doc_id: String,
    pub page_content: String,
    pub metadata: Attributes,
}

impl Document {
    pub fn from_entity(entity: &Entity) -> Self {
        Self {
            doc_id: entity.id.clone(),
            page_content: entity.label.clone(),
            metadata: entity.attributes.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Comparator {
    Eq,
    Neq,
}

impl fmt::Display for Comparator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Comparator::Eq => "eq",
            Comparator::Neq => "neq",
        })
    }
}

/// `attribute <comparator> value` over document metadata. A missing
/// attribute never equals anything, so it fails `eq` and passes `neq`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetadataFilter {
    pub attribute: String,
    pub comparator: Comparator,
    pub value: AttrValue,
}

impl MetadataFilter {
    pub fn eq(attribute: impl Into<String>, value: impl Into<AttrValue>) -> Self {
        Self {
            attribute: attribute.into(),
            comparator: Comparator::Eq,
            value: value.into(),
        }
    }

    pub fn neq(attribute: impl Into<String>, value: impl Into<AttrValue>) -> Self {
        Self {
            attribute: attribute.into(),
            comparator: Comparator::Neq,
            value: value.into(),
        }
    }

    pub fn matches(&self, metadata: &Attributes) -> bool {
        let equal = metadata.get(&self.attribute) == Some(&self.value);
        match self.comparator {
            Comparator::Eq => equal,
            Comparator::Neq => !equal,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrievalParams {
    pub k: usize,
    pub threshold: f64,
    #[serde(default)]
    pub metadata_filter: Vec<MetadataFilter>,
}

impl Default for RetrievalParams {
    fn default() -> Self {
        Self {
            k: DEFAULT_K,
            threshold: DEFAULT_THRESHOLD,
            metadata_filter: Vec::new(),
        }
    }
}

impl RetrievalParams {
    pub fn new(k: usize, threshold: f64) -> Self {
        Self {
            k,
            threshold,
            metadata_filter: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<(), IndexError> {
        if self.k == 0 {
            return Err(IndexError::InvalidParams("k must be at least 1".into()));
        }
        if !(-1.0..=1.0).contains(&self.threshold) {
            return Err(IndexError::InvalidParams(format!(
                "threshold {} outside [-1, 1]",
                self.threshold
            )));
        }
        Ok(())
    }

    /// Same k and threshold with extra filters appended.
    pub fn with_filters(&self, extra: &[MetadataFilter]) -> Self {
        let mut p = self.clone();
        p.metadata_filter.extend_from_slice(extra);
        p
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hit {
    pub doc_id: String,
    pub similarity: f64,
}

/// Descending similarity, then ascending id.
pub fn rank_order(a: &Hit, b: &Hit) -> Ordering {
    b.similarity
        .total_cmp(&a.similarity)
        .then_with(|| a.doc_id.cmp(&b.doc_id))
}

#[derive(Debug, Clone, PartialEq)]
pub struct StoredDocument {
    pub document: Document,
    pub vector: EmbeddingVector,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpsertOutcome {
    /// New document, or its page content changed.
    Embedded,
    /// Content unchanged; only metadata was replaced.
    MetadataOnly,
}

#[derive(Clone)]
pub struct VectorIndex {
    embedder: Arc<dyn Embedder>,
    dim: Option<usize>,
    docs: BTreeMap<String, StoredDocument>,
}

impl fmt::Debug for VectorIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("VectorIndex")
            .field("embedder", &self.embedder.name())
            .field("dim", &self.dim)
            .field("docs", &self.docs.len())
            .finish()
    }
}

impl Default for VectorIndex {
    fn default() -> Self {
        Self::new(Arc::new(TrigramEmbedder::default()))
    }
}

impl VectorIndex {
    pub fn new(embedder: Arc<dyn Embedder>) -> Self {
        Self {
            embedder,
            dim: None,
            docs: BTreeMap::new(),
        }
    }

    pub fn embedder(&self) -> &Arc<dyn Embedder> {
        &self.embedder
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn get(&self, doc_id: &str) -> Option<&StoredDocument> {
        self.docs.get(doc_id)
    }

    pub fn doc_ids(&self) -> BTreeSet<String> {
        self.docs.keys().cloned().collect()
    }

    fn check_dim(&mut self, v: &EmbeddingVector) -> Result<(), IndexError> {
        match self.dim {
            None => {
                self.dim = Some(v.dim());
                Ok(())
            }
            Some(d) if d == v.dim() => Ok(()),
            Some(d) => Err(EmbedError::Dimension {
                expected: d,
                got: v.dim(),
            }
            .into()),
        }
    }

    /// Stores `doc`, re-embedding only when its page content changed.
    pub fn upsert_document(&mut self, doc: Document) -> Result<UpsertOutcome, IndexError> {
        if doc.doc_id.is_empty() {
            return Err(IndexError::InvalidDocument("empty doc_id".into()));
        }
        if doc.page_content.trim().is_empty() {
            return Err(IndexError::InvalidDocument(format!(
                "{} has empty page content",
                doc.doc_id
            )));
        }
        if let Some(existing) = self.docs.get_mut(&doc.doc_id) {
            if existing.document.page_content == doc.page_content {
                existing.document.metadata = doc.metadata;
                return Ok(UpsertOutcome::MetadataOnly);
            }
        }
        let vector = self.embedder.embed(&doc.page_content)?;
        self.check_dim(&vector)?;
        self.docs.insert(
            doc.doc_id.clone(),
            StoredDocument {
                document: doc,
                vector,
            },
        );
        Ok(UpsertOutcome::Embedded)
    }

    pub fn remove_document(&mut self, doc_id: &str) -> bool {
        self.docs.remove(doc_id).is_some()
    }

    /// Top-k documents by cosine similarity to `text` that clear the
    /// threshold and every metadata filter.
    pub fn query(&self, text: &str, params: &RetrievalParams) -> Result<Vec<Hit>, IndexError> {
        params.validate()?;
        let q = self.embedder.embed(text)?;
        if q.is_unembeddable() {
            return Err(IndexError::UnembeddableQuery(text.to_string()));
        }
        self.query_vector(&q, params)
    }

    pub fn query_vector(
        &self,
        q: &EmbeddingVector,
        params: &RetrievalParams,
    ) -> Result<Vec<Hit>, IndexError> {
        params.validate()?;
        if let Some(d) = self.dim {
            if d != q.dim() {
                return Err(EmbedError::Dimension {
                    expected: d,
                    got: q.dim(),
                }
                .into());
            }
        }
        let mut hits: Vec<Hit> = self
            .docs
            .values()
            .filter(|s| !s.vector.is_unembeddable())
            .filter_map(|s| {
                let similarity = q.cosine(&s.vector);
                (similarity >= params.threshold
                    && params
                        .metadata_filter
                        .iter()
                        .all(|f| f.matches(&s.document.metadata)))
                .then(|| Hit {
                    doc_id: s.document.doc_id.clone(),
                    similarity,
                })
            })
            .collect();
        hits.sort_by(rank_order);
        hits.truncate(params.k);
        Ok(hits)
    }

    /// Mirrors one scene-graph mutation.
    pub fn apply_graph_delta(&mut self, delta: &GraphDelta) -> Result<(), IndexError> {
        match delta {
            GraphDelta::EntityAdded(e) | GraphDelta::EntityUpdated { entity: e, .. } => {
                self.upsert_document(Document::from_entity(e))?;
            }
            GraphDelta::EntityRemoved { id, .. } => {
                self.remove_document(id);
            }
            GraphDelta::EdgeUpserted(_) | GraphDelta::EdgeRemoved { .. } => {}
        }
        Ok(())
    }

    pub fn apply_graph_deltas<'a, I>(&mut self, deltas: I) -> Result<(), IndexError>
    where
        I: IntoIterator<Item = &'a GraphDelta>,
    {
        deltas.into_iter().try_for_each(|d| self.apply_graph_delta(d))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene_graph::SceneGraph;

    fn doc(id: &str, label: &str) -> Document {
        Document {
            doc_id: id.into(),
            page_content: label.into(),
            metadata: Attributes::new(),
        }
    }

    #[test]
    fn empty_index_returns_nothing() {
        let idx = VectorIndex::default();
        assert!(idx.query("egg", &RetrievalParams::default()).unwrap().is_empty());
    }

    #[test]
    fn exact_label_ranks_first() {
        let mut idx = VectorIndex::default();
        for (id, label) in [("egg_1", "egg"), ("pan_1", "pan"), ("eggplant_1", "eggplant")] {
            idx.upsert_document(doc(id, label)).unwrap();
        }
        let hits = idx.query("egg", &RetrievalParams::default()).unwrap();
        assert_eq!(hits[0].doc_id, "egg_1");
        assert_eq!(hits[0].similarity, 1.0);
    }

    #[test]
    fn max_threshold_without_exact_match_is_empty() {
        let mut idx = VectorIndex::default();
        idx.upsert_document(doc("eggs_1", "eggs")).unwrap();
        let hits = idx.query("egg", &RetrievalParams::new(5, 1.0)).unwrap();
        assert!(hits.is_empty());
    }

    #[test]
    fn params_validated() {
        let idx = VectorIndex::default();
        assert!(idx.query("egg", &RetrievalParams::new(0, 0.3)).is_err());
        assert!(idx.query("egg", &RetrievalParams::new(3, 1.5)).is_err());
        assert!(matches!(
            idx.query("...", &RetrievalParams::default()),
            Err(IndexError::UnembeddableQuery(_))
        ));
    }

    #[test]
    fn metadata_only_update_keeps_vector() {
        let mut idx = VectorIndex::default();
        idx.upsert_document(doc("egg_1", "egg")).unwrap();
        let before = idx.get("egg_1").unwrap().vector.clone();
        let mut d = doc("egg_1", "egg");
        d.metadata.insert("temperature".into(), "Hot".into());
        assert_eq!(idx.upsert_document(d).unwrap(), UpsertOutcome::MetadataOnly);
        let after = idx.get("egg_1").unwrap();
        assert_eq!(after.vector, before);
        assert_eq!(after.document.metadata["temperature"], AttrValue::from("Hot"));
    }

    #[test]
    fn cardinality_with_distractors() {
        let mut idx = VectorIndex::default();
        for i in 0..1135 {
            idx.upsert_document(doc(&format!("truss_{i}"), "truss")).unwrap();
        }
        idx.upsert_document(doc("egg_1", "egg")).unwrap();
        assert_eq!(idx.len(), 1136);
    }

    #[test]
    fn metadata_filters_apply() {
        let mut idx = VectorIndex::default();
        let mut open = doc("drawer_1", "drawer");
        open.metadata.insert("isOpen".into(), true.into());
        let mut closed = doc("drawer_2", "drawer");
        closed.metadata.insert("isOpen".into(), false.into());
        idx.upsert_document(open).unwrap();
        idx.upsert_document(closed).unwrap();
        idx.upsert_document(doc("drawer_3", "drawer")).unwrap();

        let p = RetrievalParams::default().with_filters(&[MetadataFilter::eq("isOpen", true)]);
        let ids: Vec<_> = idx.query("drawer", &p).unwrap().into_iter().map(|h| h.doc_id).collect();
        assert_eq!(ids, ["drawer_1"]);

        let p = RetrievalParams::default().with_filters(&[MetadataFilter::neq("isOpen", true)]);
        let ids: Vec<_> = idx.query("drawer", &p).unwrap().into_iter().map(|h| h.doc_id).collect();
        assert_eq!(ids, ["drawer_2", "drawer_3"]);
    }

    #[test]
    fn ties_break_by_id() {
        let mut idx = VectorIndex::default();
        for id in ["cup_3", "cup_1", "cup_2"] {
            idx.upsert_document(doc(id, "cup")).unwrap();
        }
        let ids: Vec<_> = idx
            .query("cup", &RetrievalParams::new(2, 0.0))
            .unwrap()
            .into_iter()
            .map(|h| h.doc_id)
            .collect();
        assert_eq!(ids, ["cup_1", "cup_2"]);
    }

    #[test]
    fn graph_deltas_keep_index_in_sync() {
        let mut g = SceneGraph::new();
        let mut idx = VectorIndex::default();
        let d = g.upsert_entity(Entity::new("egg_1", "egg")).unwrap();
        idx.apply_graph_delta(&d).unwrap();
        assert_eq!(
            idx.query("egg", &RetrievalParams::default()).unwrap()[0].doc_id,
            "egg_1"
        );

        let before = idx.get("egg_1").unwrap().vector.clone();
        let d = g
            .upsert_entity(Entity::new("egg_1", "egg").with_attr("isCooked", true))
            .unwrap();
        idx.apply_graph_delta(&d).unwrap();
        assert_eq!(idx.get("egg_1").unwrap().vector, before);
        assert_eq!(
            idx.get("egg_1").unwrap().document.metadata["isCooked"],
            AttrValue::Bool(true)
        );

        let d = g.remove_entity("egg_1").unwrap();
        idx.apply_graph_delta(&d).unwrap();
        assert!(idx.query("egg", &RetrievalParams::default()).unwrap().is_empty());
        assert_eq!(idx.doc_ids(), g.entity_ids());
    }
}
