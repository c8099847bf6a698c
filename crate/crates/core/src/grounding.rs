//! Extraction of the task-relevant subgraph: retrieve entry-point entities
//! for every query term, take the induced subgraph over their union, and
//! show each entity with the attributes its retrieving terms asked for.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::abstraction::{parse_comma_list, Abstraction};
use crate::catalog::AttributeCatalog;
use crate::embedding::EmbedError;
use crate::index::{IndexError, MetadataFilter, RetrievalParams, VectorIndex};
use crate::llm::count_tokens;
use crate::scene_graph::{AttributeView, SceneGraph};

/// A query term contributed by self-query feedback.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedbackTerm {
    pub term: String,
    #[serde(default)]
    pub unlocks: BTreeSet<String>,
    #[serde(default)]
    pub filters: Vec<MetadataFilter>,
}

impl FeedbackTerm {
    pub fn new(term: impl AsRef<str>) -> Self {
        Self {
            term: normalize(term.as_ref()),
            unlocks: BTreeSet::new(),
            filters: Vec::new(),
        }
    }

    pub fn unlock(mut self, attribute: impl Into<String>) -> Self {
        self.unlocks.insert(attribute.into());
        self
    }

    pub fn filter(mut self, filter: MetadataFilter) -> Self {
        self.filters.push(filter);
        self
    }
}

/// Terms that act as entry points into the graph beyond the abstraction's
/// own entities.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct QueryTermSet {
    #[serde(default)]
    pub base_terms: Vec<String>,
    #[serde(default)]
    pub feedback_terms: Vec<FeedbackTerm>,
}

impl QueryTermSet {
    pub fn is_empty(&self) -> bool {
        self.base_terms.is_empty() && self.feedback_terms.is_empty()
    }

    /// First feedback entry for `term`; a term may appear once per filter set.
    pub fn feedback(&self, term: &str) -> Option<&FeedbackTerm> {
        self.feedback_terms.iter().find(|f| f.term == term)
    }
}

/// Same normalization as pre-retrieval replies; multi-word terms keep their
/// inner spaces.
pub fn normalize(term: &str) -> String {
    parse_comma_list(&term.replace(',', " "))
        .into_iter()
        .next()
        .unwrap_or_default()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RetrievedSubgraph {
    pub graph: SceneGraph,
    pub attribute_view: AttributeView,
    /// Entity id to the terms that retrieved it, in query order.
    pub provenance: BTreeMap<String, Vec<String>>,
    pub serialized: String,
    pub token_count: usize,
}

impl RetrievedSubgraph {
    pub fn entity_ids(&self) -> BTreeSet<String> {
        self.graph.entity_ids()
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum GroundingError {
    #[error("entity {0} was not retrieved")]
    NotFound(String),
    #[error(transparent)]
    Index(#[from] IndexError),
}

/// Base terms in query order: abstraction entities, then extra base terms.
fn base_terms(abstraction: &Abstraction, feedback: &QueryTermSet) -> Vec<String> {
    let mut seen = BTreeSet::new();
    abstraction
        .entities
        .iter()
        .chain(&feedback.base_terms)
        .filter(|t| !t.is_empty() && seen.insert(t.as_str()))
        .cloned()
        .collect()
}

fn push_provenance(prov: &mut BTreeMap<String, Vec<String>>, id: &str, term: &str) {
    let terms = prov.entry(id.to_string()).or_default();
    if !terms.iter().any(|t| t == term) {
        terms.push(term.to_string());
    }
}

/// Retrieval step only: entity id to retrieving terms.
pub fn retrieve(
    index: &VectorIndex,
    abstraction: &Abstraction,
    feedback: &QueryTermSet,
    params: &RetrievalParams,
) -> Result<BTreeMap<String, Vec<String>>, GroundingError> {
    params.validate()?;
    let mut provenance = BTreeMap::new();
    let mut run = |term: &str, p: &RetrievalParams| -> Result<(), GroundingError> {
        match index.query(term, p) {
            Ok(hits) => {
                for hit in hits {
                    push_provenance(&mut provenance, &hit.doc_id, term);
                }
                Ok(())
            }
            // A term with no letters or digits retrieves nothing.
            Err(IndexError::UnembeddableQuery(_))
            | Err(IndexError::Embed(EmbedError::EmptyText | EmbedError::Unembeddable(_))) => Ok(()),
            Err(e) => Err(e.into()),
        }
    };
    for term in base_terms(abstraction, feedback) {
        run(&term, params)?;
    }
    for fb in &feedback.feedback_terms {
        if fb.term.is_empty() {
            continue;
        }
        run(&fb.term, &params.with_filters(&fb.filters))?;
    }
    Ok(provenance)
}

/// Attribute names shown for `entity_id`: the union of the subsets of every
/// term that retrieved it, or the whole catalog when that union is empty.
pub fn attribute_view_for(
    entity_id: &str,
    provenance: &BTreeMap<String, Vec<String>>,
    abstraction: &Abstraction,
    feedback: &QueryTermSet,
    catalog: &AttributeCatalog,
) -> Result<BTreeSet<String>, GroundingError> {
    let terms = provenance
        .get(entity_id)
        .ok_or_else(|| GroundingError::NotFound(entity_id.to_string()))?;
    let mut view = BTreeSet::new();
    for term in terms {
        if let Some(subset) = abstraction.attribute_map.get(term) {
            view.extend(subset.iter().cloned());
        }
        for fb in feedback.feedback_terms.iter().filter(|f| &f.term == term) {
            view.extend(fb.unlocks.iter().cloned());
        }
    }
    if view.is_empty() {
        view = catalog.all();
    }
    Ok(view)
}

/// Extraction over one graph/index snapshot. The index is expected to mirror
/// the graph; ids it returns that the graph lacks are dropped by the induced
/// subgraph.
pub fn extract(
    graph: &SceneGraph,
    index: &VectorIndex,
    abstraction: &Abstraction,
    feedback: &QueryTermSet,
    params: &RetrievalParams,
    catalog: &AttributeCatalog,
) -> Result<RetrievedSubgraph, GroundingError> {
    let mut provenance = retrieve(index, abstraction, feedback, params)?;
    let sub = graph.induced_subgraph(provenance.keys().map(String::as_str));
    provenance.retain(|id, _| sub.contains(id));
    let mut attribute_view = AttributeView::new();
    for id in provenance.keys() {
        let view = attribute_view_for(id, &provenance, abstraction, feedback, catalog)?;
        attribute_view.insert(id.clone(), view);
    }
    let serialized = sub.serialize(&attribute_view);
    let token_count = count_tokens(&serialized);
    Ok(RetrievedSubgraph {
        graph: sub,
        attribute_view,
        provenance,
        serialized,
        token_count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::{Embedder, EmbeddingVector};
    use crate::scene_graph::{Edge, Entity};
    use std::sync::Arc;

    fn abstraction(terms: &[(&str, &[&str])]) -> Abstraction {
        Abstraction {
            task: "Cook an egg".into(),
            entities: terms.iter().map(|(t, _)| t.to_string()).collect(),
            attribute_map: terms
                .iter()
                .map(|(t, a)| (t.to_string(), a.iter().map(|s| s.to_string()).collect()))
                .collect(),
        }
    }

    fn mirrored(graph: &SceneGraph) -> VectorIndex {
        let mut idx = VectorIndex::default();
        for e in graph.entities() {
            idx.upsert_document(crate::index::Document::from_entity(e)).unwrap();
        }
        idx
    }

    fn kitchen(extra: usize) -> SceneGraph {
        let mut g = SceneGraph::new();
        g.upsert_entity(
            Entity::new("egg_1", "egg")
                .with_attr("temperature", "RoomTemp")
                .with_attr("breakable", true)
                .with_attr("isCooked", false),
        )
        .unwrap();
        g.upsert_entity(
            Entity::new("pan_1", "pan")
                .with_attr("temperature", "RoomTemp")
                .with_attr("isCooked", false),
        )
        .unwrap();
        g.upsert_edge(Edge::new("egg_1-on-pan_1", "egg_1", "pan_1", "on"))
            .unwrap();
        for i in 0..extra {
            g.upsert_entity(Entity::new(format!("wxyz_{i}"), format!("wxyz{i}")))
                .unwrap();
        }
        g
    }

    #[test]
    fn single_exact_match() {
        let g = kitchen(0);
        let idx = mirrored(&g);
        let abs = abstraction(&[("egg", &["temperature", "breakable"])]);
        let sub = extract(
            &g,
            &idx,
            &abs,
            &QueryTermSet::default(),
            &RetrievalParams::default(),
            &AttributeCatalog::household(),
        )
        .unwrap();
        assert_eq!(sub.entity_ids(), BTreeSet::from(["egg_1".to_string()]));
        assert_eq!(sub.graph.edges().count(), 0);
        assert_eq!(
            sub.serialized,
            r#"{"entities":[{"id":"egg_1","label":"egg","attributes":{"breakable":true,"temperature":"RoomTemp"}}],"edges":[]}"#
        );
        assert_eq!(sub.token_count, count_tokens(&sub.serialized));
    }

    #[test]
    fn pair_with_edge_and_distractors_absent() {
        let g = kitchen(50);
        let idx = mirrored(&g);
        let abs = abstraction(&[("egg", &["temperature"]), ("pan", &["temperature"])]);
        let sub = extract(
            &g,
            &idx,
            &abs,
            &QueryTermSet::default(),
            &RetrievalParams::default(),
            &AttributeCatalog::household(),
        )
        .unwrap();
        assert_eq!(
            sub.entity_ids(),
            BTreeSet::from(["egg_1".to_string(), "pan_1".to_string()])
        );
        assert_eq!(sub.graph.edge_ids(), BTreeSet::from(["egg_1-on-pan_1".to_string()]));
    }

    #[test]
    fn empty_inputs_give_empty_subgraph() {
        let g = kitchen(3);
        let sub = extract(
            &g,
            &mirrored(&g),
            &Abstraction::empty("x"),
            &QueryTermSet::default(),
            &RetrievalParams::default(),
            &AttributeCatalog::household(),
        )
        .unwrap();
        assert!(sub.graph.is_empty());
        assert_eq!(sub.serialized, r#"{"entities":[],"edges":[]}"#);
    }

    #[test]
    fn view_rules() {
        let catalog = AttributeCatalog::household();
        let abs = abstraction(&[("egg", &["temperature", "breakable"]), ("a", &["isCooked"]), ("b", &[])]);
        let fb = QueryTermSet {
            base_terms: vec![],
            feedback_terms: vec![FeedbackTerm::new("c").unlock("isDirty")],
        };
        let prov: BTreeMap<String, Vec<String>> = [
            ("egg_1", vec!["egg"]),
            ("x", vec!["a", "c"]),
            ("y", vec!["b"]),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v.into_iter().map(String::from).collect()))
        .collect();
        let set = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect::<BTreeSet<_>>();
        assert_eq!(
            attribute_view_for("egg_1", &prov, &abs, &fb, &catalog).unwrap(),
            set(&["temperature", "breakable"])
        );
        assert_eq!(
            attribute_view_for("x", &prov, &abs, &fb, &catalog).unwrap(),
            set(&["isCooked", "isDirty"])
        );
        assert_eq!(
            attribute_view_for("y", &prov, &abs, &fb, &catalog).unwrap(),
            catalog.all()
        );
        assert_eq!(
            attribute_view_for("zzz", &prov, &abs, &fb, &catalog),
            Err(GroundingError::NotFound("zzz".into()))
        );
    }

    #[test]
    fn feedback_filters_apply_to_feedback_terms_only() {
        let mut g = SceneGraph::new();
        g.upsert_entity(Entity::new("drawer_1", "drawer").with_attr("isOpen", false))
            .unwrap();
        g.upsert_entity(Entity::new("drawer_2", "drawer").with_attr("isOpen", true))
            .unwrap();
        let idx = mirrored(&g);
        let catalog = AttributeCatalog::household();
        let fb = QueryTermSet {
            base_terms: vec![],
            feedback_terms: vec![FeedbackTerm::new("drawer")
                .unlock("isOpen")
                .filter(MetadataFilter::eq("isOpen", true))],
        };
        let params = RetrievalParams::default();
        let sub = extract(&g, &idx, &Abstraction::empty("t"), &fb, &params, &catalog).unwrap();
        assert_eq!(sub.entity_ids(), BTreeSet::from(["drawer_2".to_string()]));
        assert_eq!(
            sub.serialized,
            r#"{"entities":[{"id":"drawer_2","label":"drawer","attributes":{"isOpen":true}}],"edges":[]}"#
        );

        let abs = abstraction(&[("drawer", &[])]);
        let sub = extract(&g, &idx, &abs, &fb, &params, &catalog).unwrap();
        assert_eq!(sub.entity_ids().len(), 2);
    }

    /// Embeds texts by concept so paraphrases land together; stands in for a
    /// learned sentence embedder.
    struct ConceptEmbedder;

    impl Embedder for ConceptEmbedder {
        fn embed(&self, text: &str) -> Result<EmbeddingVector, EmbedError> {
            let t = text.to_lowercase();
            let mut v = vec![0.0; 4];
            if ["flip", "spatula", "turner"].iter().any(|w| t.contains(w)) {
                v[0] = 1.0;
            }
            if t.contains("egg") {
                v[1] = 1.0;
            }
            if t.contains("utensil") {
                v[0] += 0.5;
                v[2] = 0.2;
            }
            if v.iter().all(|x| *x == 0.0) {
                v[3] = 1.0;
            }
            Ok(EmbeddingVector::from_raw(v))
        }

        fn name(&self) -> String {
            "concept".into()
        }
    }

    #[test]
    fn feedback_term_adds_flipping_utensils() {
        let mut g = SceneGraph::new();
        for (id, label) in [("egg_1", "egg"), ("spatula_1", "spatula"), ("turner_1", "turner"), ("plate_1", "plate")] {
            g.upsert_entity(Entity::new(id, label)).unwrap();
        }
        let mut idx = VectorIndex::new(Arc::new(ConceptEmbedder));
        for e in g.entities() {
            idx.upsert_document(crate::index::Document::from_entity(e)).unwrap();
        }
        let abs = abstraction(&[("egg", &["temperature"])]);
        let catalog = AttributeCatalog::household();
        let params = RetrievalParams::default();
        let before = extract(&g, &idx, &abs, &QueryTermSet::default(), &params, &catalog).unwrap();
        assert_eq!(before.entity_ids(), BTreeSet::from(["egg_1".to_string()]));

        let fb = QueryTermSet {
            base_terms: vec![],
            feedback_terms: vec![FeedbackTerm::new("utensil for flipping")],
        };
        let after = extract(&g, &idx, &abs, &fb, &params, &catalog).unwrap();
        let want: BTreeSet<String> = ["egg_1", "spatula_1", "turner_1"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        assert_eq!(after.entity_ids(), want);
    }

    #[test]
    fn extraction_is_repeatable() {
        let g = kitchen(20);
        let idx = mirrored(&g);
        let abs = abstraction(&[("egg", &["temperature"]), ("pan", &[])]);
        let run = || {
            extract(
                &g,
                &idx,
                &abs,
                &QueryTermSet::default(),
                &RetrievalParams::default(),
                &AttributeCatalog::household(),
            )
            .unwrap()
            .serialized
        };
        assert_eq!(run(), run());
    }
}
