//! Build a small scene graph, mirror it into the vector index and query it,
//! with and without a metadata filter.
//!
//!     cargo run --example index_scene_graph

use subgraph_rag::index::{MetadataFilter, RetrievalParams, VectorIndex};
use subgraph_rag::scene_graph::{Edge, Entity, SceneGraph};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut graph = SceneGraph::new();
    let mut index = VectorIndex::default();
    let entities = [
        Entity::new("egg_1", "egg").with_attr("isCooked", false).with_attr("temperature", "RoomTemp"),
        Entity::new("pan_1", "pan").with_attr("isCooked", false).with_attr("temperature", "Hot"),
        Entity::new("frying_pan_1", "frying pan").with_attr("temperature", "RoomTemp"),
        Entity::new("stove_1", "stove burner").with_attr("isToggled", true),
        Entity::new("fridge_1", "fridge").with_attr("isOpen", false),
    ];
    for e in entities {
        let delta = graph.upsert_entity(e)?;
        index.apply_graph_delta(&delta)?;
    }
    index.apply_graph_delta(&graph.upsert_edge(Edge::new("egg_1-in-pan_1", "egg_1", "pan_1", "in"))?)?;
    println!("{} entities indexed\n", index.len());

    let params = RetrievalParams::default();
    for q in ["pan", "egg", "burner", "skillet"] {
        let hits = index.query(q, &params)?;
        let shown: Vec<String> = hits.iter().map(|h| format!("{} ({:.3})", h.doc_id, h.similarity)).collect();
        println!("{q:>8}: {}", if shown.is_empty() { "-".into() } else { shown.join(", ") });
    }

    let hot = params.with_filters(&[MetadataFilter::eq("temperature", "Hot")]);
    let hits = index.query("pan", &hot)?;
    println!("\n'pan' where temperature == Hot: {:?}", hits.iter().map(|h| &h.doc_id).collect::<Vec<_>>());

    // an attribute-only change keeps the stored vector
    let before = index.get("pan_1").unwrap().vector.clone();
    let updated = Entity::new("pan_1", "pan").with_attr("temperature", "RoomTemp");
    index.apply_graph_delta(&graph.upsert_entity(updated)?)?;
    assert_eq!(before, index.get("pan_1").unwrap().vector);
    println!("after cooling, hot pans: {}", index.query("pan", &hot)?.len());

    let removed = graph.remove_entity("egg_1")?;
    index.apply_graph_delta(&removed)?;
    println!("after removing egg_1: {} edges left, {} docs", graph.edges().count(), index.len());
    Ok(())
}
