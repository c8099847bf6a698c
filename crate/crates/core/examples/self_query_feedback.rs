//! A planner thought becomes a structured query whose terms and filters
//! widen the next extraction.
//!
//!     cargo run --example self_query_feedback

use subgraph_rag::abstraction::Abstraction;
use subgraph_rag::catalog::AttributeCatalog;
use subgraph_rag::grounding::{extract, QueryTermSet};
use subgraph_rag::index::{RetrievalParams, VectorIndex};
use subgraph_rag::llm::{Script, ScriptRule, ScriptedChat};
use subgraph_rag::scene_graph::{Entity, SceneGraph};
use subgraph_rag::self_query::{generate_query, merge_feedback};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let catalog = AttributeCatalog::household();
    let mut graph = SceneGraph::with_catalog(catalog.clone());
    let mut index = VectorIndex::default();
    for e in [
        Entity::new("egg_1", "egg").with_attr("isCooked", false),
        Entity::new("pan_1", "pan").with_attr("temperature", "Hot"),
        Entity::new("spatula_1", "spatula").with_attr("isDirty", true),
        Entity::new("spatula_2", "spatula").with_attr("isDirty", false),
        Entity::new("plate_1", "plate"),
    ] {
        index.apply_graph_delta(&graph.upsert_entity(e)?)?;
    }
    let abstraction = Abstraction {
        task: "Cook an egg".into(),
        entities: vec!["egg".into(), "pan".into()],
        attribute_map: Default::default(),
    };
    let params = RetrievalParams::default();
    let before = extract(&graph, &index, &abstraction, &QueryTermSet::default(), &params, &catalog)?;
    println!("before feedback: {:?}", before.entity_ids());

    let mut script = Script::default();
    script.push(ScriptRule::new(
        "Structured Request:",
        r#"```json
{"terms": ["spatula"], "filters": [["isDirty", "eq", false]], "unlocks": ["isDirty"]}
```"#,
    ));
    let llm = ScriptedChat::new(script)?;
    let thought = "The egg is cooking, I need a clean utensil to flip it";
    let q = generate_query(thought, &catalog, &llm)?;
    println!("thought: {thought}\nquery: {q:?}");

    let feedback = merge_feedback(&QueryTermSet::default(), &q);
    let after = extract(&graph, &index, &abstraction, &feedback, &params, &catalog)?;
    println!("after feedback:  {:?}", after.entity_ids());
    println!("spatula_2 shows: {:?}", after.attribute_view["spatula_2"]);
    assert!(after.entity_ids().is_superset(&before.entity_ids()));
    Ok(())
}
