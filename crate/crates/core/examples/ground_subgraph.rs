//! Ground a task in a simulated kitchen cluttered with 1135 distractors:
//! retrieve entry points for each abstraction term and compare the induced
//! subgraph with the whole graph.
//!
//!     cargo run --example ground_subgraph

use subgraph_rag::abstraction::build_abstraction;
use subgraph_rag::catalog::AttributeCatalog;
use subgraph_rag::data;
use subgraph_rag::grounding::{extract, QueryTermSet};
use subgraph_rag::index::{RetrievalParams, VectorIndex};
use subgraph_rag::llm::{count_tokens, ScriptedChat};
use subgraph_rag::scene_graph::SceneGraph;
use subgraph_rag::sim::{default_vocabulary, inject_distractors, observe_graph, World};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let task = data::task("easy_02").expect("bundled");
    let scene = data::scene(&task.scene).expect("bundled");
    let catalog = AttributeCatalog::household();

    let mut world = World::new(&scene, 0)?;
    inject_distractors(&mut world, &default_vocabulary(), 1135, 0);
    let mut graph = SceneGraph::with_catalog(catalog.clone());
    let mut index = VectorIndex::default();
    index.apply_graph_deltas(&observe_graph(&world, &mut graph)?)?;

    let llm = ScriptedChat::new(task.solution.as_ref().unwrap().script())?;
    let (abstraction, _) = build_abstraction(&task.text, &catalog, &llm)?;
    println!("task: {}\nterms: {:?}\n", task.text, abstraction.entities);

    let sub = extract(&graph, &index, &abstraction, &QueryTermSet::default(), &RetrievalParams::default(), &catalog)?;
    for (id, terms) in &sub.provenance {
        println!("{id:>16} <- {}", terms.join(", "));
    }
    let full = graph.serialize_full();
    println!(
        "\nsubgraph: {} entities, {} edges, {} tokens\nfull graph: {} entities, {} tokens ({:.1}x larger)",
        sub.graph.len(),
        sub.graph.edges().count(),
        sub.token_count,
        graph.len(),
        count_tokens(&full),
        count_tokens(&full) as f64 / sub.token_count.max(1) as f64
    );
    println!("\n{}", sub.serialized);
    Ok(())
}
