//! Keeps a scene graph in step with what the agent has discovered.

use crate::catalog::AttributeCatalog;
use crate::scene_graph::{Edge, Entity, GraphDelta, GraphError, SceneGraph};

use super::World;

/// The graph the world currently implies: every discovered object with its
/// attributes, every phantom, and a containment edge wherever both ends are
/// discovered.
pub fn rebuild_graph(world: &World) -> SceneGraph {
    let mut g = SceneGraph::with_catalog(AttributeCatalog::household());
    g.set_tick(world.tick);
    for o in world.objects.values().filter(|o| o.discovered) {
        g.upsert_entity(Entity {
            id: o.id.clone(),
            label: o.class.clone(),
            attributes: o.state.to_attributes(),
            last_updated: 0,
        })
        .expect("world objects are valid entities");
    }
    for p in world.phantoms() {
        g.upsert_entity(p.clone())
            .expect("phantoms are valid entities");
    }
    for o in world.objects.values().filter(|o| o.discovered) {
        if let Some((parent, rel)) = &o.parent {
            if g.contains(parent) {
                g.upsert_edge(Edge::new(
                    format!("{}-{}-{}", o.id, rel.as_str(), parent),
                    o.id.clone(),
                    parent.clone(),
                    rel.as_str(),
                ))
                .expect("both endpoints present");
            }
        }
    }
    g
}

/// Brings `graph` up to date with the world and returns the changes made,
/// removals first.
pub fn observe_graph(world: &World, graph: &mut SceneGraph) -> Result<Vec<GraphDelta>, GraphError> {
    let target = rebuild_graph(world);
    graph.set_tick(world.tick);
    let mut deltas = Vec::new();

    let stale_edges: Vec<String> = graph
        .edges()
        .filter(|e| target.edge(&e.id) != Some(*e))
        .map(|e| e.id.clone())
        .collect();
    for id in stale_edges {
        deltas.push(graph.remove_edge(&id)?);
    }
    let gone: Vec<String> = graph
        .entities()
        .filter(|e| !target.contains(&e.id))
        .map(|e| e.id.clone())
        .collect();
    for id in gone {
        deltas.push(graph.remove_entity(&id)?);
    }
    for e in target.entities() {
        let changed = graph
            .entity(&e.id)
            .is_none_or(|old| old.label != e.label || old.attributes != e.attributes);
        if changed {
            deltas.push(graph.upsert_entity(e.clone())?);
        }
    }
    for e in target.edges() {
        if graph.edge(&e.id) != Some(e) {
            deltas.push(graph.upsert_edge(e.clone())?);
        }
    }
    Ok(deltas)
}
