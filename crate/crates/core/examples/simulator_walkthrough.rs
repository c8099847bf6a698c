//! Drive the household simulator by hand through the credit-card task,
//! including the failed placement on a closed drawer.
//!
//!     cargo run --example simulator_walkthrough

use subgraph_rag::data;
use subgraph_rag::sim::{rebuild_graph, World};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let task = data::task("easy_02").expect("bundled");
    let scene = data::scene(&task.scene).expect("bundled");
    let mut world = World::new(&scene, 0)?;
    println!("{}: {}\nstart room {}, {} objects discovered\n", scene.id, task.text, world.agent.room, world.discovered_ids().len());

    for step in &task.solution.as_ref().unwrap().steps {
        let r = world.step(&step.action, &step.input);
        println!(
            "{:>3} {:<24} {} {}",
            world.tick,
            format!("{}({})", step.action, step.input),
            if r.ok { "ok  " } else { "FAIL" },
            r.message
        );
        assert!(world.invariant_violations().is_empty());
    }
    println!("\ngoal met: {}", task.goal.check(&world));
    let g = rebuild_graph(&world);
    println!("graph mirror: {} entities, {} edges", g.len(), g.edges().count());
    Ok(())
}
