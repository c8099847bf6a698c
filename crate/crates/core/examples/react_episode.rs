//! One full episode per agent variant on the same task, printing the step
//! log of the strict retrieval variant and a comparison line for each.
//!
//!     cargo run --example react_episode [task_id]

use subgraph_rag::agent::AgentMode;
use subgraph_rag::data;
use subgraph_rag::embedding::TrigramEmbedder;
use subgraph_rag::harness::{run_episode, EpisodeConfig, LogRecord};
use subgraph_rag::llm::ScriptedChat;
use std::sync::Arc;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let id = std::env::args().nth(1).unwrap_or_else(|| "hard_01".into());
    let task = data::resolve_task(&id)?;
    let scene = data::resolve_scene(&task.scene)?;
    println!("{}: {}\n", task.id, task.text);
    for mode in AgentMode::ALL {
        let llm = ScriptedChat::new(task.solution.as_ref().ok_or("task has no solution")?.script())?;
        let config = EpisodeConfig::new(mode).distractors(290);
        let ep = run_episode(&scene, &task, &config, &llm, Arc::new(TrigramEmbedder::default()))?;
        if mode == AgentMode::EragStrict {
            for r in &ep.log {
                if let LogRecord::Step(s) = r {
                    println!(
                        "{:>2} {:<30} {:>3} ents {:>5} tok  {}",
                        s.step,
                        format!("{}({})", s.action, s.input),
                        s.retrieved,
                        s.observation_tokens,
                        s.message
                    );
                }
            }
            println!();
        }
        let r = &ep.result;
        println!(
            "{:<14} success={} steps={} tokens={} llm_calls={} failure={}",
            mode.as_str(),
            r.success,
            r.steps,
            r.cumulative_observation_tokens,
            r.llm_calls,
            r.failure_mode.as_str()
        );
    }
    Ok(())
}
