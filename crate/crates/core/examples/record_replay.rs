//! Record every planner exchange of an episode, then rerun it from the
//! recording alone and check that nothing but latency changed.
//!
//!     cargo run --example record_replay

use std::sync::Arc;

use subgraph_rag::agent::AgentMode;
use subgraph_rag::data;
use subgraph_rag::embedding::TrigramEmbedder;
use subgraph_rag::harness::{run_episode, EpisodeConfig};
use subgraph_rag::llm::{RecordingChat, ReplayChat, ScriptedChat};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let task = data::task("easy_15").expect("bundled");
    let scene = data::scene(&task.scene).expect("bundled");
    let config = EpisodeConfig::new(AgentMode::EragFeedback).distractors(200).seed(9);
    let embedder = Arc::new(TrigramEmbedder::default());

    let live = RecordingChat::new(ScriptedChat::new(task.solution.as_ref().unwrap().script())?);
    let first = run_episode(&scene, &task, &config, &live, embedder.clone())?;
    let records = live.records();
    println!("recorded {} exchanges; first request hash {}", records.len(), &records[0].request_hash[..16]);

    let replay = ReplayChat::from_records(records);
    let second = run_episode(&scene, &task, &config, &replay, embedder)?;
    println!("steps identical:  {}", first.steps == second.steps);
    println!("result identical: {}", first.result.without_latency() == second.result.without_latency());
    println!("log identical:    {}", first.comparable_log() == second.comparable_log());
    println!("latency: {:.3} ms/step live, {:.3} ms/step replayed",
        first.result.avg_step_latency_s * 1e3, second.result.avg_step_latency_s * 1e3);
    Ok(())
}
