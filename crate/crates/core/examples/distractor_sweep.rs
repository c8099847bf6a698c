//! Cumulative observation tokens as distractors grow: the full-graph
//! baseline scales with the clutter, strict retrieval stays flat. Runs the
//! suite runner over the easy tasks.
//!
//!     cargo run --release --example distractor_sweep

use std::sync::Arc;

use subgraph_rag::agent::AgentMode;
use subgraph_rag::data;
use subgraph_rag::embedding::TrigramEmbedder;
use subgraph_rag::harness::{run_suite, SuiteConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tasks = data::select_tasks("easy")?;
    let mut config = SuiteConfig::new(vec![AgentMode::FullMem, AgentMode::EragStrict], tasks, data::scenes());
    config.distractor_levels = vec![0, 100, 290, 600, 1135];
    config.parallelism = std::thread::available_parallelism().map_or(1, |n| n.get());
    let outcome = run_suite(&config, Arc::new(TrigramEmbedder::default()))?;
    print!("{}", outcome.summary.render());

    println!("\ntokens relative to 0 distractors:");
    for mode in [AgentMode::FullMem, AgentMode::EragStrict] {
        let base = outcome.summary.group(mode, 0).and_then(|g| g.cumulative_tokens).map_or(1.0, |s| s.mean);
        let row: Vec<String> = config
            .distractor_levels
            .iter()
            .map(|&n| {
                let m = outcome.summary.group(mode, n).and_then(|g| g.cumulative_tokens).map_or(0.0, |s| s.mean);
                format!("{n}: {:.2}x", m / base)
            })
            .collect();
        println!("{:<12} {}", mode.as_str(), row.join("  "));
    }
    Ok(())
}
