//! Run one episode against an OpenAI-compatible chat endpoint, recording the
//! exchanges so the episode can be replayed offline later.
//!
//!     SGRAG_LLM_ENDPOINT=http://localhost:11434/v1/chat/completions \
//!     SGRAG_LLM_MODEL=llama3.1 cargo run --example remote_gateway [task_id] [variant]
//!
//! The bearer token is read from the variable named by SGRAG_LLM_API_KEY_ENV
//! (default OPENAI_API_KEY) when it is set.

use std::sync::Arc;

use subgraph_rag::agent::AgentMode;
use subgraph_rag::data;
use subgraph_rag::embedding::TrigramEmbedder;
use subgraph_rag::harness::{run_episode, EpisodeConfig};
use subgraph_rag::llm::{BackendKind, GatewayConfig, RecordingChat};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    if std::env::var_os("SGRAG_LLM_ENDPOINT").is_none() {
        eprintln!("set SGRAG_LLM_ENDPOINT (and SGRAG_LLM_MODEL) to an OpenAI-compatible chat endpoint");
        return Ok(());
    }
    let mut args = std::env::args().skip(1);
    let task = data::resolve_task(&args.next().unwrap_or_else(|| "easy_02".into()))?;
    let mode: AgentMode = args.next().map_or(Ok(AgentMode::EragStrict), |s| s.parse())?;
    let scene = data::resolve_scene(&task.scene)?;

    let mut gateway = GatewayConfig {
        backend: BackendKind::Remote,
        ..GatewayConfig::default()
    };
    gateway.apply_env()?;
    let store = std::env::temp_dir().join(format!("sgrag_{}_{}.jsonl", task.id, mode.as_str()));
    let llm = RecordingChat::to_file(gateway.build()?, &store)?;
    let ep = run_episode(&scene, &task, &EpisodeConfig::new(mode), &llm, Arc::new(TrigramEmbedder::default()))?;
    print!("{}", ep.log_jsonl());
    println!("\nreplay store: {}", store.display());
    println!(
        "replay with: sgrag replay --store {} --task {} --variant {}",
        store.display(),
        task.id,
        mode.as_str()
    );
    Ok(())
}
