pub mod abstraction;
pub mod agent;
pub mod catalog;
pub mod data;
pub mod embedding;
pub mod grounding;
pub mod harness;
pub mod index;
pub mod llm;
pub mod prompts;
pub mod scene_graph;
pub mod self_query;
pub mod sim;

#[cfg(test)]
mod test_support;
