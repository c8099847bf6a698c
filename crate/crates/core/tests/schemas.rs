//! Bundled data and files the harness writes validate against docs/schemas.

use std::path::{Path, PathBuf};

use serde_json::Value;
use subgraph_rag::agent::AgentMode;
use subgraph_rag::data;
use subgraph_rag::harness::{run_episode, EpisodeConfig, HarnessConfig};
use subgraph_rag::llm::{RecordingChat, ScriptedChat};
use subgraph_rag::sim::World;

mod common;

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn validator(name: &str) -> jsonschema::Validator {
    let dir = root().join("docs/schemas");
    let load = |n: &str| -> Value {
        serde_json::from_str(&std::fs::read_to_string(dir.join(n)).unwrap()).unwrap()
    };
    jsonschema::options()
        .with_retriever(Local(dir.clone()))
        .build(&load(name))
        .unwrap_or_else(|e| panic!("{name}: {e}"))
}

#[derive(Clone)]
struct Local(PathBuf);

impl jsonschema::Retrieve for Local {
    fn retrieve(
        &self,
        uri: &jsonschema::Uri<String>,
    ) -> Result<Value, Box<dyn std::error::Error + Send + Sync>> {
        let file = uri.path().as_str().rsplit('/').next().unwrap_or_default().to_string();
        Ok(serde_json::from_str(&std::fs::read_to_string(self.0.join(file))?)?)
    }
}

fn check(v: &jsonschema::Validator, what: &str, value: &Value) {
    let errors: Vec<String> = v.iter_errors(value).map(|e| format!("{} at {}", e, e.instance_path)).collect();
    assert!(errors.is_empty(), "{what}: {errors:?}");
}

fn json_files(dir: &Path) -> Vec<PathBuf> {
    let mut out: Vec<PathBuf> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    out.sort();
    out
}

#[test]
fn bundled_scenes_and_tasks_validate() {
    let scene = validator("scene.schema.json");
    let task = validator("task.schema.json");
    for p in json_files(&root().join("data/scenes")) {
        check(&scene, &p.display().to_string(), &serde_json::from_str(&std::fs::read_to_string(&p).unwrap()).unwrap());
    }
    for p in json_files(&root().join("data/tasks")) {
        check(&task, &p.display().to_string(), &serde_json::from_str(&std::fs::read_to_string(&p).unwrap()).unwrap());
    }
}

#[test]
fn episode_outputs_validate() {
    let result = validator("result.schema.json");
    let log = validator("log.schema.json");
    let replay = validator("replay.schema.json");
    let script = validator("script.schema.json");
    for id in ["easy_02", "hard_07"] {
        let task = data::task(id).unwrap();
        let scene = data::scene(&task.scene).unwrap();
        let rules = task.solution.as_ref().unwrap().script();
        check(&script, id, &serde_json::to_value(&rules).unwrap());
        let llm = RecordingChat::new(ScriptedChat::new(rules).unwrap());
        let config = EpisodeConfig::new(AgentMode::EragFeedback).distractors(20);
        let ep = run_episode(&scene, &task, &config, &llm, common::embedder()).unwrap();
        check(&result, id, &serde_json::to_value(&ep.result).unwrap());
        for line in ep.log_jsonl().lines() {
            check(&log, id, &serde_json::from_str(line).unwrap());
        }
        for rec in llm.records() {
            check(&replay, id, &serde_json::to_value(&rec).unwrap());
        }
    }
}

#[test]
fn snapshots_validate() {
    let snapshot = validator("snapshot.schema.json");
    for scene in data::scenes() {
        let world = World::new(&scene, 0).unwrap();
        let graph = subgraph_rag::sim::rebuild_graph(&world);
        check(&snapshot, &scene.id, &serde_json::from_str(&graph.to_snapshot()).unwrap());
        check(&snapshot, &scene.id, &serde_json::from_str(&graph.serialize_full()).unwrap());
    }
}

#[test]
fn config_validates() {
    let schema = validator("config.schema.json");
    let text = std::fs::read_to_string(root().join("configs/default.toml")).unwrap();
    HarnessConfig::from_toml(&text).unwrap();
    let value: Value = serde_json::to_value(toml::from_str::<toml::Value>(&text).unwrap()).unwrap();
    check(&schema, "configs/default.toml", &value);
}
