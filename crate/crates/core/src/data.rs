//! The shipped kitchen scenes and the 40 household tasks, compiled in.

use std::path::Path;

use crate::harness::{Difficulty, HarnessError, TaskSpec};
use crate::sim::SceneSpec;

macro_rules! bundled {
    ($dir:literal; $($name:literal),* $(,)?) => {
        [$(($name, include_str!(concat!("../data/", $dir, "/", $name, ".json")))),*]
    };
}

pub const SCENE_FILES: [(&str, &str); 5] = bundled!("scenes";
    "kitchen_1", "kitchen_2", "kitchen_3", "kitchen_4", "kitchen_5");

pub const TASK_FILES: [(&str, &str); 40] = bundled!("tasks";
    "easy_01", "easy_02", "easy_03", "easy_04", "easy_05",
    "easy_06", "easy_07", "easy_08", "easy_09", "easy_10",
    "easy_11", "easy_12", "easy_13", "easy_14", "easy_15",
    "easy_16", "easy_17", "easy_18", "easy_19", "easy_20",
    "hard_01", "hard_02", "hard_03", "hard_04", "hard_05",
    "hard_06", "hard_07", "hard_08", "hard_09", "hard_10",
    "hard_11", "hard_12", "hard_13", "hard_14", "hard_15",
    "hard_16", "hard_17", "hard_18", "hard_19", "hard_20",
);

pub fn scenes() -> Vec<SceneSpec> {
    SCENE_FILES
        .iter()
        .map(|(_, text)| SceneSpec::from_json(text).expect("bundled scene parses"))
        .collect()
}

pub fn tasks() -> Vec<TaskSpec> {
    TASK_FILES
        .iter()
        .map(|(_, text)| TaskSpec::from_json(text).expect("bundled task parses"))
        .collect()
}

pub fn scene(id: &str) -> Option<SceneSpec> {
    SCENE_FILES
        .iter()
        .find(|(name, _)| *name == id)
        .map(|(_, text)| SceneSpec::from_json(text).expect("bundled scene parses"))
}

pub fn task(id: &str) -> Option<TaskSpec> {
    TASK_FILES
        .iter()
        .find(|(name, _)| *name == id)
        .map(|(_, text)| TaskSpec::from_json(text).expect("bundled task parses"))
}

/// A bundled task id, or a path to a task file.
pub fn resolve_task(arg: &str) -> Result<TaskSpec, HarnessError> {
    if let Some(t) = task(arg) {
        return Ok(t);
    }
    let path = Path::new(arg);
    if path.is_file() {
        return Ok(TaskSpec::load(path)?);
    }
    Err(HarnessError::Config(format!("no bundled task or task file named {arg:?}")))
}

/// A bundled scene id, or a path to a scene file.
pub fn resolve_scene(arg: &str) -> Result<SceneSpec, HarnessError> {
    if let Some(s) = scene(arg) {
        return Ok(s);
    }
    let path = Path::new(arg);
    if path.is_file() {
        return Ok(SceneSpec::load(path)?);
    }
    Err(HarnessError::Config(format!("no bundled scene or scene file named {arg:?}")))
}

/// `all`, `easy`, `hard`, or a comma-separated list of ids and paths.
pub fn select_tasks(selector: &str) -> Result<Vec<TaskSpec>, HarnessError> {
    let by_difficulty = |d: Difficulty| tasks().into_iter().filter(|t| t.difficulty == d).collect();
    match selector.trim() {
        "" | "all" => Ok(tasks()),
        "easy" => Ok(by_difficulty(Difficulty::Easy)),
        "hard" => Ok(by_difficulty(Difficulty::Hard)),
        list => list
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(resolve_task)
            .collect(),
    }
}
