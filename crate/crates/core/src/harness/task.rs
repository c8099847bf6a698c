//! Task files: task text, goal, scene reference and an optional known
//! solution that can be turned into a planner script.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::llm::{Script, ScriptRule};
use crate::sim::{GoalSpec, SimError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Difficulty {
    Easy,
    Hard,
}

impl fmt::Display for Difficulty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Difficulty::Easy => "easy",
            Difficulty::Hard => "hard",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolutionStep {
    pub thought: String,
    pub action: String,
    #[serde(default)]
    pub input: String,
}

impl SolutionStep {
    pub fn reply(&self) -> String {
        format!(
            "Thought: {}\nAction: {}\nAction Input: {}",
            self.thought, self.action, self.input
        )
    }
}

/// Replies a planner would give for this task: pre-retrieval answers, the
/// self-query answer, and one ReAct reply per step.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Solution {
    /// Reply to the entity prompt.
    pub entities: String,
    /// Entity term to the reply to its attribute prompt.
    #[serde(default)]
    pub attributes: BTreeMap<String, String>,
    /// Reply to every self-query prompt.
    #[serde(default)]
    pub self_query: String,
    pub steps: Vec<SolutionStep>,
}

/// Fallback reply to attribute prompts for terms without an entry.
const DEFAULT_ATTRIBUTES: &str = "visible, distance";

impl Solution {
    /// Planner script answering the pre-retrieval and self-query prompts by
    /// pattern and the planning steps in order, one reply each.
    pub fn script(&self) -> Script {
        self.script_with_thoughts(true)
    }

    /// Same as [`Solution::script`]; with `thoughts` false every step reply
    /// carries an empty thought.
    pub fn script_with_thoughts(&self, thoughts: bool) -> Script {
        let mut s = Script::default();
        s.push(ScriptRule::new(
            regex::escape("Strictly return a comma separated list of objects only"),
            self.entities.clone(),
        ));
        for (entity, reply) in &self.attributes {
            s.push(ScriptRule::new(
                format!("about a {} are important", regex::escape(entity)),
                reply.clone(),
            ));
        }
        s.push(ScriptRule::new("Possible attributes:", DEFAULT_ATTRIBUTES));
        s.push(ScriptRule::new("Structured Request:", self.self_query.clone()));
        for step in &self.steps {
            let step = if thoughts {
                step.clone()
            } else {
                SolutionStep {
                    thought: String::new(),
                    ..step.clone()
                }
            };
            s.push(ScriptRule::once("", step.reply()));
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskSpec {
    pub id: String,
    pub difficulty: Difficulty,
    pub text: String,
    /// Scene id the task is designed for.
    pub scene: String,
    pub goal: GoalSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solution: Option<Solution>,
}

impl TaskSpec {
    pub fn from_json(text: &str) -> Result<Self, SimError> {
        let t: TaskSpec = serde_json::from_str(text).map_err(|e| SimError::Task(e.to_string()))?;
        if t.id.trim().is_empty() || t.text.trim().is_empty() {
            return Err(SimError::Task("task needs an id and text".into()));
        }
        Ok(t)
    }

    pub fn load(path: &Path) -> Result<Self, SimError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| SimError::Task(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}
