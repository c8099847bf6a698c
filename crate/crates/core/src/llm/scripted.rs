use std::path::Path;
use std::sync::Mutex;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::{ChatModel, CompletionRequest, GatewayError};

/// One pattern → reply rule. `uses` bounds how many requests the rule may
/// answer; `None` means unlimited.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScriptRule {
    pub pattern: String,
    pub reply: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub uses: Option<u32>,
}

impl ScriptRule {
    pub fn new(pattern: impl Into<String>, reply: impl Into<String>) -> Self {
        Self {
            pattern: pattern.into(),
            reply: reply.into(),
            uses: None,
        }
    }

    pub fn once(pattern: impl Into<String>, reply: impl Into<String>) -> Self {
        Self {
            uses: Some(1),
            ..Self::new(pattern, reply)
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Script {
    pub rules: Vec<ScriptRule>,
}

impl Script {
    pub fn load(path: &Path) -> Result<Self, GatewayError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| GatewayError::Io(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| GatewayError::Config(format!("{}: {e}", path.display())))
    }

    pub fn push(&mut self, rule: ScriptRule) -> &mut Self {
        self.rules.push(rule);
        self
    }
}

/// Deterministic responder: the last user message is matched against the
/// rules in order and the first rule with uses left answers.
pub struct ScriptedChat {
    rules: Vec<(Regex, ScriptRule)>,
    used: Mutex<Vec<u32>>,
}

impl ScriptedChat {
    pub fn new(script: Script) -> Result<Self, GatewayError> {
        let rules = script
            .rules
            .into_iter()
            .map(|r| {
                Regex::new(&r.pattern)
                    .map(|re| (re, r.clone()))
                    .map_err(|e| GatewayError::Config(format!("bad pattern {:?}: {e}", r.pattern)))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let used = Mutex::new(vec![0; rules.len()]);
        Ok(Self { rules, used })
    }

    /// Number of rules that can still answer.
    pub fn remaining_rules(&self) -> usize {
        let used = self.used.lock().expect("script lock");
        self.rules
            .iter()
            .zip(used.iter())
            .filter(|((_, r), n)| r.uses.is_none_or(|u| **n < u))
            .count()
    }
}

impl ChatModel for ScriptedChat {
    fn complete(&self, request: &CompletionRequest) -> Result<String, GatewayError> {
        request.validate()?;
        let last = request.last_user().unwrap_or_default();
        let mut used = self.used.lock().expect("script lock");
        for (i, (re, rule)) in self.rules.iter().enumerate() {
            if rule.uses.is_some_and(|u| used[i] >= u) {
                continue;
            }
            if re.is_match(last) {
                used[i] += 1;
                return Ok(rule.reply.clone());
            }
        }
        let preview: String = last.chars().take(80).collect();
        Err(GatewayError::ScriptExhausted(preview))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_matching_rule_answers() {
        let mut script = Script::default();
        script
            .push(ScriptRule::new("comma separated list of objects", "egg, pan, stove"))
            .push(ScriptRule::new(".", "fallback"));
        let chat = ScriptedChat::new(script).unwrap();
        let reply = chat
            .complete(&CompletionRequest::prompt(
                "Cook an egg Strictly return a comma separated list of objects only.",
            ))
            .unwrap();
        assert_eq!(reply, "egg, pan, stove");
        assert_eq!(
            chat.complete(&CompletionRequest::prompt("hello")).unwrap(),
            "fallback"
        );
    }

    #[test]
    fn bounded_rules_are_consumed_in_order() {
        let mut script = Script::default();
        script
            .push(ScriptRule::once(".", "one"))
            .push(ScriptRule::once(".", "two"));
        let chat = ScriptedChat::new(script).unwrap();
        let req = CompletionRequest::prompt("x");
        assert_eq!(chat.complete(&req).unwrap(), "one");
        assert_eq!(chat.remaining_rules(), 1);
        assert_eq!(chat.complete(&req).unwrap(), "two");
        assert!(matches!(
            chat.complete(&req),
            Err(GatewayError::ScriptExhausted(_))
        ));
    }

    #[test]
    fn no_match_is_a_hard_error() {
        let mut script = Script::default();
        script.push(ScriptRule::new("^never$", "x"));
        let chat = ScriptedChat::new(script).unwrap();
        assert!(matches!(
            chat.complete(&CompletionRequest::prompt("something")),
            Err(GatewayError::ScriptExhausted(_))
        ));
    }

    #[test]
    fn invalid_pattern_is_config_error() {
        let mut script = Script::default();
        script.push(ScriptRule::new("(", "x"));
        assert!(matches!(ScriptedChat::new(script), Err(GatewayError::Config(_))));
    }

    #[test]
    fn script_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("script.json");
        std::fs::write(
            &path,
            r#"{"rules":[{"pattern":"a","reply":"b","uses":2},{"pattern":"c","reply":"d"}]}"#,
        )
        .unwrap();
        let script = Script::load(&path).unwrap();
        assert_eq!(script.rules[0].uses, Some(2));
        assert_eq!(script.rules[1].uses, None);
    }
}
