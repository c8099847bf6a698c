//! Parsing of ReAct-formatted planner replies.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedReply {
    pub thought: String,
    pub action: String,
    pub input: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("reply has no Action line")]
    MissingAction,
    #[error("Action line is empty")]
    EmptyAction,
}

/// Lowercase ASCII alphanumerics only: "Locate by ID" becomes "locatebyid".
pub fn normalize_action(name: &str) -> String {
    name.chars()
        .filter(|c| c.is_ascii_alphanumeric())
        .map(|c| c.to_ascii_lowercase())
        .collect()
}

/// Strips a case-insensitive `label:` prefix, tolerating markdown emphasis
/// around the label.
fn field<'a>(line: &'a str, label: &str) -> Option<&'a str> {
    let t = line.trim_start().trim_start_matches(['*', '#', '-', ' ']);
    let head = t.get(..label.len())?;
    if !head.eq_ignore_ascii_case(label) {
        return None;
    }
    let rest = t[label.len()..].trim_start_matches('*').trim_start();
    rest.strip_prefix(':').map(|r| r.trim_start_matches('*').trim())
}

fn is_action_line(line: &str) -> bool {
    field(line, "Action").is_some()
}

fn clean_input(raw: &str) -> String {
    let t = raw
        .trim()
        .trim_matches(|c| matches!(c, '"' | '\'' | '`'))
        .trim()
        .trim_end_matches('.')
        .trim();
    let t = t
        .strip_prefix('(')
        .and_then(|s| s.strip_suffix(')'))
        .unwrap_or(t)
        .trim();
    if ["none", "n/a", "nothing", "null", "()"]
        .iter()
        .any(|s| t.eq_ignore_ascii_case(s))
    {
        String::new()
    } else {
        t.replace("\\_", "_")
    }
}

/// Splits `name(arg)` into name and argument.
fn split_call(action: &str) -> (&str, Option<&str>) {
    match (action.find('('), action.rfind(')')) {
        (Some(open), Some(close)) if close > open => {
            (&action[..open], Some(&action[open + 1..close]))
        }
        _ => (action, None),
    }
}

/// Extracts the last Thought/Action/Action Input block from `text`.
///
/// The action is the last `Action:` line. Its input is the next
/// `Action Input:` line before any further block, or the argument of an
/// `action(arg)` call. The thought runs from the `Thought:` line of the same
/// block (or the end of the previous block) up to the action.
pub fn parse_react(text: &str) -> Result<ParsedReply, ParseError> {
    let lines: Vec<&str> = text.lines().collect();
    let at = lines
        .iter()
        .rposition(|l| is_action_line(l))
        .ok_or(ParseError::MissingAction)?;
    let raw_action = field(lines[at], "Action").unwrap_or_default();
    let (name, call_arg) = split_call(raw_action);
    let action = normalize_action(name);
    if action.is_empty() {
        return Err(ParseError::EmptyAction);
    }

    let mut input = call_arg.map(clean_input).unwrap_or_default();
    for line in &lines[at + 1..] {
        if let Some(v) = field(line, "Action Input") {
            input = clean_input(v);
            break;
        }
        if field(line, "Thought").is_some() || field(line, "Observation").is_some() {
            break;
        }
    }

    let block_start = lines[..at]
        .iter()
        .rposition(|l| {
            is_action_line(l)
                || field(l, "Action Input").is_some()
                || field(l, "Observation").is_some()
        })
        .map_or(0, |i| i + 1);
    let thought_from = lines[block_start..at]
        .iter()
        .rposition(|l| field(l, "Thought").is_some())
        .map_or(block_start, |i| block_start + i);
    let mut thought_lines: Vec<&str> = lines[thought_from..at].to_vec();
    if let Some(first) = thought_lines.first_mut() {
        if let Some(rest) = field(first, "Thought") {
            *first = rest;
        }
    }
    let thought = thought_lines
        .iter()
        .map(|l| l.trim())
        .filter(|l| !l.is_empty())
        .collect::<Vec<_>>()
        .join(" ");

    Ok(ParsedReply {
        thought,
        action,
        input,
    })
}
