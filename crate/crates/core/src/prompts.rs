//! Prompt templates shipped with the crate and a single-pass renderer.
//!
//! Placeholders are `{name}`. Only names passed to [`render`] are replaced;
//! any other brace text (JSON examples in the self-query template) is left
//! untouched. Substituted values are never re-scanned, so a task text that
//! happens to contain `{object}` stays literal.

pub const PRE_RETRIEVAL_ENTITIES: &str = include_str!("../prompts/pre_retrieval_entities.txt");
pub const PRE_RETRIEVAL_ATTRIBUTES: &str = include_str!("../prompts/pre_retrieval_attributes.txt");
pub const SELF_QUERY: &str = include_str!("../prompts/self_query.txt");
pub const REACT_SYSTEM: &str = include_str!("../prompts/react_system.txt");
pub const FORMAT_REMINDER: &str = include_str!("../prompts/format_reminder.txt");

pub fn render(template: &str, vars: &[(&str, &str)]) -> String {
    let mut out = String::with_capacity(template.len() + 64);
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let after = &rest[open + 1..];
        let replaced = after.find('}').and_then(|close| {
            let name = &after[..close];
            vars.iter()
                .find(|(k, _)| *k == name)
                .map(|(_, v)| (close, *v))
        });
        match replaced {
            Some((close, value)) => {
                out.push_str(value);
                rest = &after[close + 1..];
            }
            None => {
                out.push('{');
                rest = after;
            }
        }
    }
    out.push_str(rest);
    out
}

pub fn entities_prompt(task: &str) -> String {
    render(PRE_RETRIEVAL_ENTITIES, &[("task", task)])
}

/// `attributes` is the catalog joined with ", ".
pub fn attributes_prompt(object: &str, task: &str, attributes: &str) -> String {
    render(
        PRE_RETRIEVAL_ATTRIBUTES,
        &[("object", object), ("task", task), ("attributes", attributes)],
    )
}

/// `attributes_json` is the catalog as a JSON list.
pub fn self_query_prompt(thought: &str, attributes_json: &str) -> String {
    render(
        SELF_QUERY,
        &[("thought", thought), ("attributes", attributes_json)],
    )
}

/// `actions` is one description line per action, `action_names` the
/// comma-joined names.
pub fn react_system_prompt(task: &str, actions: &str, action_names: &str) -> String {
    render(
        REACT_SYSTEM,
        &[("task", task), ("actions", actions), ("action_names", action_names)],
    )
}
