//! Task success conditions evaluated against the world.
//!
//! Class patterns accept alternatives separated by `|` ("kettle|pot") and
//! `*` for any object. A predicate may list several conditions; they must
//! hold on the same object.

use serde::{Deserialize, Serialize};

use super::object::ObjectState;
use super::{SimObject, World};
use crate::scene_graph::AttrValue;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantifier {
    #[default]
    Exists,
    /// Every discovered object of the class. Requires at least one such
    /// object, and an instance of every class a relation refers to, to have
    /// been discovered.
    ForallDiscovered,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Condition {
    /// Direct placement: the object's parent matches `target` via `relation`
    /// ("on", "in" or "on|in").
    Relation { relation: String, target: String },
    Attribute { attribute: String, value: AttrValue },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Predicate {
    pub subject: String,
    #[serde(default)]
    pub quantifier: Quantifier,
    #[serde(default)]
    pub negated: bool,
    pub conditions: Vec<Condition>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GoalSpec {
    #[serde(default)]
    pub all: Vec<Predicate>,
}

pub(crate) fn class_matches(pattern: &str, class: &str) -> bool {
    pattern
        .split('|')
        .map(str::trim)
        .any(|alt| alt == "*" || alt.eq_ignore_ascii_case(class))
}

fn attr_matches(state: &ObjectState, name: &str, want: &AttrValue) -> bool {
    match (state.to_attributes().get(name), want) {
        (Some(AttrValue::Number(a)), AttrValue::Number(b)) => (a - b).abs() < 1e-9,
        (Some(have), want) => have == want,
        (None, _) => false,
    }
}

impl Condition {
    fn holds(&self, world: &World, obj: &SimObject) -> bool {
        match self {
            Condition::Relation { relation, target } => obj.parent.as_ref().is_some_and(|(p, r)| {
                relation.split('|').any(|x| x.trim() == r.as_str())
                    && class_matches(target, &world.objects[p].class)
            }),
            Condition::Attribute { attribute, value } => attr_matches(&obj.state, attribute, value),
        }
    }

    fn referenced_class(&self) -> Option<&str> {
        match self {
            Condition::Relation { target, .. } => Some(target),
            Condition::Attribute { .. } => None,
        }
    }
}

impl Predicate {
    fn test(&self, world: &World, obj: &SimObject) -> bool {
        let all = self.conditions.iter().all(|c| c.holds(world, obj));
        all != self.negated
    }

    pub fn holds(&self, world: &World) -> bool {
        let subjects = world
            .objects
            .values()
            .filter(|o| class_matches(&self.subject, &o.class));
        match self.quantifier {
            Quantifier::Exists => subjects.into_iter().any(|o| self.test(world, o)),
            Quantifier::ForallDiscovered => {
                let discovered: Vec<&SimObject> = subjects.filter(|o| o.discovered).collect();
                let targets_known = self
                    .conditions
                    .iter()
                    .filter_map(Condition::referenced_class)
                    .all(|t| {
                        world
                            .objects
                            .values()
                            .any(|o| o.discovered && class_matches(t, &o.class))
                    });
                !discovered.is_empty()
                    && targets_known
                    && discovered.iter().all(|o| self.test(world, o))
            }
        }
    }
}

impl GoalSpec {
    pub fn check(&self, world: &World) -> bool {
        self.all.iter().all(|p| p.holds(world))
    }

    /// Classes named anywhere in the goal, without wildcards.
    pub fn classes(&self) -> Vec<String> {
        let mut out = Vec::new();
        for p in &self.all {
            let mut patterns = vec![p.subject.as_str()];
            patterns.extend(p.conditions.iter().filter_map(Condition::referenced_class));
            for pat in patterns {
                for alt in pat.split('|').map(str::trim) {
                    if alt != "*" && !out.iter().any(|c| c == alt) {
                        out.push(alt.to_string());
                    }
                }
            }
        }
        out
    }
}
