//! The attribute catalog: the closed set of attribute names a run may attach
//! to scene-graph entities.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

/// The 28 per-object attributes tracked by the household simulator.
pub const HOUSEHOLD_ATTRIBUTES: [&str; 28] = [
    "visible",
    "isInteractable",
    "toggleable",
    "isToggled",
    "breakable",
    "isBroken",
    "canFillWithLiquid",
    "isFilledWithLiquid",
    "fillLiquid",
    "dirtyable",
    "isDirty",
    "canBeUsedUp",
    "isUsedUp",
    "cookable",
    "isCooked",
    "temperature",
    "isHeatSource",
    "isColdSource",
    "sliceable",
    "isSliced",
    "openable",
    "isOpen",
    "openness",
    "pickupable",
    "isPickedUp",
    "moveable",
    "salientMaterials",
    "distance",
];

/// Ordered, duplicate-free list of attribute names.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AttributeCatalog(Vec<String>);

impl AttributeCatalog {
    pub fn new<I, S>(names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut seen = BTreeSet::new();
        let names = names
            .into_iter()
            .map(Into::into)
            .filter(|n: &String| !n.is_empty() && seen.insert(n.clone()))
            .collect();
        Self(names)
    }

    pub fn household() -> Self {
        Self::new(HOUSEHOLD_ATTRIBUTES)
    }

    pub fn names(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.0.iter().any(|n| n == name)
    }

    /// Case-insensitive lookup returning the catalog's own spelling.
    ///
    /// LLM replies come back lowercased ("ispickedup"), the catalog keeps
    /// camelCase ("isPickedUp").
    pub fn canonical(&self, name: &str) -> Option<&str> {
        let wanted = name.trim();
        self.0
            .iter()
            .find(|n| n.eq_ignore_ascii_case(wanted))
            .map(String::as_str)
    }

    pub fn all(&self) -> BTreeSet<String> {
        self.0.iter().cloned().collect()
    }

    /// Comma-joined list as substituted into the attribute prompt.
    pub fn comma_list(&self) -> String {
        self.0.join(", ")
    }

    /// JSON array form used by the structured-query prompt.
    pub fn json_list(&self) -> String {
        serde_json::to_string(&self.0).expect("string list serializes")
    }
}

impl Default for AttributeCatalog {
    fn default() -> Self {
        Self::household()
    }
}
