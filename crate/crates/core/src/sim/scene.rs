//! Scene files: rooms, objects with class, placement and state overrides.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::object::{class_profile, ObjectState, Relation};
use super::SimError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectSpec {
    pub id: String,
    pub class: String,
    /// Required for objects without a parent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub room: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent: Option<String>,
    /// Defaults to the parent's receptacle relation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relation: Option<Relation>,
    /// Attribute overrides keyed by catalog name.
    #[serde(default, skip_serializing_if = "serde_json::Map::is_empty")]
    pub state: serde_json::Map<String, serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneSpec {
    pub id: String,
    pub rooms: Vec<String>,
    pub start_room: String,
    #[serde(default)]
    pub seed: u64,
    pub objects: Vec<ObjectSpec>,
    /// Pairs of objects close enough to reach one from the other.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub adjacency: Vec<[String; 2]>,
    /// Extra water sources beyond classes that are water sources already.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub water_sources: Vec<String>,
    /// Overrides the built-in distractor vocabulary.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub distractor_vocabulary: Vec<String>,
}

/// A validated object ready to be placed in a world.
#[derive(Debug, Clone, PartialEq)]
pub struct PlacedObject {
    pub id: String,
    pub class: String,
    pub room: Option<String>,
    pub parent: Option<(String, Relation)>,
    pub state: ObjectState,
    pub receptacle: Option<Relation>,
    pub water_source: bool,
}

impl SceneSpec {
    pub fn from_json(text: &str) -> Result<Self, SimError> {
        serde_json::from_str(text).map_err(|e| SimError::Scene(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, SimError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| SimError::Scene(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn classes(&self) -> BTreeSet<String> {
        self.objects.iter().map(|o| o.class.clone()).collect()
    }

    /// Checks the scene and resolves defaults.
    pub fn placed_objects(&self) -> Result<Vec<PlacedObject>, SimError> {
        let err = |m: String| Err(SimError::Scene(format!("{}: {m}", self.id)));
        if self.rooms.is_empty() {
            return err("no rooms".into());
        }
        let rooms: BTreeSet<&str> = self.rooms.iter().map(String::as_str).collect();
        if rooms.len() != self.rooms.len() {
            return err("duplicate room".into());
        }
        if !rooms.contains(self.start_room.as_str()) {
            return err(format!("unknown start room {}", self.start_room));
        }
        let mut by_id: BTreeMap<&str, &ObjectSpec> = BTreeMap::new();
        for o in &self.objects {
            if o.id.trim().is_empty() || o.class.trim().is_empty() {
                return err("object with empty id or class".into());
            }
            if by_id.insert(o.id.as_str(), o).is_some() {
                return err(format!("duplicate object id {}", o.id));
            }
        }
        let water: BTreeSet<&str> = self.water_sources.iter().map(String::as_str).collect();
        let mut out = Vec::with_capacity(self.objects.len());
        for o in &self.objects {
            let profile = class_profile(&o.class);
            let parent = match (&o.parent, &o.room) {
                (Some(p), None) => {
                    let Some(ps) = by_id.get(p.as_str()) else {
                        return err(format!("{} has unknown parent {p}", o.id));
                    };
                    let Some(kind) = class_profile(&ps.class).receptacle else {
                        return err(format!("{} cannot hold {}", p, o.id));
                    };
                    Some((p.clone(), o.relation.unwrap_or(kind)))
                }
                (None, Some(r)) => {
                    if !rooms.contains(r.as_str()) {
                        return err(format!("{} is in unknown room {r}", o.id));
                    }
                    None
                }
                _ => return err(format!("{} needs exactly one of room or parent", o.id)),
            };
            let mut state = serde_json::to_value(&profile.state).expect("state serializes");
            for (k, v) in &o.state {
                state[k.as_str()] = v.clone();
            }
            let state: ObjectState = serde_json::from_value(state)
                .map_err(|e| SimError::Scene(format!("{}: {}: {e}", self.id, o.id)))?;
            if let Some(v) = state.violations().first() {
                return err(format!("{}: {v}", o.id));
            }
            if state.is_picked_up {
                return err(format!("{} starts picked up", o.id));
            }
            if !water.is_empty() && water.contains(o.id.as_str()) && !state.toggleable {
                return err(format!("water source {} must be toggleable", o.id));
            }
            out.push(PlacedObject {
                id: o.id.clone(),
                class: o.class.clone(),
                room: o.room.clone(),
                parent,
                state,
                receptacle: profile.receptacle,
                water_source: profile.water_source || water.contains(o.id.as_str()),
            });
        }
        for w in &water {
            if !by_id.contains_key(w) {
                return err(format!("unknown water source {w}"));
            }
        }
        for [a, b] in &self.adjacency {
            if !by_id.contains_key(a.as_str()) || !by_id.contains_key(b.as_str()) {
                return err(format!("adjacency hint {a}/{b} names an unknown object"));
            }
        }
        // Containment must bottom out in a room.
        for o in &out {
            let mut seen = BTreeSet::new();
            let mut cur = o;
            while let Some((p, _)) = &cur.parent {
                if !seen.insert(p.clone()) {
                    return err(format!("containment cycle through {}", o.id));
                }
                cur = out.iter().find(|x| &x.id == p).expect("parent checked");
            }
        }
        Ok(out)
    }
}
