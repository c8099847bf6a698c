//! Deterministic household simulator: rooms of objects with the full
//! attribute catalog, partial observability, fifteen object-oriented actions
//! and a small set of heat/cold/water dynamics.

mod distractors;
mod dynamics;
mod goal;
mod mirror;
mod object;
mod scene;

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scene_graph::Entity;

pub use distractors::{
    default_vocabulary, household_lexicon, inject_distractors, phantom_entities, HOUSEHOLD_TERMS,
};
pub use goal::{Condition, GoalSpec, Predicate, Quantifier};
pub use mirror::{observe_graph, rebuild_graph};
pub use object::{class_profile, ClassProfile, ObjectState, Relation, Temperature, KNOWN_CLASSES};
pub use scene::{ObjectSpec, PlacedObject, SceneSpec};

/// The action interface, in documentation order.
pub const ACTIONS: [&str; 15] = [
    "randomlyexplore",
    "getdiscoveredobjects",
    "getvisibleobjects",
    "moveto",
    "inspect",
    "pickup",
    "placeon",
    "open",
    "close",
    "toggleon",
    "toggleoff",
    "search",
    "fillheldobjectwithwater",
    "pourwaterinto",
    "adjustpositioning",
];

pub const NOT_FOUND: &str = "object not found in environment";

const DIST_ADJACENT: f64 = 0.5;
const DIST_SAME_ROOM: f64 = 2.0;
const DIST_ELSEWHERE: f64 = 6.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("scene: {0}")]
    Scene(String),
    #[error("task: {0}")]
    Task(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimObject {
    pub id: String,
    pub class: String,
    /// Room of a free-standing object; unused while contained or held.
    pub base_room: String,
    pub parent: Option<(String, Relation)>,
    pub state: ObjectState,
    pub receptacle: Option<Relation>,
    pub water_source: bool,
    pub discovered: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentState {
    pub room: String,
    pub near: Option<String>,
    pub held: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionResult {
    pub ok: bool,
    pub message: String,
    /// Discovered objects visible after the action.
    pub visible: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct World {
    pub scene_id: String,
    pub rooms: Vec<String>,
    pub objects: BTreeMap<String, SimObject>,
    pub agent: AgentState,
    pub tick: u64,
    explore_order: Vec<String>,
    explore_cursor: usize,
    adjacency: BTreeSet<(String, String)>,
    rng: ChaCha8Rng,
    phantoms: Vec<Entity>,
}

fn norm_key(text: &str) -> String {
    text.chars()
        .filter(|c| c.is_alphanumeric())
        .flat_map(char::to_lowercase)
        .collect()
}

impl World {
    pub fn new(scene: &SceneSpec, seed: u64) -> Result<Self, SimError> {
        let placed = scene.placed_objects()?;
        let mut rng = ChaCha8Rng::seed_from_u64(scene.seed ^ seed.rotate_left(17));
        let mut rest: Vec<String> = scene
            .rooms
            .iter()
            .filter(|r| **r != scene.start_room)
            .cloned()
            .collect();
        rest.shuffle(&mut rng);
        let mut explore_order = vec![scene.start_room.clone()];
        explore_order.extend(rest);
        let objects = placed
            .into_iter()
            .map(|p| {
                let obj = SimObject {
                    base_room: p.room.clone().unwrap_or_default(),
                    id: p.id.clone(),
                    class: p.class,
                    parent: p.parent,
                    state: p.state,
                    receptacle: p.receptacle,
                    water_source: p.water_source,
                    discovered: false,
                };
                (p.id, obj)
            })
            .collect();
        let adjacency = scene
            .adjacency
            .iter()
            .flat_map(|[a, b]| [(a.clone(), b.clone()), (b.clone(), a.clone())])
            .collect();
        let mut world = World {
            scene_id: scene.id.clone(),
            rooms: scene.rooms.clone(),
            objects,
            agent: AgentState {
                room: scene.start_room.clone(),
                near: None,
                held: None,
            },
            tick: 0,
            explore_order,
            explore_cursor: 0,
            adjacency,
            rng,
            phantoms: Vec::new(),
        };
        world.discover_room();
        world.refresh();
        Ok(world)
    }

    pub fn explore_order(&self) -> &[String] {
        &self.explore_order
    }

    pub fn phantoms(&self) -> &[Entity] {
        &self.phantoms
    }

    pub(crate) fn phantoms_mut(&mut self) -> &mut Vec<Entity> {
        &mut self.phantoms
    }

    pub fn object(&self, id: &str) -> Option<&SimObject> {
        self.objects.get(id)
    }

    pub fn discovered_ids(&self) -> BTreeSet<String> {
        self.objects
            .values()
            .filter(|o| o.discovered)
            .map(|o| o.id.clone())
            .collect()
    }

    /// Room an object is currently in.
    pub fn room_of(&self, id: &str) -> String {
        if self.agent.held.as_deref() == Some(id) {
            return self.agent.room.clone();
        }
        let mut cur = &self.objects[id];
        while let Some((p, _)) = &cur.parent {
            if self.agent.held.as_deref() == Some(p.as_str()) {
                return self.agent.room.clone();
            }
            cur = &self.objects[p];
        }
        cur.base_room.clone()
    }

    /// Ancestor chain from the direct parent outwards.
    pub fn ancestors(&self, id: &str) -> Vec<String> {
        let mut out = Vec::new();
        let mut cur = &self.objects[id];
        while let Some((p, _)) = &cur.parent {
            out.push(p.clone());
            cur = &self.objects[p];
        }
        out
    }

    pub fn children(&self, id: &str) -> Vec<String> {
        self.objects
            .values()
            .filter(|o| o.parent.as_ref().is_some_and(|(p, _)| p == id))
            .map(|o| o.id.clone())
            .collect()
    }

    fn descendants(&self, id: &str) -> Vec<String> {
        let mut out = Vec::new();
        let mut stack = self.children(id);
        while let Some(c) = stack.pop() {
            stack.extend(self.children(&c));
            out.push(c);
        }
        out.sort();
        out
    }

    fn top_level(&self, id: &str) -> String {
        self.ancestors(id).pop().unwrap_or_else(|| id.to_string())
    }

    /// Inside a closed receptacle somewhere up the chain.
    fn enclosed(&self, id: &str) -> bool {
        let mut cur = &self.objects[id];
        while let Some((p, rel)) = &cur.parent {
            let parent = &self.objects[p];
            if *rel == Relation::In && parent.state.openable && !parent.state.is_open {
                return true;
            }
            cur = parent;
        }
        false
    }

    pub fn is_visible(&self, id: &str) -> bool {
        if self.agent.held.as_deref() == Some(id) {
            return true;
        }
        self.room_of(id) == self.agent.room && !self.enclosed(id)
    }

    pub fn is_adjacent(&self, id: &str) -> bool {
        if self.agent.held.as_deref() == Some(id) {
            return true;
        }
        let Some(near) = self.agent.near.as_deref() else {
            return false;
        };
        if self.room_of(id) != self.agent.room {
            return false;
        }
        if id == near {
            return true;
        }
        let id_anc = self.ancestors(id);
        let near_anc = self.ancestors(near);
        if id_anc.iter().any(|a| a == near) || near_anc.iter().any(|a| a == id) {
            return true;
        }
        if !id_anc.is_empty() && id_anc.first() == near_anc.first() {
            return true;
        }
        self.adjacency
            .contains(&(self.top_level(id), self.top_level(near)))
    }

    fn distance(&self, id: &str) -> f64 {
        if self.is_adjacent(id) {
            DIST_ADJACENT
        } else if self.room_of(id) == self.agent.room {
            DIST_SAME_ROOM
        } else {
            DIST_ELSEWHERE
        }
    }

    /// Recomputes the agent-relative attributes of every object.
    pub(crate) fn refresh(&mut self) {
        let ids: Vec<String> = self.objects.keys().cloned().collect();
        for id in ids {
            let visible = self.is_visible(&id);
            let distance = self.distance(&id);
            let held = self.agent.held.as_deref() == Some(id.as_str());
            let s = &mut self.objects.get_mut(&id).expect("id from keys").state;
            s.visible = visible;
            s.distance = distance;
            s.is_picked_up = held;
        }
    }

    fn visible_ids(&self) -> Vec<String> {
        self.objects
            .keys()
            .filter(|id| self.is_visible(id))
            .cloned()
            .collect()
    }

    /// Marks `ids` discovered; returns how many were new.
    fn discover(&mut self, ids: &[String]) -> usize {
        let mut n = 0;
        for id in ids {
            let o = self.objects.get_mut(id).expect("known id");
            if !o.discovered {
                o.discovered = true;
                n += 1;
            }
        }
        n
    }

    fn discover_room(&mut self) -> usize {
        let ids = self.visible_ids();
        self.discover(&ids)
    }

    fn label(&self, id: &str) -> String {
        self.objects
            .get(id)
            .map(|o| o.class.clone())
            .unwrap_or_else(|| id.to_string())
    }

    /// Resolves an action argument to a discovered object: exact id first,
    /// then the nearest discovered instance of a class, ties broken by id.
    pub fn resolve(&self, arg: &str) -> Result<String, String> {
        let key = norm_key(arg);
        if key.is_empty() {
            return Err("this action needs an object".into());
        }
        if let Some(o) = self
            .objects
            .values()
            .find(|o| o.discovered && norm_key(&o.id) == key)
        {
            return Ok(o.id.clone());
        }
        let is_phantom_id = self.phantoms.iter().any(|p| norm_key(&p.id) == key);
        if is_phantom_id {
            return Err(NOT_FOUND.into());
        }
        let best = self
            .objects
            .values()
            .filter(|o| o.discovered && norm_key(&o.class) == key)
            .map(|o| (self.distance(&o.id).to_bits(), o.id.clone()))
            .min();
        if let Some((_, id)) = best {
            return Ok(id);
        }
        if self.phantoms.iter().any(|p| norm_key(&p.label) == key) {
            return Err(NOT_FOUND.into());
        }
        Err(format!("no discovered object matches '{}'", arg.trim()))
    }

    /// Executes one action followed by one dynamics tick.
    pub fn step(&mut self, action: &str, argument: &str) -> ActionResult {
        let name = norm_key(action);
        let outcome = self.apply(&name, argument);
        self.dynamics_tick();
        self.tick += 1;
        self.refresh();
        let visible = self
            .visible_ids()
            .into_iter()
            .filter(|id| self.objects[id].discovered)
            .collect();
        let (ok, message) = match outcome {
            Ok(m) => (true, m),
            Err(m) => (false, m),
        };
        ActionResult {
            ok,
            message,
            visible,
        }
    }

    /// Lets one tick pass without an action.
    pub fn idle(&mut self) {
        self.dynamics_tick();
        self.tick += 1;
        self.refresh();
    }

    fn target(&self, verb: &str, argument: &str) -> Result<String, String> {
        self.resolve(argument)
            .map_err(|why| format!("Cannot {verb} '{}': {why}.", argument.trim()))
    }

    fn require_adjacent(&self, verb: &str, id: &str) -> Result<(), String> {
        if self.is_adjacent(id) {
            Ok(())
        } else {
            Err(format!(
                "Cannot {verb} the {}: not close enough.",
                self.label(id)
            ))
        }
    }

    fn apply(&mut self, action: &str, argument: &str) -> Result<String, String> {
        match action {
            "randomlyexplore" => {
                self.explore_cursor = (self.explore_cursor + 1) % self.explore_order.len();
                self.agent.room = self.explore_order[self.explore_cursor].clone();
                self.agent.near = None;
                self.discover_room();
                Ok(format!("Explored and arrived at the {}.", self.agent.room))
            }
            "getdiscoveredobjects" => {
                let mut ids: Vec<String> = self.discovered_ids().into_iter().collect();
                ids.extend(self.phantoms.iter().map(|p| p.id.clone()));
                ids.sort();
                Ok(format!("Discovered objects: {}", ids.join(", ")))
            }
            "getvisibleobjects" => {
                self.discover_room();
                let ids = self.visible_ids();
                if ids.is_empty() {
                    Ok("No objects are visible.".into())
                } else {
                    Ok(format!("Visible objects: {}", ids.join(", ")))
                }
            }
            "moveto" => {
                let id = self.target("move to", argument)?;
                if self.agent.held.as_deref() == Some(id.as_str()) {
                    return Err(format!("Cannot move to the {}: it is being held.", self.label(&id)));
                }
                if self.ancestors(&id).iter().any(|a| Some(a) == self.agent.held.as_ref()) {
                    return Err(format!(
                        "Cannot move to the {}: it is inside the held object.",
                        self.label(&id)
                    ));
                }
                self.agent.room = self.room_of(&id);
                self.agent.near = Some(id.clone());
                self.discover_room();
                Ok(format!("Moved to the {}.", self.label(&id)))
            }
            "inspect" => {
                let id = self.target("inspect", argument)?;
                let attrs = serde_json::to_string(&self.objects[&id].state.to_attributes())
                    .expect("attributes serialize");
                Ok(format!("{} ({id}): {attrs}", self.label(&id)))
            }
            "pickup" => {
                let id = self.target("pick up", argument)?;
                let label = self.label(&id);
                if let Some(h) = &self.agent.held {
                    return Err(format!(
                        "Cannot pick up the {label}: already holding the {}.",
                        self.label(h)
                    ));
                }
                self.require_adjacent("pick up", &id)?;
                if !self.objects[&id].state.pickupable {
                    return Err(format!("Cannot pick up the {label}: it is not pickupable."));
                }
                if !self.is_visible(&id) {
                    return Err(format!("Cannot pick up the {label}: it is enclosed."));
                }
                let room = self.room_of(&id);
                if self.agent.near.as_deref() == Some(id.as_str()) {
                    self.agent.near = self.objects[&id].parent.as_ref().map(|(p, _)| p.clone());
                }
                let o = self.objects.get_mut(&id).expect("resolved");
                o.parent = None;
                o.base_room = room;
                o.state.is_picked_up = true;
                self.agent.held = Some(id);
                Ok(format!("Picked up the {label}."))
            }
            "placeon" => {
                let Some(held) = self.agent.held.clone() else {
                    return Err("Cannot place: not holding anything.".into());
                };
                let id = self.target("place on", argument)?;
                let label = self.label(&id);
                if id == held || self.ancestors(&id).contains(&held) {
                    return Err(format!("Cannot place the {} on itself.", self.label(&held)));
                }
                self.require_adjacent("place on", &id)?;
                let Some(rel) = self.objects[&id].receptacle else {
                    return Err(format!("Cannot place on the {label}: it is not a receptacle."));
                };
                let target = &self.objects[&id].state;
                if target.openable && !target.is_open {
                    return Err(format!("Cannot place in the {label}: it is closed."));
                }
                if !self.is_visible(&id) {
                    return Err(format!("Cannot place in the {label}: it is enclosed."));
                }
                let o = self.objects.get_mut(&held).expect("held exists");
                o.parent = Some((id.clone(), rel));
                o.state.is_picked_up = false;
                self.agent.held = None;
                Ok(format!(
                    "Placed the {} {} the {label}.",
                    self.label(&held),
                    rel.as_str()
                ))
            }
            "open" | "close" => {
                let opening = action == "open";
                let id = self.target(action, argument)?;
                let label = self.label(&id);
                self.require_adjacent(action, &id)?;
                let s = &self.objects[&id].state;
                if !s.openable {
                    return Err(format!("Cannot {action} the {label}: it is not openable."));
                }
                if s.is_open == opening {
                    let already = if opening { "open" } else { "closed" };
                    return Err(format!("Cannot {action} the {label}: it is already {already}."));
                }
                if opening && s.is_toggled {
                    return Err(format!("Cannot open the {label}: turn it off first."));
                }
                let s = &mut self.objects.get_mut(&id).expect("resolved").state;
                s.is_open = opening;
                s.openness = if opening { 1.0 } else { 0.0 };
                Ok(format!(
                    "{} the {label}.",
                    if opening { "Opened" } else { "Closed" }
                ))
            }
            "toggleon" | "toggleoff" => {
                let on = action == "toggleon";
                let id = self.target("toggle", argument)?;
                let label = self.label(&id);
                self.require_adjacent("toggle", &id)?;
                let s = &self.objects[&id].state;
                if !s.toggleable {
                    return Err(format!("Cannot toggle the {label}: it has no switch."));
                }
                if s.is_toggled == on {
                    let already = if on { "on" } else { "off" };
                    return Err(format!("Cannot toggle the {label}: it is already {already}."));
                }
                if on && s.openable && s.is_open {
                    return Err(format!("Cannot turn on the {label}: close it first."));
                }
                self.objects.get_mut(&id).expect("resolved").state.is_toggled = on;
                Ok(format!(
                    "Turned {} the {label}.",
                    if on { "on" } else { "off" }
                ))
            }
            "search" => {
                let id = self.target("search", argument)?;
                let label = self.label(&id);
                if self.room_of(&id) != self.agent.room {
                    return Err(format!("Cannot search the {label}: it is in another room."));
                }
                let s = &self.objects[&id].state;
                if s.openable && !s.is_open {
                    return Err(format!("Cannot search the {label}: it is closed."));
                }
                let found: Vec<String> = self
                    .descendants(&id)
                    .into_iter()
                    .filter(|d| self.is_visible(d))
                    .collect();
                let n = self.discover(&found);
                Ok(format!("Searched the {label} and found {n} new object(s)."))
            }
            "fillheldobjectwithwater" => {
                let Some(held) = self.agent.held.clone() else {
                    return Err("Cannot fill: not holding anything.".into());
                };
                let label = self.label(&held);
                if !self.objects[&held].state.can_fill_with_liquid {
                    return Err(format!("Cannot fill the {label}: it cannot hold liquid."));
                }
                let tap = self
                    .objects
                    .values()
                    .filter(|o| o.water_source && o.state.is_toggled)
                    .any(|o| self.is_adjacent(&o.id));
                if !tap {
                    return Err(format!(
                        "Cannot fill the {label}: no running water source is close enough."
                    ));
                }
                let s = &mut self.objects.get_mut(&held).expect("held").state;
                s.is_filled_with_liquid = true;
                s.fill_liquid = "water".into();
                Ok(format!("Filled the {label} with water."))
            }
            "pourwaterinto" => {
                let Some(held) = self.agent.held.clone() else {
                    return Err("Cannot pour: not holding anything.".into());
                };
                let held_label = self.label(&held);
                if !self.objects[&held].state.is_filled_with_liquid {
                    return Err(format!("Cannot pour: the {held_label} is empty."));
                }
                let id = self.target("pour into", argument)?;
                let label = self.label(&id);
                if id == held {
                    return Err(format!("Cannot pour the {held_label} into itself."));
                }
                self.require_adjacent("pour into", &id)?;
                if !self.objects[&id].state.can_fill_with_liquid {
                    return Err(format!("Cannot pour into the {label}: it cannot hold liquid."));
                }
                let liquid = self.objects[&held].state.fill_liquid.clone();
                let s = &mut self.objects.get_mut(&id).expect("resolved").state;
                s.is_filled_with_liquid = true;
                s.fill_liquid = liquid;
                let s = &mut self.objects.get_mut(&held).expect("held").state;
                s.is_filled_with_liquid = false;
                s.fill_liquid = "none".into();
                Ok(format!("Poured water from the {held_label} into the {label}."))
            }
            "adjustpositioning" => {
                let mut candidates: Vec<String> = self
                    .visible_ids()
                    .into_iter()
                    .filter(|id| Some(id) != self.agent.held.as_ref())
                    .collect();
                candidates.sort();
                if candidates.is_empty() {
                    return Err("Cannot adjust position: nothing nearby.".into());
                }
                let pick = candidates[self.rng.random_range(0..candidates.len())].clone();
                self.agent.near = Some(pick.clone());
                Ok(format!("Adjusted position; now near the {}.", self.label(&pick)))
            }
            other => Err(format!("Unknown action '{other}'.")),
        }
    }

    /// Broken invariants, described; empty when the world is consistent.
    pub fn invariant_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let picked: Vec<&String> = self
            .objects
            .values()
            .filter(|o| o.state.is_picked_up)
            .map(|o| &o.id)
            .collect();
        if picked.len() > 1 {
            out.push(format!("several objects picked up: {picked:?}"));
        }
        if let Some(h) = &self.agent.held {
            let o = &self.objects[h];
            if !o.state.is_picked_up || o.parent.is_some() {
                out.push(format!("held {h} is not picked up or still has a parent"));
            }
        } else if !picked.is_empty() {
            out.push("picked-up object while the gripper is empty".into());
        }
        for o in self.objects.values() {
            for v in o.state.violations() {
                out.push(format!("{}: {v}", o.id));
            }
            let mut seen = BTreeSet::new();
            let mut cur = o;
            while let Some((p, _)) = &cur.parent {
                if !seen.insert(p) {
                    out.push(format!("containment cycle at {}", o.id));
                    break;
                }
                match self.objects.get(p) {
                    Some(next) => cur = next,
                    None => {
                        out.push(format!("{} has missing parent {p}", o.id));
                        break;
                    }
                }
            }
        }
        out
    }
}
