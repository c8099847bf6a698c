//! Per-object state carrying the full household attribute catalog, and the
//! built-in class profiles that give each class its affordances.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::scene_graph::{AttrValue, Attributes};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Temperature {
    Cold,
    RoomTemp,
    Hot,
}

impl fmt::Display for Temperature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Temperature::Cold => "Cold",
            Temperature::RoomTemp => "RoomTemp",
            Temperature::Hot => "Hot",
        })
    }
}

/// How an object holds things placed onto it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Relation {
    On,
    In,
}

impl Relation {
    pub fn as_str(self) -> &'static str {
        match self {
            Relation::On => "on",
            Relation::In => "in",
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The 28 tracked attributes. Field names serialize to the catalog spelling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ObjectState {
    pub visible: bool,
    pub is_interactable: bool,
    pub toggleable: bool,
    pub is_toggled: bool,
    pub breakable: bool,
    pub is_broken: bool,
    pub can_fill_with_liquid: bool,
    pub is_filled_with_liquid: bool,
    pub fill_liquid: String,
    pub dirtyable: bool,
    pub is_dirty: bool,
    pub can_be_used_up: bool,
    pub is_used_up: bool,
    pub cookable: bool,
    pub is_cooked: bool,
    pub temperature: Temperature,
    pub is_heat_source: bool,
    pub is_cold_source: bool,
    pub sliceable: bool,
    pub is_sliced: bool,
    pub openable: bool,
    pub is_open: bool,
    pub openness: f64,
    pub pickupable: bool,
    pub is_picked_up: bool,
    pub moveable: bool,
    pub salient_materials: String,
    pub distance: f64,
}

impl Default for ObjectState {
    fn default() -> Self {
        Self {
            visible: false,
            is_interactable: true,
            toggleable: false,
            is_toggled: false,
            breakable: false,
            is_broken: false,
            can_fill_with_liquid: false,
            is_filled_with_liquid: false,
            fill_liquid: "none".into(),
            dirtyable: false,
            is_dirty: false,
            can_be_used_up: false,
            is_used_up: false,
            cookable: false,
            is_cooked: false,
            temperature: Temperature::RoomTemp,
            is_heat_source: false,
            is_cold_source: false,
            sliceable: false,
            is_sliced: false,
            openable: false,
            is_open: false,
            openness: 0.0,
            pickupable: false,
            is_picked_up: false,
            moveable: false,
            salient_materials: "Wood".into(),
            distance: 6.0,
        }
    }
}

impl ObjectState {
    /// Attribute map keyed by catalog names.
    pub fn to_attributes(&self) -> Attributes {
        let b = |v: bool| AttrValue::Bool(v);
        let t = |v: &str| AttrValue::Text(v.to_string());
        [
            ("visible", b(self.visible)),
            ("isInteractable", b(self.is_interactable)),
            ("toggleable", b(self.toggleable)),
            ("isToggled", b(self.is_toggled)),
            ("breakable", b(self.breakable)),
            ("isBroken", b(self.is_broken)),
            ("canFillWithLiquid", b(self.can_fill_with_liquid)),
            ("isFilledWithLiquid", b(self.is_filled_with_liquid)),
            ("fillLiquid", t(&self.fill_liquid)),
            ("dirtyable", b(self.dirtyable)),
            ("isDirty", b(self.is_dirty)),
            ("canBeUsedUp", b(self.can_be_used_up)),
            ("isUsedUp", b(self.is_used_up)),
            ("cookable", b(self.cookable)),
            ("isCooked", b(self.is_cooked)),
            ("temperature", t(&self.temperature.to_string())),
            ("isHeatSource", b(self.is_heat_source)),
            ("isColdSource", b(self.is_cold_source)),
            ("sliceable", b(self.sliceable)),
            ("isSliced", b(self.is_sliced)),
            ("openable", b(self.openable)),
            ("isOpen", b(self.is_open)),
            ("openness", AttrValue::Number(self.openness)),
            ("pickupable", b(self.pickupable)),
            ("isPickedUp", b(self.is_picked_up)),
            ("moveable", b(self.moveable)),
            ("salientMaterials", t(&self.salient_materials)),
            ("distance", AttrValue::Number(self.distance)),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
    }

    /// Names of violated capability implications; empty when consistent.
    pub fn violations(&self) -> Vec<&'static str> {
        let mut v = Vec::new();
        if self.is_toggled && !self.toggleable {
            v.push("isToggled without toggleable");
        }
        if self.is_open && !self.openable {
            v.push("isOpen without openable");
        }
        if self.is_filled_with_liquid && !self.can_fill_with_liquid {
            v.push("isFilledWithLiquid without canFillWithLiquid");
        }
        if self.is_cooked && !self.cookable {
            v.push("isCooked without cookable");
        }
        if self.is_sliced && !self.sliceable {
            v.push("isSliced without sliceable");
        }
        if self.is_picked_up && !self.pickupable {
            v.push("isPickedUp without pickupable");
        }
        if !(0.0..=1.0).contains(&self.openness) {
            v.push("openness outside [0, 1]");
        }
        v
    }
}

/// Affordances of an object class.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassProfile {
    pub state: ObjectState,
    pub receptacle: Option<Relation>,
    /// Fills containers placed in it while toggled on.
    pub water_source: bool,
}

#[derive(Clone, Copy, Default)]
struct Traits {
    receptacle: Option<Relation>,
    pickupable: bool,
    openable: bool,
    toggleable: bool,
    heat: bool,
    cold: bool,
    water: bool,
    fill: bool,
    breakable: bool,
    dirtyable: bool,
    cookable: bool,
    sliceable: bool,
    used_up: bool,
    moveable: bool,
}

const FURNITURE: Traits = Traits {
    receptacle: Some(Relation::On),
    pickupable: false,
    openable: false,
    toggleable: false,
    heat: false,
    cold: false,
    water: false,
    fill: false,
    breakable: false,
    dirtyable: false,
    cookable: false,
    sliceable: false,
    used_up: false,
    moveable: false,
};

const ITEM: Traits = Traits {
    receptacle: None,
    pickupable: true,
    ..FURNITURE
};

const FOOD: Traits = Traits {
    sliceable: true,
    ..ITEM
};

fn traits(class: &str) -> (Traits, &'static str) {
    use Relation::{In, On};
    match class {
        "counter top" | "dining table" | "shelf" | "side table" => (FURNITURE, "Wood"),
        "cabinet" | "drawer" => (
            Traits { receptacle: Some(In), openable: true, ..FURNITURE },
            "Wood",
        ),
        "fridge" => (
            Traits { receptacle: Some(In), openable: true, cold: true, ..FURNITURE },
            "Metal",
        ),
        "microwave" => (
            Traits { receptacle: Some(In), openable: true, toggleable: true, heat: true, ..FURNITURE },
            "Metal",
        ),
        "stove burner" => (
            Traits { toggleable: true, heat: true, ..FURNITURE },
            "Metal",
        ),
        "toaster" => (
            Traits { receptacle: Some(In), toggleable: true, heat: true, ..FURNITURE },
            "Metal",
        ),
        "sink basin" => (
            Traits { receptacle: Some(In), toggleable: true, water: true, ..FURNITURE },
            "Ceramic",
        ),
        "coffee machine" => (
            Traits { receptacle: Some(In), toggleable: true, ..FURNITURE },
            "Metal",
        ),
        "garbage can" => (Traits { receptacle: Some(In), ..FURNITURE }, "Plastic"),
        "stool" | "chair" => (Traits { receptacle: Some(On), moveable: true, ..FURNITURE }, "Wood"),
        "house plant" => (Traits { receptacle: None, fill: true, ..FURNITURE }, "Organic"),
        "pot" => (
            Traits { receptacle: Some(In), fill: true, dirtyable: true, ..ITEM },
            "Metal",
        ),
        "pan" => (Traits { receptacle: Some(In), dirtyable: true, ..ITEM }, "Metal"),
        "kettle" => (Traits { fill: true, ..ITEM }, "Metal"),
        "bowl" => (
            Traits { receptacle: Some(In), fill: true, breakable: true, dirtyable: true, ..ITEM },
            "Ceramic",
        ),
        "cup" => (
            Traits { receptacle: Some(In), fill: true, breakable: true, dirtyable: true, ..ITEM },
            "Glass",
        ),
        "mug" => (
            Traits { receptacle: Some(In), fill: true, breakable: true, dirtyable: true, ..ITEM },
            "Ceramic",
        ),
        "plate" => (
            Traits { receptacle: Some(On), breakable: true, dirtyable: true, ..ITEM },
            "Ceramic",
        ),
        "vase" => (Traits { breakable: true, ..ITEM }, "Glass"),
        "wine bottle" => (Traits { fill: true, breakable: true, ..ITEM }, "Glass"),
        "egg" => (
            Traits { breakable: true, cookable: true, ..FOOD },
            "Food",
        ),
        "potato" | "bread" => (Traits { cookable: true, ..FOOD }, "Food"),
        "tomato" | "lettuce" | "apple" => (FOOD, "Food"),
        "pepper shaker" | "salt shaker" | "soap bottle" => {
            (Traits { used_up: true, ..ITEM }, "Metal")
        }
        "paper towel roll" => (Traits { used_up: true, ..ITEM }, "Paper"),
        "dish sponge" => (Traits { dirtyable: true, ..ITEM }, "Sponge"),
        "cell phone" => (Traits { toggleable: true, breakable: true, ..ITEM }, "Plastic"),
        "credit card" | "key chain" => (ITEM, "Plastic"),
        "spatula" | "fork" | "spoon" | "ladle" | "butter knife" | "knife" => {
            (Traits { dirtyable: true, ..ITEM }, "Metal")
        }
        "book" => (ITEM, "Paper"),
        _ => (ITEM, "Plastic"),
    }
}

/// Classes with a dedicated profile; any other class is a plain pickupable item.
pub const KNOWN_CLASSES: [&str; 46] = [
    "counter top", "dining table", "shelf", "side table", "cabinet", "drawer", "fridge",
    "microwave", "stove burner", "toaster", "sink basin", "coffee machine", "garbage can",
    "stool", "chair", "house plant", "pot", "pan", "kettle", "bowl", "cup", "mug", "plate",
    "vase", "wine bottle", "egg", "potato", "bread", "tomato", "lettuce", "apple",
    "pepper shaker", "salt shaker", "soap bottle", "paper towel roll", "dish sponge",
    "cell phone", "credit card", "key chain", "spatula", "fork", "spoon", "ladle",
    "butter knife", "knife", "book",
];

pub fn class_profile(class: &str) -> ClassProfile {
    let (t, material) = traits(class);
    let state = ObjectState {
        toggleable: t.toggleable,
        breakable: t.breakable,
        can_fill_with_liquid: t.fill,
        dirtyable: t.dirtyable,
        can_be_used_up: t.used_up,
        cookable: t.cookable,
        is_heat_source: t.heat,
        is_cold_source: t.cold,
        sliceable: t.sliceable,
        openable: t.openable,
        pickupable: t.pickupable,
        moveable: t.moveable,
        salient_materials: material.into(),
        ..ObjectState::default()
    };
    ClassProfile {
        state,
        receptacle: t.receptacle,
        water_source: t.water,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::HOUSEHOLD_ATTRIBUTES;
    use std::collections::BTreeSet;

    #[test]
    fn attribute_names_match_catalog() {
        let names: BTreeSet<String> = ObjectState::default().to_attributes().into_keys().collect();
        let want: BTreeSet<String> = HOUSEHOLD_ATTRIBUTES.iter().map(|s| s.to_string()).collect();
        assert_eq!(names, want);
    }

    #[test]
    fn profiles_are_consistent() {
        for class in KNOWN_CLASSES {
            let p = class_profile(class);
            assert!(p.state.violations().is_empty(), "{class}");
            if p.state.openable {
                assert!(p.receptacle.is_some(), "{class}");
            }
        }
    }

    #[test]
    fn attribute_map_agrees_with_serde_names() {
        let state = class_profile("microwave").state;
        let via_serde = serde_json::to_value(&state).unwrap();
        let direct = serde_json::to_value(state.to_attributes()).unwrap();
        assert_eq!(via_serde, direct);
    }

    #[test]
    fn temperature_serializes_as_catalog_values() {
        let attrs = ObjectState::default().to_attributes();
        assert_eq!(attrs["temperature"], AttrValue::Text("RoomTemp".into()));
        assert_eq!(attrs["openness"], AttrValue::Number(0.0));
        assert_eq!(attrs["fillLiquid"], AttrValue::Text("none".into()));
    }
}
