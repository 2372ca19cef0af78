use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::skill::EntityRef;

/// A movable object the agent could see, with where it was seen.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sighting {
    pub class: String,
    pub instance: u32,
    /// Room label, e.g. `"kitchen 1"`.
    pub room: String,
    /// Receptacle label, e.g. `"fridge 2"`; `None` for the floor.
    pub receptacle: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Observation {
    pub text: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sightings: Vec<Sighting>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub error: bool,
}

impl Observation {
    pub fn ok(text: String, sightings: Vec<Sighting>) -> Self {
        Self {
            text,
            sightings,
            error: false,
        }
    }

    pub fn error(text: String) -> Self {
        Self {
            text,
            sightings: Vec::new(),
            error: true,
        }
    }

    /// The empty observation that follows a thought.
    pub fn empty() -> Self {
        Self::default()
    }
}

/// Observation phrasing. Every field may be overridden from the world file.
///
/// Placeholders are `{name}` and are substituted verbatim.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Templates {
    pub house: String,
    pub room_look: String,
    pub move_room: String,
    pub arrive: String,
    pub is_closed: String,
    pub is_open: String,
    pub see: String,
    pub hold: String,
    pub pick_up: String,
    pub put_down_on: String,
    pub put_down_in: String,
    pub open: String,
    pub close: String,
    pub turn_on: String,
    pub turn_off: String,
    pub slice: String,
    pub not_executable: String,
    pub nothing: String,
}

impl Default for Templates {
    fn default() -> Self {
        Self {
            house: "You are in the house, and there are {count} rooms: {rooms}.".into(),
            room_look: "You are in the middle of a {room}. Looking quickly around the room, you see {items}.".into(),
            move_room: "You move to the {room}. Looking quickly around the room, you see {items}.".into(),
            arrive: "You arrive at the {target}.".into(),
            is_closed: "The {target} is closed.".into(),
            is_open: "The {target} is open.".into(),
            see: "You see {items}.".into(),
            hold: "You hold {items}.".into(),
            pick_up: "You pick up {class}. You hold {object}.".into(),
            put_down_on: "You put down {class} on {receptacle}.".into(),
            put_down_in: "You put down {class} in {receptacle}.".into(),
            open: "You open {class}.".into(),
            close: "You close {class}.".into(),
            turn_on: "You turn on {class}.".into(),
            turn_off: "You turn off {class}.".into(),
            slice: "You slice {class}.".into(),
            not_executable: "Action is not executable, since {reason} when executing \"{command}\".".into(),
            nothing: "nothing".into(),
        }
    }
}

/// Substitutes `{key}` placeholders.
pub fn fill(template: &str, vars: &[(&str, &str)]) -> String {
    let mut out = template.to_string();
    for (key, value) in vars {
        out = out.replace(&format!("{{{key}}}"), value);
    }
    out
}

/// Aggregates entities into `"bowl (2, 3), cupcake (1)"`, classes sorted by
/// name and instance ids ascending.
pub fn aggregate<'a>(entities: impl IntoIterator<Item = &'a EntityRef>) -> String {
    let mut by_class: BTreeMap<&str, Vec<u32>> = BTreeMap::new();
    for e in entities {
        by_class.entry(e.class.as_str()).or_default().push(e.id);
    }
    by_class
        .into_iter()
        .map(|(class, mut ids)| {
            ids.sort_unstable();
            ids.dedup();
            let ids = ids
                .iter()
                .map(u32::to_string)
                .collect::<Vec<_>>()
                .join(", ");
            format!("{class} ({ids})")
        })
        .collect::<Vec<_>>()
        .join(", ")
}
