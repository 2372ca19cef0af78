use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::sim::Sighting;

/// Last known location of one object instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WmEntry {
    pub instance: u32,
    pub room: String,
    pub receptacle: Option<String>,
    /// Episode step (observation counter) of the latest sighting.
    pub step: u64,
}

/// Per-episode map from object class to sighted instances.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorkingMemory {
    sightings: BTreeMap<String, Vec<WmEntry>>,
}

impl WorkingMemory {
    pub fn new() -> Self {
        Self::default()
    }

    /// Upserts each sighting by (class, instance); entries stay sorted by id.
    pub fn update(&mut self, sightings: &[Sighting], step: u64) {
        for s in sightings {
            let entries = self.sightings.entry(s.class.clone()).or_default();
            let entry = WmEntry {
                instance: s.instance,
                room: s.room.clone(),
                receptacle: s.receptacle.clone(),
                step,
            };
            match entries.binary_search_by_key(&s.instance, |e| e.instance) {
                Ok(i) => entries[i] = entry,
                Err(i) => entries.insert(i, entry),
            }
        }
    }

    pub fn entries(&self, class: &str) -> &[WmEntry] {
        self.sightings.get(class).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn is_empty(&self) -> bool {
        self.sightings.is_empty()
    }

    /// One sentence per known instance, or a not-seen sentence.
    pub fn recall(&self, class: &str) -> String {
        let entries = self.entries(class);
        if entries.is_empty() {
            return format!("You have not seen {class} before.");
        }
        entries
            .iter()
            .map(|e| match &e.receptacle {
                Some(r) => format!("You saw {class} {} near {r} in {}.", e.instance, e.room),
                None => format!("You saw {class} {} in {}.", e.instance, e.room),
            })
            .collect::<Vec<_>>()
            .join(" ")
    }
}
