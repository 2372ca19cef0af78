use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::world::{Location, World};
use crate::{Error, Result};

/// Lowercased class name with everything but ASCII alphanumerics removed, so
/// `"coffee table"` matches the predicate token `coffeetable`.
pub fn class_key(class: &str) -> String {
    class
        .chars()
        .filter(char::is_ascii_alphanumeric)
        .map(|c| c.to_ascii_lowercase())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Predicate {
    On { object: String, receptacle: String },
    Inside { object: String, receptacle: String },
    TurnOn { receptacle: String },
    Hold { object: String },
}

impl Predicate {
    pub fn parse(key: &str) -> Result<Self> {
        let parts: Vec<&str> = key.split('_').collect();
        let bad = || Error::Goal(format!("unrecognized predicate key {key:?}"));
        let pred = match parts.as_slice() {
            ["on", o, r] => Predicate::On {
                object: class_key(o),
                receptacle: class_key(r),
            },
            ["inside", o, r] => Predicate::Inside {
                object: class_key(o),
                receptacle: class_key(r),
            },
            ["turnOn", r] => Predicate::TurnOn {
                receptacle: class_key(r),
            },
            ["hold", o] => Predicate::Hold {
                object: class_key(o),
            },
            _ => return Err(bad()),
        };
        if pred.classes().iter().any(|c| c.is_empty()) {
            return Err(bad());
        }
        Ok(pred)
    }

    fn classes(&self) -> Vec<&str> {
        match self {
            Predicate::On { object, receptacle } | Predicate::Inside { object, receptacle } => {
                vec![object, receptacle]
            }
            Predicate::TurnOn { receptacle } => vec![receptacle],
            Predicate::Hold { object } => vec![object],
        }
    }

    /// Number of distinct configurations in `world` that satisfy this predicate.
    pub fn count_satisfying(&self, world: &World) -> u32 {
        let count = match self {
            Predicate::On { object, receptacle } | Predicate::Inside { object, receptacle } => {
                let want_inside = matches!(self, Predicate::Inside { .. });
                world
                    .objects
                    .iter()
                    .filter(|o| class_key(&o.entity.class) == *object)
                    .filter(|o| match o.location {
                        Location::In(r) => {
                            let rec = &world.receptacles[r];
                            class_key(&rec.entity.class) == *receptacle
                                && rec.openable == want_inside
                        }
                        _ => false,
                    })
                    .count()
            }
            Predicate::TurnOn { receptacle } => world
                .receptacles
                .iter()
                .filter(|r| class_key(&r.entity.class) == *receptacle && r.on)
                .filter(|r| !(world.turn_on_requires_closed && r.openable && r.open))
                .count(),
            Predicate::Hold { object } => world
                .objects
                .iter()
                .filter(|o| o.location == Location::Hand && class_key(&o.entity.class) == *object)
                .count(),
        };
        count as u32
    }
}

/// Goal predicates keyed in the `on_juice_coffeetable` form, each with a
/// required count.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GoalCondition {
    pub predicates: BTreeMap<String, u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoalReport {
    pub success: bool,
    pub ssr: f64,
    /// Satisfied and required units per predicate key.
    pub per_predicate: BTreeMap<String, (u32, u32)>,
}

impl GoalCondition {
    pub fn new<K: Into<String>>(items: impl IntoIterator<Item = (K, u32)>) -> Self {
        Self {
            predicates: items.into_iter().map(|(k, v)| (k.into(), v)).collect(),
        }
    }

    pub fn total_units(&self) -> u32 {
        self.predicates.values().sum()
    }

    /// Checks key syntax, counts, and that every class exists in `world`.
    pub fn validate(&self, world: &World) -> Result<()> {
        if self.predicates.is_empty() {
            return Err(Error::Goal("goal has no predicates".into()));
        }
        let vocabulary: BTreeSet<String> = world.vocabulary();
        for (key, &count) in &self.predicates {
            if count == 0 {
                return Err(Error::Goal(format!(
                    "{key}: required count must be at least 1"
                )));
            }
            let pred = Predicate::parse(key)?;
            for class in pred.classes() {
                if !vocabulary.contains(class) {
                    return Err(Error::Goal(format!(
                        "{key}: class {class:?} does not exist in world {:?}",
                        world.name
                    )));
                }
            }
        }
        Ok(())
    }

    /// Each predicate contributes `required` units; a unit is satisfied by one
    /// distinct satisfying configuration.
    pub fn evaluate(&self, world: &World) -> Result<GoalReport> {
        let mut per_predicate = BTreeMap::new();
        let mut satisfied_total = 0u32;
        for (key, &required) in &self.predicates {
            let pred = Predicate::parse(key)?;
            let satisfied = pred.count_satisfying(world).min(required);
            satisfied_total += satisfied;
            per_predicate.insert(key.clone(), (satisfied, required));
        }
        let total = self.total_units();
        let ssr = if total == 0 {
            1.0
        } else {
            f64::from(satisfied_total) / f64::from(total)
        };
        Ok(GoalReport {
            success: satisfied_total == total,
            ssr,
            per_predicate,
        })
    }
}

impl fmt::Display for GoalCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self
            .predicates
            .iter()
            .map(|(k, v)| format!("'{k}':{v}"))
            .collect();
        write!(f, "{{{}}}", items.join(", "))
    }
}
