//! Rule-based, partially observable household text environment.
//!
//! The agent sees only its current room; objects inside closed receptacles
//! are hidden. Observation phrasing lives in [`Templates`] and can be
//! overridden per world file.

mod goal;
mod observe;
mod skill;
mod world;

use std::path::Path;

pub use goal::{class_key, GoalCondition, GoalReport, Predicate};
pub use observe::{aggregate, Observation, Sighting, Templates};
pub use skill::{EntityRef, SkillCommand, Verb};
pub use world::{
    AgentFile, AgentState, Location, Object, ObjectFile, Profile, Receptacle, ReceptacleFile,
    World, WorldFile,
};

pub(crate) use skill::{normalize_spaces, strip_words};

/// Loads a world file and returns the initial state and observation.
pub fn reset(world_file: impl AsRef<Path>) -> crate::Result<(World, Observation)> {
    let world = World::load(world_file)?;
    let obs = world.summary();
    Ok((world, obs))
}

#[cfg(test)]
mod tests;
