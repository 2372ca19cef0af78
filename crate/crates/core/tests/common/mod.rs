#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use reactree_core::harness::TaskSpec;
use reactree_core::policy::{Policy, PolicyError, PolicyRequest, ScriptedPolicy, Transcript};
use reactree_core::sim::{GoalCondition, Profile, World};

pub fn assets() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../assets")
}

pub fn task(id: &str) -> TaskSpec {
    TaskSpec::load(assets().join(format!("tasks/{id}.toml"))).expect("shipped task loads")
}

pub fn house_world() -> World {
    World::load(assets().join("worlds/house.toml")).expect("shipped world loads")
}

pub fn extended_world() -> World {
    World::load(assets().join("worlds/kitchen_extended.toml")).expect("shipped world loads")
}

pub const TINY_WORLD: &str = r#"
name = "tiny"
rooms = ["kitchen 1"]
[agent]
room = "kitchen 1"
[[receptacle]]
name = "table 1"
room = "kitchen 1"
[[object]]
name = "apple 1"
at = "table 1"
"#;

pub fn tiny_world() -> World {
    World::from_toml(TINY_WORLD).unwrap()
}

/// A task on the tiny world whose goal is trivially valid.
pub fn tiny_task(instruction: &str) -> TaskSpec {
    TaskSpec {
        id: "tiny".into(),
        world: PathBuf::from("tiny.toml"),
        instruction: instruction.into(),
        task_type: "tiny".into(),
        goal: GoalCondition::new([("on_apple_table", 1)]),
        transcript: None,
    }
}

pub fn scripted(nodes: &[(&str, &[&str])]) -> ScriptedPolicy {
    let mut text = String::from("name = \"inline\"\n");
    for (goal, lines) in nodes {
        text.push_str("[[node]]\n");
        text.push_str(&format!("goal = {goal:?}\nlines = ["));
        for l in *lines {
            text.push_str(&format!("{l:?}, "));
        }
        text.push_str("]\n");
    }
    ScriptedPolicy::new(Transcript::from_toml(&text).unwrap())
}

/// Every "<verb> <entity>" string for the world's profile, plus targets
/// that do not exist.
pub fn command_vocabulary(world: &World) -> Vec<String> {
    let mut entities: Vec<String> = world.rooms.iter().map(|r| r.to_string()).collect();
    entities.extend(world.receptacles.iter().map(|r| r.entity.to_string()));
    entities.extend(world.objects.iter().map(|o| o.entity.to_string()));
    entities.extend(
        world
            .objects
            .iter()
            .map(|o| format!("{} {}", o.entity.class, o.entity.id + 3)),
    );
    entities.push("unicorn 1".into());
    let verbs = match world.profile {
        Profile::Household => Profile::Household.verbs(),
        Profile::Extended => Profile::Extended.verbs(),
    };
    let mut out = Vec::new();
    for v in verbs {
        for e in &entities {
            out.push(format!("{} {e}", v.phrase()));
        }
    }
    out
}

/// Random but reproducible decision lines: thoughts, skills (valid or
/// not), recalls, expansions, terminators and malformed output.
pub struct FuzzPolicy {
    seed: u64,
    commands: Vec<String>,
    classes: Vec<String>,
    /// Chance of `done`/`failure` per decision.
    stop_rate: f64,
}

impl FuzzPolicy {
    pub fn new(world: &World, seed: u64, stop_rate: f64) -> Self {
        let mut classes: Vec<String> = world
            .objects
            .iter()
            .map(|o| o.entity.class.clone())
            .collect();
        classes.sort();
        classes.dedup();
        Self {
            seed,
            commands: command_vocabulary(world),
            classes,
            stop_rate,
        }
    }

    pub fn arc(world: &World, seed: u64, stop_rate: f64) -> Arc<dyn Policy> {
        Arc::new(Self::new(world, seed, stop_rate))
    }
}

impl Policy for FuzzPolicy {
    fn complete(&self, request: &PolicyRequest<'_>) -> Result<String, PolicyError> {
        let mix = self.seed
            ^ u64::from(request.node.0).wrapping_mul(0x100_0000_01B3)
            ^ (request.step as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
        let mut rng = ChaCha8Rng::seed_from_u64(mix);
        let roll: f64 = rng.gen();
        let stop = self.stop_rate;
        let line = if roll < stop / 2.0 {
            "Act: done".to_string()
        } else if roll < stop {
            "Act: failure".to_string()
        } else if roll < stop + 0.25 {
            "Think: let me consider the next step".to_string()
        } else if roll < stop + 0.65 {
            format!(
                "Act: {}",
                self.commands[rng.gen_range(0..self.commands.len())]
            )
        } else if roll < stop + 0.70 {
            format!(
                "Act: recall location of {}",
                self.classes[rng.gen_range(0..self.classes.len())]
            )
        } else if roll < stop + 0.85 {
            let flow = ["sequence", "fallback", "parallel"][rng.gen_range(0..3)];
            let n = rng.gen_range(1..=3);
            let goals: Vec<String> = (0..n)
                .map(|_| format!("subgoal {}", rng.gen_range(0..20)))
                .collect();
            format!(
                "Expand: {{'control_flow': '{flow}', 'conditions': '{}'}}",
                goals.join(", ")
            )
        } else {
            [
                "hmm",
                "Act: teleport to kitchen 1",
                "Expand: {'control_flow'",
                "Act: pick up",
                "",
            ][rng.gen_range(0..5)]
            .to_string()
        };
        Ok(line)
    }
}
