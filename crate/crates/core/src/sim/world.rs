use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::goal::class_key;
use super::observe::{aggregate, fill, Observation, Sighting, Templates};
use super::skill::{EntityRef, SkillCommand, Verb};
use crate::{Error, Result};

/// Which primitive skills the environment supports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    /// go to, pick up, put down, open, close, turn on.
    #[default]
    Household,
    /// Household plus slice and turn off.
    Extended,
}

impl Profile {
    pub fn verbs(self) -> &'static [Verb] {
        match self {
            Profile::Household => &[
                Verb::GoTo,
                Verb::PickUp,
                Verb::PutDown,
                Verb::Open,
                Verb::Close,
                Verb::TurnOn,
            ],
            Profile::Extended => &[
                Verb::GoTo,
                Verb::PickUp,
                Verb::PutDown,
                Verb::Slice,
                Verb::Open,
                Verb::Close,
                Verb::TurnOn,
                Verb::TurnOff,
            ],
        }
    }

    /// Default per-episode decision cap for this profile.
    pub fn default_decision_cap(self) -> u32 {
        match self {
            Profile::Household => 200,
            Profile::Extended => 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Receptacle {
    pub entity: EntityRef,
    pub room: usize,
    pub openable: bool,
    pub open: bool,
    pub switchable: bool,
    pub on: bool,
}

impl Receptacle {
    fn closed(&self) -> bool {
        self.openable && !self.open
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Location {
    Floor(usize),
    In(usize),
    Hand,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Object {
    pub entity: EntityRef,
    pub location: Location,
    /// Pieces produced when sliced; 0 means not sliceable.
    pub slices: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgentState {
    pub room: usize,
    /// The single receptacle the agent stands at, if any.
    pub near: Option<usize>,
    /// Held objects (indices into `World::objects`) in pick-up order.
    pub held: Vec<usize>,
}

/// Full ground-truth state of one household episode.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct World {
    pub name: String,
    pub profile: Profile,
    pub hand_capacity: usize,
    pub turn_on_requires_closed: bool,
    pub slice_tool: String,
    pub rooms: Vec<EntityRef>,
    pub receptacles: Vec<Receptacle>,
    pub objects: Vec<Object>,
    pub agent: AgentState,
    pub templates: Templates,
}

// ---- file format ----

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorldFile {
    pub name: String,
    #[serde(default)]
    pub profile: Profile,
    #[serde(default = "default_capacity")]
    pub hand_capacity: usize,
    #[serde(default = "default_true")]
    pub turn_on_requires_closed: bool,
    #[serde(default = "default_slice_tool")]
    pub slice_tool: String,
    pub rooms: Vec<String>,
    pub agent: AgentFile,
    #[serde(default, rename = "receptacle")]
    pub receptacles: Vec<ReceptacleFile>,
    #[serde(default, rename = "object")]
    pub objects: Vec<ObjectFile>,
    #[serde(default)]
    pub templates: Templates,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentFile {
    pub room: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReceptacleFile {
    pub name: String,
    pub room: String,
    #[serde(default)]
    pub openable: bool,
    #[serde(default)]
    pub open: bool,
    #[serde(default)]
    pub switchable: bool,
    #[serde(default)]
    pub on: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectFile {
    pub name: String,
    /// A receptacle label, a room label (floor), or `"hand"`.
    pub at: String,
    #[serde(default)]
    pub slices: u32,
}

fn default_capacity() -> usize {
    1
}
fn default_true() -> bool {
    true
}
fn default_slice_tool() -> String {
    "knife".into()
}

impl World {
    pub fn load(path: impl AsRef<Path>) -> Result<World> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::load(path, e))?;
        World::from_toml(&text).map_err(|e| match e {
            Error::World(msg) => Error::load(path, msg),
            other => other,
        })
    }

    pub fn from_toml(text: &str) -> Result<World> {
        let file: WorldFile = toml::from_str(text).map_err(|e| Error::World(e.to_string()))?;
        World::from_file(file)
    }

    pub fn from_file(file: WorldFile) -> Result<World> {
        let bad = |m: String| Error::World(m);
        let parse = |label: &str| label.parse::<EntityRef>().map_err(bad);

        let mut rooms = Vec::new();
        for r in &file.rooms {
            let room = parse(r)?;
            if rooms.contains(&room) {
                return Err(bad(format!("duplicate room {room}")));
            }
            rooms.push(room);
        }
        if rooms.is_empty() {
            return Err(bad("world declares no rooms".into()));
        }
        let room_index = |label: &str| -> Result<usize> {
            let e = parse(label)?;
            rooms
                .iter()
                .position(|r| *r == e)
                .ok_or_else(|| bad(format!("unknown room {label:?}")))
        };

        let mut receptacles: Vec<Receptacle> = Vec::new();
        for r in &file.receptacles {
            let entity = parse(&r.name)?;
            if receptacles.iter().any(|x| x.entity == entity) || rooms.contains(&entity) {
                return Err(bad(format!("duplicate entity {entity}")));
            }
            if r.open && !r.openable {
                return Err(bad(format!("{entity} is open but not openable")));
            }
            if r.on && !r.switchable {
                return Err(bad(format!("{entity} is on but not switchable")));
            }
            receptacles.push(Receptacle {
                entity,
                room: room_index(&r.room)?,
                openable: r.openable,
                open: r.open,
                switchable: r.switchable,
                on: r.on,
            });
        }

        let mut objects: Vec<Object> = Vec::new();
        let mut held = Vec::new();
        for o in &file.objects {
            let entity = parse(&o.name)?;
            if objects.iter().any(|x| x.entity == entity)
                || receptacles.iter().any(|x| x.entity == entity)
                || rooms.contains(&entity)
            {
                return Err(bad(format!("duplicate entity {entity}")));
            }
            let location = if o.at.trim().eq_ignore_ascii_case("hand") {
                held.push(objects.len());
                Location::Hand
            } else {
                let at = parse(&o.at)?;
                if let Some(i) = receptacles.iter().position(|r| r.entity == at) {
                    Location::In(i)
                } else if let Some(i) = rooms.iter().position(|r| *r == at) {
                    Location::Floor(i)
                } else {
                    return Err(bad(format!("{entity}: unknown location {:?}", o.at)));
                }
            };
            objects.push(Object {
                entity,
                location,
                slices: o.slices,
            });
        }
        if file.hand_capacity == 0 {
            return Err(bad("hand_capacity must be at least 1".into()));
        }
        if held.len() > file.hand_capacity {
            return Err(bad("agent starts holding more than hand_capacity".into()));
        }

        let world = World {
            name: file.name,
            profile: file.profile,
            hand_capacity: file.hand_capacity,
            turn_on_requires_closed: file.turn_on_requires_closed,
            slice_tool: file.slice_tool,
            agent: AgentState {
                room: room_index(&file.agent.room)?,
                near: None,
                held,
            },
            rooms,
            receptacles,
            objects,
            templates: file.templates,
        };
        world.check_invariants().map_err(bad)?;
        Ok(world)
    }

    /// Normalized class keys of every room, receptacle and object class.
    pub fn vocabulary(&self) -> BTreeSet<String> {
        self.rooms
            .iter()
            .chain(self.receptacles.iter().map(|r| &r.entity))
            .chain(self.objects.iter().map(|o| &o.entity))
            .map(|e| class_key(&e.class))
            .collect()
    }

    pub fn room_label(&self, room: usize) -> String {
        self.rooms[room].to_string()
    }

    pub fn held_objects(&self) -> impl Iterator<Item = &Object> {
        self.agent.held.iter().map(|&i| &self.objects[i])
    }

    /// Location invariants: every object has exactly one location, open
    /// implies openable, on implies switchable, hand contents match `held`.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let mut seen = BTreeSet::new();
        for o in &self.objects {
            if !seen.insert(&o.entity) {
                return Err(format!("object {} appears twice", o.entity));
            }
            match o.location {
                Location::Floor(r) if r >= self.rooms.len() => {
                    return Err(format!("{} on a nonexistent floor", o.entity))
                }
                Location::In(r) if r >= self.receptacles.len() => {
                    return Err(format!("{} in a nonexistent receptacle", o.entity))
                }
                _ => {}
            }
        }
        for r in &self.receptacles {
            if r.open && !r.openable {
                return Err(format!("{} open but not openable", r.entity));
            }
            if r.on && !r.switchable {
                return Err(format!("{} on but not switchable", r.entity));
            }
        }
        let in_hand: BTreeSet<usize> = self
            .objects
            .iter()
            .enumerate()
            .filter(|(_, o)| o.location == Location::Hand)
            .map(|(i, _)| i)
            .collect();
        let held: BTreeSet<usize> = self.agent.held.iter().copied().collect();
        if in_hand != held || held.len() != self.agent.held.len() {
            return Err("hand contents disagree with held list".into());
        }
        if self.agent.held.len() > self.hand_capacity {
            return Err("holding more than hand capacity".into());
        }
        if let Some(n) = self.agent.near {
            if self.receptacles[n].room != self.agent.room {
                return Err("agent is near a receptacle in another room".into());
            }
        }
        Ok(())
    }

    // ---- visibility ----

    /// Whether `object` can currently be seen: in the agent's room, on the
    /// floor or in a receptacle that is not closed.
    pub fn is_visible(&self, object: usize) -> bool {
        match self.objects[object].location {
            Location::Floor(r) => r == self.agent.room,
            Location::In(r) => {
                let rec = &self.receptacles[r];
                rec.room == self.agent.room && !rec.closed()
            }
            Location::Hand => false,
        }
    }

    fn reachable(&self, object: usize) -> bool {
        self.is_visible(object)
            && match self.objects[object].location {
                Location::Floor(_) => true,
                Location::In(r) => self.agent.near == Some(r),
                Location::Hand => false,
            }
    }

    fn sighting(&self, object: usize) -> Option<Sighting> {
        let o = &self.objects[object];
        let (room, receptacle) = match o.location {
            Location::Floor(r) => (r, None),
            Location::In(r) => (
                self.receptacles[r].room,
                Some(self.receptacles[r].entity.to_string()),
            ),
            Location::Hand => return None,
        };
        Some(Sighting {
            class: o.entity.class.clone(),
            instance: o.entity.id,
            room: self.room_label(room),
            receptacle,
        })
    }

    fn contents(&self, receptacle: usize) -> Vec<usize> {
        if self.receptacles[receptacle].closed() {
            return Vec::new();
        }
        (0..self.objects.len())
            .filter(|&i| self.objects[i].location == Location::In(receptacle))
            .collect()
    }

    fn floor_objects(&self, room: usize) -> Vec<usize> {
        (0..self.objects.len())
            .filter(|&i| self.objects[i].location == Location::Floor(room))
            .collect()
    }

    // ---- rendering ----

    fn hold_clause(&self) -> Option<String> {
        if self.agent.held.is_empty() {
            return None;
        }
        let held: Vec<&EntityRef> = self.held_objects().map(|o| &o.entity).collect();
        Some(fill(&self.templates.hold, &[("items", &aggregate(held))]))
    }

    fn items_or_nothing(&self, entities: Vec<&EntityRef>) -> String {
        if entities.is_empty() {
            self.templates.nothing.clone()
        } else {
            aggregate(entities)
        }
    }

    /// Receptacles plus floor objects of a room, and the floor sightings.
    fn look_around(&self, room: usize) -> (String, Vec<Sighting>) {
        let floor = self.floor_objects(room);
        let entities: Vec<&EntityRef> = self
            .receptacles
            .iter()
            .filter(|r| r.room == room)
            .map(|r| &r.entity)
            .chain(floor.iter().map(|&i| &self.objects[i].entity))
            .collect();
        let sightings = floor.iter().filter_map(|&i| self.sighting(i)).collect();
        (self.items_or_nothing(entities), sightings)
    }

    /// The receptacle itself plus its visible contents.
    fn see_at(&self, receptacle: usize) -> (String, Vec<Sighting>) {
        let contents = self.contents(receptacle);
        let entities: Vec<&EntityRef> = std::iter::once(&self.receptacles[receptacle].entity)
            .chain(contents.iter().map(|&i| &self.objects[i].entity))
            .collect();
        let sightings = contents.iter().filter_map(|&i| self.sighting(i)).collect();
        (
            fill(&self.templates.see, &[("items", &aggregate(entities))]),
            sightings,
        )
    }

    fn join(parts: impl IntoIterator<Item = String>) -> String {
        parts
            .into_iter()
            .filter(|p| !p.is_empty())
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// House overview plus a look around the current room. Used at reset and
    /// as the opening observation of every agent node.
    pub fn summary(&self) -> Observation {
        let t = &self.templates;
        let rooms = aggregate(&self.rooms);
        let count = self.rooms.len().to_string();
        let room = self.rooms[self.agent.room].display_paren();
        let (items, sightings) = self.look_around(self.agent.room);
        let text = Self::join(
            [
                fill(&t.house, &[("count", &count), ("rooms", &rooms)]),
                fill(&t.room_look, &[("room", &room), ("items", &items)]),
            ]
            .into_iter()
            .chain(self.hold_clause()),
        );
        Observation::ok(text, sightings)
    }

    // ---- skills ----

    fn not_executable(&self, cmd: &SkillCommand, reason: impl AsRef<str>) -> Observation {
        Observation::error(fill(
            &self.templates.not_executable,
            &[("reason", reason.as_ref()), ("command", &cmd.to_string())],
        ))
    }

    fn find_receptacle(&self, e: &EntityRef) -> Option<usize> {
        self.receptacles.iter().position(|r| r.entity == *e)
    }

    fn find_object(&self, e: &EntityRef) -> Option<usize> {
        self.objects.iter().position(|o| o.entity == *e)
    }

    /// Applies one skill. Inapplicable skills leave the world untouched and
    /// return an error-flagged observation.
    pub fn step(&mut self, cmd: &SkillCommand) -> Observation {
        if !self.profile.verbs().contains(&cmd.verb) {
            return self.not_executable(cmd, format!("\"{}\" is not supported here", cmd.verb));
        }
        let result = match cmd.verb {
            Verb::GoTo => self.go_to(cmd),
            Verb::PickUp => self.pick_up(cmd),
            Verb::PutDown => self.put_down(cmd),
            Verb::Open | Verb::Close => self.open_close(cmd),
            Verb::TurnOn | Verb::TurnOff => self.switch(cmd),
            Verb::Slice => self.slice(cmd),
        };
        match result {
            Ok(obs) => obs,
            Err(reason) => self.not_executable(cmd, reason),
        }
    }

    fn go_to(&mut self, cmd: &SkillCommand) -> std::result::Result<Observation, String> {
        let target = &cmd.target;
        if let Some(room) = self.rooms.iter().position(|r| r == target) {
            self.agent.room = room;
            self.agent.near = None;
            let (items, sightings) = self.look_around(room);
            let text = Self::join(
                [fill(
                    &self.templates.move_room,
                    &[("room", &target.display_paren()), ("items", &items)],
                )]
                .into_iter()
                .chain(self.hold_clause()),
            );
            return Ok(Observation::ok(text, sightings));
        }
        let receptacle = match self.find_receptacle(target) {
            Some(r) => Some(r),
            None => match self.find_object(target) {
                Some(o) if self.is_visible(o) => match self.objects[o].location {
                    Location::In(r) => Some(r),
                    _ => None,
                },
                Some(o) if self.objects[o].location == Location::Hand => {
                    return Err(format!("the agent is already holding {target}"))
                }
                Some(_) => return Err(format!("the agent cannot see {target}")),
                None => return Err(format!("{target} does not exist")),
            },
        };
        let Some(r) = receptacle else {
            // a visible object lying on the floor
            self.agent.near = None;
            let text = Self::join(
                [fill(
                    &self.templates.arrive,
                    &[("target", &target.display_paren())],
                )]
                .into_iter()
                .chain(self.hold_clause()),
            );
            let o = self.find_object(target).expect("checked above");
            return Ok(Observation::ok(
                text,
                self.sighting(o).into_iter().collect(),
            ));
        };
        let rec = &self.receptacles[r];
        if rec.room != self.agent.room {
            return Err(format!(
                "{target} is not in {}",
                self.room_label(self.agent.room)
            ));
        }
        self.agent.near = Some(r);
        let rec = &self.receptacles[r];
        let target_paren = rec.entity.display_paren();
        let mut parts = vec![fill(&self.templates.arrive, &[("target", &target_paren)])];
        if rec.openable {
            let status = if rec.open {
                &self.templates.is_open
            } else {
                &self.templates.is_closed
            };
            parts.push(fill(status, &[("target", &target_paren)]));
        }
        let (see, sightings) = self.see_at(r);
        parts.push(see);
        parts.extend(self.hold_clause());
        Ok(Observation::ok(Self::join(parts), sightings))
    }

    fn pick_up(&mut self, cmd: &SkillCommand) -> std::result::Result<Observation, String> {
        let target = &cmd.target;
        let o = self
            .find_object(target)
            .ok_or_else(|| format!("{target} is not a movable object"))?;
        if self.objects[o].location == Location::Hand {
            return Err(format!("the agent is already holding {target}"));
        }
        if self.agent.held.len() >= self.hand_capacity {
            return Err("the agent's hands are full".into());
        }
        if !self.reachable(o) {
            return Err(format!("the agent is not close to {target}"));
        }
        self.objects[o].location = Location::Hand;
        self.agent.held.push(o);
        let class = &target.class;
        let text = fill(
            &self.templates.pick_up,
            &[("class", class), ("object", &target.display_paren())],
        );
        Ok(Observation::ok(text, Vec::new()))
    }

    fn put_down(&mut self, cmd: &SkillCommand) -> std::result::Result<Observation, String> {
        let target = &cmd.target;
        let pos = self
            .agent
            .held
            .iter()
            .position(|&i| self.objects[i].entity == *target)
            .ok_or_else(|| format!("the agent is not holding {target}"))?;
        let r = self
            .agent
            .near
            .ok_or_else(|| "the agent is not close to any receptacle".to_string())?;
        let rec = &self.receptacles[r];
        if rec.closed() {
            return Err(format!("{} is closed", rec.entity));
        }
        let o = self.agent.held.remove(pos);
        self.objects[o].location = Location::In(r);
        let rec = &self.receptacles[r];
        let template = if rec.openable {
            &self.templates.put_down_in
        } else {
            &self.templates.put_down_on
        };
        let text = fill(
            template,
            &[("class", &target.class), ("receptacle", &rec.entity.class)],
        );
        Ok(Observation::ok(
            text,
            self.sighting(o).into_iter().collect(),
        ))
    }

    fn near_receptacle(&self, target: &EntityRef) -> std::result::Result<usize, String> {
        let r = self
            .find_receptacle(target)
            .ok_or_else(|| format!("{target} is not a receptacle"))?;
        if self.agent.near != Some(r) {
            return Err(format!("the agent is not close to {target}"));
        }
        Ok(r)
    }

    fn open_close(&mut self, cmd: &SkillCommand) -> std::result::Result<Observation, String> {
        let target = &cmd.target;
        let r = self.near_receptacle(target)?;
        let opening = cmd.verb == Verb::Open;
        let rec = &mut self.receptacles[r];
        if !rec.openable {
            return Err(format!("{target} cannot be opened or closed"));
        }
        if rec.open == opening {
            return Err(format!(
                "{target} is already {}",
                if opening { "open" } else { "closed" }
            ));
        }
        rec.open = opening;
        let class = target.class.as_str();
        if opening {
            let (see, sightings) = self.see_at(r);
            let text = Self::join([fill(&self.templates.open, &[("class", class)]), see]);
            Ok(Observation::ok(text, sightings))
        } else {
            Ok(Observation::ok(
                fill(&self.templates.close, &[("class", class)]),
                Vec::new(),
            ))
        }
    }

    fn switch(&mut self, cmd: &SkillCommand) -> std::result::Result<Observation, String> {
        let target = &cmd.target;
        let r = self.near_receptacle(target)?;
        let turning_on = cmd.verb == Verb::TurnOn;
        let rec = &mut self.receptacles[r];
        if !rec.switchable {
            return Err(format!("{target} cannot be switched"));
        }
        if rec.on == turning_on {
            return Err(format!(
                "{target} is already {}",
                if turning_on { "on" } else { "off" }
            ));
        }
        rec.on = turning_on;
        let template = if turning_on {
            &self.templates.turn_on
        } else {
            &self.templates.turn_off
        };
        Ok(Observation::ok(
            fill(template, &[("class", &target.class)]),
            Vec::new(),
        ))
    }

    fn holds_slice_tool(&self) -> bool {
        let tool = self.slice_tool.to_lowercase();
        self.held_objects()
            .any(|o| o.entity.class.to_lowercase().contains(&tool))
    }

    fn slice(&mut self, cmd: &SkillCommand) -> std::result::Result<Observation, String> {
        let target = &cmd.target;
        let o = self
            .find_object(target)
            .ok_or_else(|| format!("{target} is not a movable object"))?;
        if !self.holds_slice_tool() {
            return Err(format!("the agent is not holding a {}", self.slice_tool));
        }
        if !self.reachable(o) {
            return Err(format!("the agent is not close to {target}"));
        }
        let pieces = self.objects[o].slices;
        if pieces == 0 {
            return Err(format!("{target} cannot be sliced"));
        }
        let class = target.class.clone();
        let location = self.objects[o].location;
        let next_id = self
            .objects
            .iter()
            .filter(|x| x.entity.class == class)
            .map(|x| x.entity.id)
            .max()
            .unwrap_or(0)
            + 1;
        // the sliced instance is replaced in place by the first piece
        self.objects[o] = Object {
            entity: EntityRef::new(class.clone(), next_id),
            location,
            slices: 0,
        };
        for k in 1..pieces {
            self.objects.push(Object {
                entity: EntityRef::new(class.clone(), next_id + k),
                location,
                slices: 0,
            });
        }
        let mut parts = vec![fill(&self.templates.slice, &[("class", &class)])];
        let sightings = match location {
            Location::In(r) => {
                let (see, sightings) = self.see_at(r);
                parts.push(see);
                sightings
            }
            _ => (0..self.objects.len())
                .filter(|&i| {
                    self.objects[i].entity.class == class && self.objects[i].location == location
                })
                .filter_map(|i| self.sighting(i))
                .collect(),
        };
        parts.extend(self.hold_clause());
        Ok(Observation::ok(Self::join(parts), sightings))
    }

    /// Every command that would currently succeed.
    pub fn available_skills(&self) -> Vec<SkillCommand> {
        let verbs = self.profile.verbs();
        let has = |v: Verb| verbs.contains(&v);
        let mut out = Vec::new();
        let room = self.agent.room;

        for r in &self.rooms {
            out.push(SkillCommand::new(Verb::GoTo, r.clone()));
        }
        for rec in self.receptacles.iter().filter(|r| r.room == room) {
            out.push(SkillCommand::new(Verb::GoTo, rec.entity.clone()));
        }
        for (i, o) in self.objects.iter().enumerate() {
            if self.is_visible(i) {
                out.push(SkillCommand::new(Verb::GoTo, o.entity.clone()));
            }
        }
        if self.agent.held.len() < self.hand_capacity {
            for (i, o) in self.objects.iter().enumerate() {
                if self.reachable(i) {
                    out.push(SkillCommand::new(Verb::PickUp, o.entity.clone()));
                }
            }
        }
        if let Some(n) = self.agent.near {
            let rec = &self.receptacles[n];
            if !rec.closed() {
                for o in self.held_objects() {
                    out.push(SkillCommand::new(Verb::PutDown, o.entity.clone()));
                }
            }
            if rec.openable {
                let verb = if rec.open { Verb::Close } else { Verb::Open };
                out.push(SkillCommand::new(verb, rec.entity.clone()));
            }
            if rec.switchable {
                if !rec.on {
                    out.push(SkillCommand::new(Verb::TurnOn, rec.entity.clone()));
                } else if has(Verb::TurnOff) {
                    out.push(SkillCommand::new(Verb::TurnOff, rec.entity.clone()));
                }
            }
        }
        if has(Verb::Slice) && self.holds_slice_tool() {
            for (i, o) in self.objects.iter().enumerate() {
                if o.slices > 0 && self.reachable(i) {
                    out.push(SkillCommand::new(Verb::Slice, o.entity.clone()));
                }
            }
        }
        out.retain(|c| has(c.verb));
        out
    }
}
