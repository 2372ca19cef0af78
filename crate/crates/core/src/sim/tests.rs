use super::*;

const HOUSE: &str = include_str!("../../../../assets/worlds/house.toml");

fn house() -> World {
    World::from_toml(HOUSE).unwrap()
}

fn run(world: &mut World, cmd: &str) -> Observation {
    world.step(&cmd.parse().unwrap())
}

#[test]
fn initial_observation_lists_rooms_and_current_room() {
    let obs = house().summary();
    assert_eq!(
        obs.text,
        "You are in the house, and there are 4 rooms: bathroom (1), bedroom (1), kitchen (1), \
         living room (1). You are in the middle of a bathroom (1). Looking quickly around the room, \
         you see bathroom cabinet (1), bathroom counter (1), faucet (1), sink (1), toilet (1), \
         towel rack (1), washing machine (1)."
    );
    assert!(!obs.error);
    assert!(obs.sightings.is_empty());
}

#[test]
fn single_room_world() {
    let w = World::from_toml(
        r#"
name = "studio"
rooms = ["kitchen 1"]
[agent]
room = "kitchen 1"
"#,
    )
    .unwrap();
    let text = w.summary().text;
    assert!(text.starts_with("You are in the house, and there are 1 rooms: kitchen (1)."));
    assert!(text.ends_with("you see nothing."));
}

#[test]
fn closed_receptacles_hide_contents() {
    let mut w = house();
    run(&mut w, "go to kitchen 1");
    let obs = run(&mut w, "go to fridge 2");
    assert_eq!(
        obs.text,
        "You arrive at the fridge (2). The fridge (2) is closed. You see fridge (2)."
    );
    assert!(obs.sightings.is_empty());

    let obs = run(&mut w, "open fridge 2");
    assert_eq!(obs.text, "You open fridge. You see fridge (2), juice (1).");
    assert_eq!(
        obs.sightings,
        vec![Sighting {
            class: "juice".into(),
            instance: 1,
            room: "kitchen 1".into(),
            receptacle: Some("fridge 2".into()),
        }]
    );
}

#[test]
fn pick_up_and_hand_capacity() {
    let mut w = house();
    run(&mut w, "go to kitchen 1");
    run(&mut w, "go to kitchen counter 1");
    let obs = run(&mut w, "pick up wine glass 1");
    assert_eq!(obs.text, "You pick up wine glass. You hold wine glass (1).");

    let before = w.clone();
    let obs = run(&mut w, "pick up water glass 1");
    assert!(obs.error);
    assert!(obs.text.starts_with("Action is not executable, since"));
    assert_eq!(w, before);
}

#[test]
fn put_down_requires_proximity() {
    let mut w = house();
    run(&mut w, "go to kitchen 1");
    run(&mut w, "go to kitchen counter 2");
    run(&mut w, "pick up apple 1");
    run(&mut w, "go to living room 1");
    let before = w.clone();
    assert!(run(&mut w, "put down apple 1").error);
    assert_eq!(w, before);
    run(&mut w, "go to coffee table 1");
    let obs = run(&mut w, "put down apple 1");
    assert_eq!(obs.text, "You put down apple on coffee table.");
    assert_eq!(
        obs.sightings[0].receptacle.as_deref(),
        Some("coffee table 1")
    );
}

#[test]
fn turn_on_dishwasher() {
    let mut w = house();
    run(&mut w, "go to kitchen 1");
    assert!(run(&mut w, "turn on dishwasher 1").error, "not near it yet");
    run(&mut w, "go to dishwasher 1");
    let obs = run(&mut w, "turn on dishwasher 1");
    assert_eq!(obs.text, "You turn on dishwasher.");
    assert!(run(&mut w, "turn on dishwasher 1").error);
    // household profile has no turn off
    assert!(run(&mut w, "turn off dishwasher 1").error);
}

#[test]
fn go_to_object_sets_proximity_to_its_receptacle() {
    let mut w = house();
    run(&mut w, "go to kitchen 1");
    let obs = run(&mut w, "go to milk 1");
    assert!(obs.text.starts_with("You arrive at the kitchen table (1)."));
    assert!(!run(&mut w, "pick up milk 1").error);
    // cannot go to a hidden object
    assert!(run(&mut w, "go to juice 1").error);
}

#[test]
fn holding_is_reported_on_arrival() {
    let mut w = house();
    run(&mut w, "go to kitchen 1");
    run(&mut w, "go to kitchen counter 2");
    run(&mut w, "pick up apple 1");
    let obs = run(&mut w, "go to living room 1");
    assert!(obs.text.ends_with("You hold apple (1)."), "{}", obs.text);
    assert!(w.summary().text.ends_with("You hold apple (1)."));
}

#[test]
fn goal_partial_and_full() {
    let mut w = house();
    let goal = GoalCondition::new([("on_juice_coffeetable", 1), ("on_wine_coffeetable", 1)]);
    goal.validate(&w).unwrap();
    let wine = w
        .objects
        .iter()
        .position(|o| o.entity == EntityRef::new("wine", 1))
        .unwrap();
    let table = w
        .receptacles
        .iter()
        .position(|r| r.entity == EntityRef::new("coffee table", 1))
        .unwrap();
    w.objects[wine].location = Location::In(table);
    let report = goal.evaluate(&w).unwrap();
    assert!(!report.success);
    assert_eq!(report.ssr, 0.5);
    assert_eq!(report.per_predicate["on_wine_coffeetable"], (1, 1));
}

fn dishwasher_world(with_fork: bool) -> World {
    let fork = if with_fork {
        "[[object]]\nname = \"cutlery fork 1\"\nat = \"dishwasher 1\"\n"
    } else {
        "[[object]]\nname = \"cutlery fork 1\"\nat = \"kitchen 1\"\n"
    };
    World::from_toml(&format!(
        r#"
name = "dish"
rooms = ["kitchen 1"]
[agent]
room = "kitchen 1"
[[receptacle]]
name = "dishwasher 1"
room = "kitchen 1"
openable = true
switchable = true
on = true
[[object]]
name = "water glass 1"
at = "dishwasher 1"
[[object]]
name = "wine glass 1"
at = "dishwasher 1"
{fork}"#
    ))
    .unwrap()
}

#[test]
fn task31_dishwasher_goal() {
    let goal = GoalCondition::new([
        ("inside_waterglass_dishwasher", 1),
        ("inside_wineglass_dishwasher", 1),
        ("inside_cutleryfork_dishwasher", 1),
        ("turnOn_dishwasher", 1),
    ]);
    let full = dishwasher_world(true);
    goal.validate(&full).unwrap();
    let report = goal.evaluate(&full).unwrap();
    assert!(report.success);
    assert_eq!(report.ssr, 1.0);

    let report = goal.evaluate(&dishwasher_world(false)).unwrap();
    assert!(!report.success);
    assert_eq!(report.ssr, 0.75);

    // open dishwasher does not count as running
    let mut open = dishwasher_world(true);
    open.receptacles[0].open = true;
    assert_eq!(goal.evaluate(&open).unwrap().ssr, 0.75);
    open.turn_on_requires_closed = false;
    assert_eq!(goal.evaluate(&open).unwrap().ssr, 1.0);
}

#[test]
fn empty_world_satisfies_nothing() {
    let w =
        World::from_toml("name = \"e\"\nrooms = [\"kitchen 1\"]\n[agent]\nroom = \"kitchen 1\"\n")
            .unwrap();
    let goal = GoalCondition::new([("on_juice_coffeetable", 1)]);
    let report = goal.evaluate(&w).unwrap();
    assert_eq!((report.success, report.ssr), (false, 0.0));
    assert!(goal.validate(&w).is_err(), "unknown classes are rejected");
}

#[test]
fn goal_counts_cap_at_required() {
    let mut w = dishwasher_world(true);
    let goal = GoalCondition::new([("inside_waterglass_dishwasher", 2)]);
    assert_eq!(goal.evaluate(&w).unwrap().ssr, 0.5);
    w.objects.push(Object {
        entity: EntityRef::new("water glass", 2),
        location: Location::In(0),
        slices: 0,
    });
    w.objects.push(Object {
        entity: EntityRef::new("water glass", 3),
        location: Location::In(0),
        slices: 0,
    });
    assert_eq!(
        goal.evaluate(&w).unwrap().per_predicate["inside_waterglass_dishwasher"],
        (2, 2)
    );
}

#[test]
fn malformed_world_files_are_rejected() {
    assert!(World::from_toml("name = 1").is_err());
    let dup =
        "name = \"d\"\nrooms = [\"kitchen 1\", \"kitchen 1\"]\n[agent]\nroom = \"kitchen 1\"\n";
    assert!(World::from_toml(dup).is_err());
    let bad_open = "name = \"d\"\nrooms = [\"kitchen 1\"]\n[agent]\nroom = \"kitchen 1\"\n\
        [[receptacle]]\nname = \"table 1\"\nroom = \"kitchen 1\"\nopen = true\n";
    assert!(World::from_toml(bad_open).is_err());
    let err = World::load("/nonexistent/world.toml").unwrap_err();
    assert!(err.to_string().contains("/nonexistent/world.toml"));
}

#[test]
fn slice_in_extended_profile() {
    let mut w = World::from_toml(
        r#"
name = "thor"
profile = "extended"
rooms = ["kitchen 1"]
[agent]
room = "kitchen 1"
[[receptacle]]
name = "countertop 1"
room = "kitchen 1"
[[object]]
name = "knife 1"
at = "countertop 1"
[[object]]
name = "potato 2"
at = "countertop 1"
slices = 3
"#,
    )
    .unwrap();
    run(&mut w, "go to countertop 1");
    assert!(run(&mut w, "slice potato 2").error, "needs a knife");
    run(&mut w, "pick up knife 1");
    let obs = run(&mut w, "slice potato 2");
    assert!(!obs.error);
    assert_eq!(
        obs.text,
        "You slice potato. You see countertop (1), potato (3, 4, 5). You hold knife (1)."
    );
    assert_eq!(w.objects.len(), 4);
    w.check_invariants().unwrap();
}

#[test]
fn available_skills_all_succeed_here() {
    let mut w = house();
    run(&mut w, "go to kitchen 1");
    run(&mut w, "go to fridge 2");
    let skills = w.available_skills();
    assert!(skills.contains(&"open fridge 2".parse().unwrap()));
    assert!(!skills.contains(&"close fridge 2".parse().unwrap()));
    for cmd in skills {
        let mut probe = w.clone();
        let obs = probe.step(&cmd);
        assert!(!obs.error, "{cmd}: {}", obs.text);
    }
}
