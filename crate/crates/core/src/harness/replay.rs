use super::metrics::EpisodeResult;
use super::trace::{EventPayload, NodeRef, ObservationSource, Trace};
use crate::error::{Error, Result};
use crate::sim::{GoalCondition, SkillCommand, World};
use crate::tree::{NodeStatus, Tree};

/// A trace that passed every check, with what was derived from it.
#[derive(Debug, Clone)]
pub struct Replay {
    pub tree: Tree,
    pub result: EpisodeResult,
    /// Checks that ran, for display.
    pub checks: Vec<&'static str>,
}

fn fail<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Trace(msg.into()))
}

/// Rebuilds the tree and checks structural and budget invariants.
pub fn replay(trace: &Trace, task_type: &str) -> Result<Replay> {
    let tree = trace.rebuild_tree()?;
    let mut checks = vec!["sequence numbers contiguous", "tree rebuilds from events"];

    let mut decisions = 0u32;
    let mut prev_used = 0u32;
    let cap = trace.events.first().map(|e| e.budget.cap).unwrap_or(0);
    for e in &trace.events {
        if e.budget.cap != cap {
            return fail(format!("event {}: decision cap changed", e.seq));
        }
        if e.budget.used < prev_used {
            return fail(format!("event {}: decision count went down", e.seq));
        }
        if matches!(e.payload, EventPayload::Decision { .. }) {
            decisions += 1;
        }
        if e.budget.used != decisions {
            return fail(format!(
                "event {}: budget says {} decisions, {} recorded",
                e.seq, e.budget.used, decisions
            ));
        }
        if e.budget.used > cap {
            return fail(format!("event {}: decision cap exceeded", e.seq));
        }
        prev_used = e.budget.used;
    }
    checks.push("budget counts every decision and never exceeds the cap");

    for flow in &tree.flows {
        if flow.children.is_empty() {
            return fail(format!("flow {} has no children", flow.id));
        }
        if flow.status != tree.agent(flow.parent).status {
            return fail(format!(
                "agent {} ended {} but its flow {} ended {}",
                flow.parent,
                tree.agent(flow.parent).status,
                flow.id,
                flow.status
            ));
        }
    }
    checks.push("expanding agents return their flow's status");

    let Some(EventPayload::EpisodeResult {
        status,
        decisions: reported,
        ..
    }) = trace.episode_result()
    else {
        return fail("trace has no episode result");
    };
    if *status != tree.agent(tree.root()).status {
        return fail("episode status differs from the root node's status");
    }
    if *reported != decisions {
        return fail("episode decision count differs from decision events");
    }
    if let Some(e) = trace.events.iter().find(|e| {
        matches!(
            e.payload,
            EventPayload::NodeResult {
                node: NodeRef::Agent(_),
                status: NodeStatus::Running,
                ..
            }
        )
    }) {
        return fail(format!("event {}: running is not a result", e.seq));
    }
    checks.push("episode result agrees with the tree");

    let result = EpisodeResult::from_trace(trace, task_type)
        .ok_or_else(|| Error::Trace("trace has no episode result".into()))?;
    Ok(Replay {
        tree,
        result,
        checks,
    })
}

/// Re-executes every skill in the trace against `world`, checks each
/// observation text, then re-scores `goal` against the reported result.
pub fn replay_world(trace: &Trace, mut world: World, goal: &GoalCondition) -> Result<()> {
    let mut pending: Option<SkillCommand> = None;
    for e in &trace.events {
        match &e.payload {
            EventPayload::Decision { line, .. } => {
                pending = line
                    .strip_prefix("Act: ")
                    .and_then(|rest| rest.parse::<SkillCommand>().ok());
            }
            EventPayload::Observation { source, text, .. } => match source {
                ObservationSource::Environment => {
                    let cmd = pending.take().ok_or_else(|| {
                        Error::Trace(format!("event {}: observation without a skill", e.seq))
                    })?;
                    let obs = world.step(&cmd);
                    if &obs.text != text {
                        return fail(format!(
                            "event {}: replayed {cmd:?} gave {:?}, trace has {text:?}",
                            e.seq, obs.text
                        ));
                    }
                }
                ObservationSource::Initial => {
                    if &world.summary().text != text {
                        return fail(format!("event {}: node summary differs on replay", e.seq));
                    }
                }
                ObservationSource::Recall | ObservationSource::Think => {}
            },
            _ => {}
        }
    }
    let report = goal.evaluate(&world)?;
    match trace.episode_result() {
        Some(EventPayload::EpisodeResult { success, ssr, .. })
            if *success == report.success && *ssr == report.ssr =>
        {
            Ok(())
        }
        Some(_) => fail(format!(
            "replayed goal check ({}, {}) differs from the trace",
            report.success, report.ssr
        )),
        None => fail("trace has no episode result"),
    }
}
