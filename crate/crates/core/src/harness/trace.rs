use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tree::{
    AllowedFlows, ControlFlowType, DecisionBudget, FlowId, Mode, NodeId, NodeStatus, Tree,
};

/// A node of either kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeRef {
    Agent(NodeId),
    Flow(FlowId),
}

/// Why an observation entered a node's context.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObservationSource {
    /// The room summary every node starts with.
    Initial,
    Environment,
    Recall,
    /// The empty observation after a thought.
    Think,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EventPayload {
    NodeCreated {
        node: NodeId,
        goal: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        parent_flow: Option<FlowId>,
        depth: u32,
    },
    Decision {
        node: NodeId,
        /// Canonical decision line as stored in the context.
        line: String,
        decision: String,
        raw: String,
        attempts: usize,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        rejections: Vec<String>,
        input_tokens: usize,
        output_tokens: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        note: Option<String>,
    },
    Observation {
        node: NodeId,
        source: ObservationSource,
        text: String,
        #[serde(default, skip_serializing_if = "std::ops::Not::not")]
        error: bool,
    },
    Expansion {
        node: NodeId,
        flow: FlowId,
        flow_type: ControlFlowType,
        children: Vec<NodeId>,
        subgoals: Vec<String>,
    },
    NodeResult {
        node: NodeRef,
        status: NodeStatus,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        note: Option<String>,
    },
    EpisodeResult {
        task_id: String,
        mode: Mode,
        flows: AllowedFlows,
        working_memory: bool,
        status: NodeStatus,
        success: bool,
        ssr: f64,
        decisions: u32,
    },
}

/// One trace line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub seq: u64,
    pub budget: DecisionBudget,
    #[serde(flatten)]
    pub payload: EventPayload,
}

impl TraceEvent {
    pub fn kind(&self) -> &'static str {
        match self.payload {
            EventPayload::NodeCreated { .. } => "node-created",
            EventPayload::Decision { .. } => "decision",
            EventPayload::Observation { .. } => "observation",
            EventPayload::Expansion { .. } => "expansion",
            EventPayload::NodeResult { .. } => "node-result",
            EventPayload::EpisodeResult { .. } => "episode-result",
        }
    }
}

/// A full episode log.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trace {
    pub events: Vec<TraceEvent>,
}

impl Trace {
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            out.push_str(&serde_json::to_string(e).expect("trace events serialize"));
            out.push('\n');
        }
        out
    }

    pub fn write_jsonl(&self, mut w: impl Write) -> Result<()> {
        w.write_all(self.to_jsonl().as_bytes())?;
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        std::fs::write(path, self.to_jsonl())?;
        Ok(())
    }

    pub fn read_jsonl(r: impl BufRead) -> Result<Self> {
        let mut events = Vec::new();
        for (i, line) in r.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let event: TraceEvent = serde_json::from_str(&line)
                .map_err(|e| Error::Trace(format!("line {}: {e}", i + 1)))?;
            events.push(event);
        }
        Ok(Self { events })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::load(path, e))?;
        Self::read_jsonl(std::io::BufReader::new(file)).map_err(|e| Error::load(path, e))
    }

    pub fn decisions(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.events.iter().filter_map(|e| match &e.payload {
            EventPayload::Decision {
                input_tokens,
                output_tokens,
                ..
            } => Some((*input_tokens, *output_tokens)),
            _ => None,
        })
    }

    pub fn decision_count(&self) -> usize {
        self.decisions().count()
    }

    pub fn episode_result(&self) -> Option<&EventPayload> {
        self.events
            .iter()
            .rev()
            .map(|e| &e.payload)
            .find(|p| matches!(p, EventPayload::EpisodeResult { .. }))
    }

    /// Reconstructs the tree, checking ids, alternation and sequence numbers.
    pub fn rebuild_tree(&self) -> Result<Tree> {
        let mut tree: Option<Tree> = None;
        let bad = |seq: u64, msg: String| Error::Trace(format!("event {seq}: {msg}"));
        for (i, event) in self.events.iter().enumerate() {
            if event.seq != i as u64 {
                return Err(bad(event.seq, format!("expected sequence number {i}")));
            }
            let seq = event.seq;
            let get = |tree: &Option<Tree>, node: NodeId| -> Result<()> {
                match tree {
                    Some(t) if (node.0 as usize) < t.agents.len() => Ok(()),
                    _ => Err(bad(seq, format!("unknown agent node {node}"))),
                }
            };
            match &event.payload {
                EventPayload::NodeCreated {
                    node,
                    goal,
                    parent_flow,
                    depth,
                } => match (&tree, parent_flow) {
                    (None, None) if node.0 == 0 => tree = Some(Tree::with_root(goal.clone())),
                    (Some(t), Some(_)) => {
                        get(&tree, *node)?;
                        let a = t.agent(*node);
                        if &a.subgoal != goal || a.parent_flow != *parent_flow || a.depth != *depth
                        {
                            return Err(bad(
                                seq,
                                format!("node {node} does not match its expansion"),
                            ));
                        }
                    }
                    _ => return Err(bad(seq, format!("unexpected creation of node {node}"))),
                },
                EventPayload::Decision { node, line, .. } => {
                    get(&tree, *node)?;
                    let t = tree.as_mut().expect("checked");
                    let a = t.agent_mut(*node);
                    if !matches!(
                        a.context.last(),
                        Some(crate::tree::ContextEntry::Observation(_))
                    ) {
                        return Err(bad(
                            seq,
                            format!("decision on node {node} without a preceding observation"),
                        ));
                    }
                    a.push_action(line.clone());
                }
                EventPayload::Observation { node, text, .. } => {
                    get(&tree, *node)?;
                    let t = tree.as_mut().expect("checked");
                    let a = t.agent_mut(*node);
                    if matches!(
                        a.context.last(),
                        Some(crate::tree::ContextEntry::Observation(_))
                    ) {
                        return Err(bad(
                            seq,
                            format!("two observations in a row on node {node}"),
                        ));
                    }
                    a.push_observation(text.clone());
                }
                EventPayload::Expansion {
                    node,
                    flow,
                    flow_type,
                    children,
                    subgoals,
                } => {
                    get(&tree, *node)?;
                    let t = tree.as_mut().expect("checked");
                    let id = t
                        .expand(*node, *flow_type, subgoals, AllowedFlows::ALL)
                        .map_err(|e| bad(seq, e.to_string()))?;
                    if id != *flow || &t.flow(id).children != children {
                        return Err(bad(seq, "expansion ids do not match creation order".into()));
                    }
                }
                EventPayload::NodeResult { node, status, .. } => {
                    let t = tree
                        .as_mut()
                        .ok_or_else(|| bad(seq, "result before root".into()))?;
                    if !status.is_terminal() {
                        return Err(bad(seq, "node result must be terminal".into()));
                    }
                    match node {
                        NodeRef::Agent(a) => {
                            if a.0 as usize >= t.agents.len() || t.agent(*a).status.is_terminal() {
                                return Err(bad(seq, format!("bad result for agent {a}")));
                            }
                            t.finish_agent(*a, *status);
                        }
                        NodeRef::Flow(f) => {
                            if f.0 as usize >= t.flows.len() || t.flow(*f).status.is_terminal() {
                                return Err(bad(seq, format!("bad result for flow {f}")));
                            }
                            t.finish_flow(*f, *status);
                        }
                    }
                }
                EventPayload::EpisodeResult { .. } => {}
            }
        }
        tree.ok_or_else(|| Error::Trace("trace has no root node".into()))
    }
}
