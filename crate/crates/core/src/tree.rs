//! Agent-tree data model.
//!
//! Agent nodes and control-flow nodes live in one arena ([`Tree`]) and are
//! numbered in two separate creation-order sequences, so agent numbering
//! matches the usual picture of the tree (root agent is 0, control-flow nodes
//! are unnumbered in it).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::sim::SkillCommand;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FlowId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for FlowId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "f{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeStatus {
    Running,
    Success,
    Failure,
}

impl NodeStatus {
    pub fn is_terminal(self) -> bool {
        self != NodeStatus::Running
    }
}

impl fmt::Display for NodeStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NodeStatus::Running => "Running",
            NodeStatus::Success => "Success",
            NodeStatus::Failure => "Failure",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ControlFlowType {
    Sequence,
    Fallback,
    Parallel,
}

impl ControlFlowType {
    pub const ALL: [ControlFlowType; 3] = [
        ControlFlowType::Sequence,
        ControlFlowType::Fallback,
        ControlFlowType::Parallel,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ControlFlowType::Sequence => "sequence",
            ControlFlowType::Fallback => "fallback",
            ControlFlowType::Parallel => "parallel",
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            ControlFlowType::Sequence => "→",
            ControlFlowType::Fallback => "?",
            ControlFlowType::Parallel => "⇒",
        }
    }
}

impl fmt::Display for ControlFlowType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ControlFlowType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "sequence" => Ok(ControlFlowType::Sequence),
            "fallback" => Ok(ControlFlowType::Fallback),
            "parallel" => Ok(ControlFlowType::Parallel),
            other => Err(format!("unknown control flow {other:?}")),
        }
    }
}

/// Tree execution or the flat think/act baseline (no expansion).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Reactree,
    React,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Reactree => "reactree",
            Mode::React => "react",
        })
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "reactree" => Ok(Mode::Reactree),
            "react" => Ok(Mode::React),
            other => Err(format!(
                "unknown mode {other:?} (expected reactree or react)"
            )),
        }
    }
}

/// The control-flow types an episode may expand into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct AllowedFlows {
    parallel: bool,
    fallback: bool,
}

impl AllowedFlows {
    pub const ALL: AllowedFlows = AllowedFlows {
        parallel: true,
        fallback: true,
    };
    pub const SEQ_FB: AllowedFlows = AllowedFlows {
        parallel: false,
        fallback: true,
    };
    pub const SEQ: AllowedFlows = AllowedFlows {
        parallel: false,
        fallback: false,
    };

    pub fn contains(self, flow: ControlFlowType) -> bool {
        match flow {
            ControlFlowType::Sequence => true,
            ControlFlowType::Fallback => self.fallback,
            ControlFlowType::Parallel => self.parallel,
        }
    }

    pub fn types(self) -> Vec<ControlFlowType> {
        ControlFlowType::ALL
            .into_iter()
            .filter(|f| self.contains(*f))
            .collect()
    }

    pub fn flag(self) -> &'static str {
        match (self.fallback, self.parallel) {
            (true, true) => "all",
            (true, false) => "seq+fb",
            (false, false) => "seq",
            (false, true) => "seq+par",
        }
    }
}

impl Default for AllowedFlows {
    fn default() -> Self {
        AllowedFlows::ALL
    }
}

impl FromStr for AllowedFlows {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "all" => Ok(AllowedFlows::ALL),
            "seq+fb" => Ok(AllowedFlows::SEQ_FB),
            "seq" => Ok(AllowedFlows::SEQ),
            other => Err(format!(
                "unknown control-flow configuration {other:?} (expected all, seq+fb or seq)"
            )),
        }
    }
}

impl From<AllowedFlows> for String {
    fn from(f: AllowedFlows) -> String {
        f.flag().to_string()
    }
}

impl TryFrom<String> for AllowedFlows {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

/// Episode-wide count of sampled decisions against its cap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecisionBudget {
    pub used: u32,
    pub cap: u32,
}

impl DecisionBudget {
    pub fn new(cap: u32) -> Self {
        Self { used: 0, cap }
    }

    pub fn exhausted(self) -> bool {
        self.used >= self.cap
    }

    #[must_use]
    pub fn spend(self) -> Self {
        Self {
            used: self.used + 1,
            ..self
        }
    }
}

/// An executable action: a simulator skill or a working-memory recall.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Action {
    Skill(SkillCommand),
    Recall { class: String },
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Skill(cmd) => write!(f, "{cmd}"),
            Action::Recall { class } => write!(f, "recall location of {class}"),
        }
    }
}

/// A parsed policy output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AgentDecision {
    Think(String),
    Act(Action),
    Expand {
        flow: ControlFlowType,
        subgoals: Vec<String>,
    },
    Done,
    DeclareFailure,
}

impl AgentDecision {
    pub fn kind(&self) -> &'static str {
        match self {
            AgentDecision::Think(_) => "think",
            AgentDecision::Act(_) => "act",
            AgentDecision::Expand { .. } => "expand",
            AgentDecision::Done => "done",
            AgentDecision::DeclareFailure => "failure",
        }
    }
}

/// Canonical one-line rendering (`Think: ...`, `Act: ...`, `Expand: {...}`).
impl fmt::Display for AgentDecision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AgentDecision::Think(text) => write!(f, "Think: {text}"),
            AgentDecision::Act(action) => write!(f, "Act: {action}"),
            AgentDecision::Expand { flow, subgoals } => write!(
                f,
                "Expand: {{'control_flow': '{flow}', 'conditions': '{}'}}",
                subgoals.join(", ")
            ),
            AgentDecision::Done => f.write_str("Act: done"),
            AgentDecision::DeclareFailure => f.write_str("Act: failure"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "text", rename_all = "lowercase")]
pub enum ContextEntry {
    Observation(String),
    Action(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgentNode {
    pub id: NodeId,
    pub subgoal: String,
    /// Alternating observation/action records, starting with an observation.
    pub context: Vec<ContextEntry>,
    pub status: NodeStatus,
    pub parent_flow: Option<FlowId>,
    pub child_flow: Option<FlowId>,
    /// Agent-node depth; the root is 0 and each expansion adds 1.
    pub depth: u32,
}

impl AgentNode {
    pub fn push_observation(&mut self, text: impl Into<String>) {
        debug_assert!(!matches!(
            self.context.last(),
            Some(ContextEntry::Observation(_))
        ));
        self.context.push(ContextEntry::Observation(text.into()));
    }

    pub fn push_action(&mut self, line: impl Into<String>) {
        debug_assert!(matches!(
            self.context.last(),
            Some(ContextEntry::Observation(_))
        ));
        self.context.push(ContextEntry::Action(line.into()));
    }

    /// Goal line followed by context lines; empty observations are omitted.
    pub fn trajectory_text(&self) -> String {
        let mut lines = vec![format!("Your task is to: {}", self.subgoal)];
        lines.extend(render_context(&self.context));
        lines.join("\n")
    }
}

pub fn render_context(context: &[ContextEntry]) -> impl Iterator<Item = String> + '_ {
    context.iter().filter_map(|entry| match entry {
        ContextEntry::Observation(text) if text.is_empty() => None,
        ContextEntry::Observation(text) | ContextEntry::Action(text) => Some(text.clone()),
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ControlFlowNode {
    pub id: FlowId,
    pub flow: ControlFlowType,
    pub parent: NodeId,
    pub children: Vec<NodeId>,
    pub status: NodeStatus,
}

/// Parent goal, flow and siblings of a non-root agent node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lineage<'a> {
    pub parent_goal: &'a str,
    pub flow: ControlFlowType,
    pub siblings: Vec<&'a str>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExpandError {
    #[error("expansion needs at least one subgoal")]
    NoSubgoals,
    #[error("control flow {0} is not allowed in this configuration")]
    FlowNotAllowed(ControlFlowType),
    #[error("node {0} has already expanded")]
    AlreadyExpanded(NodeId),
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Tree {
    pub agents: Vec<AgentNode>,
    pub flows: Vec<ControlFlowNode>,
}

impl Tree {
    pub fn with_root(goal: impl Into<String>) -> Self {
        let mut tree = Tree::default();
        tree.push_agent(goal.into(), None, 0);
        tree
    }

    fn push_agent(&mut self, subgoal: String, parent_flow: Option<FlowId>, depth: u32) -> NodeId {
        let id = NodeId(self.agents.len() as u32);
        self.agents.push(AgentNode {
            id,
            subgoal,
            context: Vec::new(),
            status: NodeStatus::Running,
            parent_flow,
            child_flow: None,
            depth,
        });
        id
    }

    pub fn root(&self) -> NodeId {
        NodeId(0)
    }

    pub fn agent(&self, id: NodeId) -> &AgentNode {
        &self.agents[id.0 as usize]
    }

    pub fn agent_mut(&mut self, id: NodeId) -> &mut AgentNode {
        &mut self.agents[id.0 as usize]
    }

    pub fn flow(&self, id: FlowId) -> &ControlFlowNode {
        &self.flows[id.0 as usize]
    }

    /// Attaches a control-flow child to `parent` with one running agent node
    /// per subgoal, all created eagerly in listed order.
    pub fn expand(
        &mut self,
        parent: NodeId,
        flow: ControlFlowType,
        subgoals: &[String],
        allowed: AllowedFlows,
    ) -> Result<FlowId, ExpandError> {
        if subgoals.is_empty() {
            return Err(ExpandError::NoSubgoals);
        }
        if !allowed.contains(flow) {
            return Err(ExpandError::FlowNotAllowed(flow));
        }
        if self.agent(parent).child_flow.is_some() {
            return Err(ExpandError::AlreadyExpanded(parent));
        }
        let flow_id = FlowId(self.flows.len() as u32);
        let depth = self.agent(parent).depth + 1;
        let children = subgoals
            .iter()
            .map(|g| self.push_agent(g.clone(), Some(flow_id), depth))
            .collect();
        self.flows.push(ControlFlowNode {
            id: flow_id,
            flow,
            parent,
            children,
            status: NodeStatus::Running,
        });
        self.agent_mut(parent).child_flow = Some(flow_id);
        Ok(flow_id)
    }

    pub fn lineage(&self, node: NodeId) -> Option<Lineage<'_>> {
        let flow = self.flow(self.agent(node).parent_flow?);
        Some(Lineage {
            parent_goal: &self.agent(flow.parent).subgoal,
            flow: flow.flow,
            siblings: flow
                .children
                .iter()
                .map(|&c| self.agent(c).subgoal.as_str())
                .collect(),
        })
    }

    /// Sets a terminal status; terminal statuses never change afterwards.
    pub fn finish_agent(&mut self, node: NodeId, status: NodeStatus) {
        let agent = self.agent_mut(node);
        assert!(status.is_terminal(), "cannot finish with Running");
        assert!(
            !agent.status.is_terminal(),
            "agent {node} already finished as {}",
            agent.status
        );
        agent.status = status;
    }

    pub fn finish_flow(&mut self, flow: FlowId, status: NodeStatus) {
        let node = &mut self.flows[flow.0 as usize];
        assert!(status.is_terminal() && !node.status.is_terminal());
        node.status = status;
    }
}

/// Majority vote over terminal statuses; ties fail.
pub fn aggregate_parallel(statuses: &[NodeStatus]) -> NodeStatus {
    let successes = statuses
        .iter()
        .filter(|s| **s == NodeStatus::Success)
        .count();
    let failures = statuses
        .iter()
        .filter(|s| **s == NodeStatus::Failure)
        .count();
    if successes > failures {
        NodeStatus::Success
    } else {
        NodeStatus::Failure
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use NodeStatus::{Failure as F, Success as S};

    #[test]
    fn majority_vote() {
        assert_eq!(aggregate_parallel(&[S, F, S]), S);
        assert_eq!(aggregate_parallel(&[S, F]), F);
        assert_eq!(aggregate_parallel(&[S, S]), S);
        for n in 1..6 {
            assert_eq!(aggregate_parallel(&vec![F; n]), F);
        }
    }

    fn goals(items: &[&str]) -> Vec<String> {
        items.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn expansion_numbers_agents_in_creation_order() {
        let mut tree = Tree::with_root("root");
        let f0 = tree
            .expand(
                NodeId(0),
                ControlFlowType::Parallel,
                &goals(&["a", "b"]),
                AllowedFlows::ALL,
            )
            .unwrap();
        let f1 = tree
            .expand(
                NodeId(1),
                ControlFlowType::Sequence,
                &goals(&["c", "d"]),
                AllowedFlows::ALL,
            )
            .unwrap();
        let f2 = tree
            .expand(
                NodeId(3),
                ControlFlowType::Fallback,
                &goals(&["e", "f", "g"]),
                AllowedFlows::ALL,
            )
            .unwrap();
        assert_eq!((f0, f1, f2), (FlowId(0), FlowId(1), FlowId(2)));
        assert_eq!(
            tree.flow(f2).children,
            vec![NodeId(5), NodeId(6), NodeId(7)]
        );
        assert_eq!(tree.agent(NodeId(5)).depth, 3);

        let lineage = tree.lineage(NodeId(6)).unwrap();
        assert_eq!(lineage.parent_goal, "c");
        assert_eq!(lineage.flow, ControlFlowType::Fallback);
        assert_eq!(lineage.siblings, vec!["e", "f", "g"]);
        assert!(tree.lineage(NodeId(0)).is_none());
    }

    #[test]
    fn expansion_preconditions() {
        let mut tree = Tree::with_root("root");
        assert_eq!(
            tree.expand(NodeId(0), ControlFlowType::Sequence, &[], AllowedFlows::ALL),
            Err(ExpandError::NoSubgoals)
        );
        assert_eq!(
            tree.expand(
                NodeId(0),
                ControlFlowType::Parallel,
                &goals(&["a"]),
                AllowedFlows::SEQ_FB
            ),
            Err(ExpandError::FlowNotAllowed(ControlFlowType::Parallel))
        );
        tree.expand(
            NodeId(0),
            ControlFlowType::Sequence,
            &goals(&["a"]),
            AllowedFlows::SEQ,
        )
        .unwrap();
        assert_eq!(
            tree.expand(
                NodeId(0),
                ControlFlowType::Sequence,
                &goals(&["b"]),
                AllowedFlows::SEQ
            ),
            Err(ExpandError::AlreadyExpanded(NodeId(0)))
        );
        assert!(tree.agents.len() == 2 && tree.flows.len() == 1);
    }

    #[test]
    fn flow_configurations() {
        assert_eq!("all".parse::<AllowedFlows>().unwrap().types().len(), 3);
        assert_eq!(
            "seq+fb".parse::<AllowedFlows>().unwrap().types(),
            vec![ControlFlowType::Sequence, ControlFlowType::Fallback]
        );
        assert_eq!(
            "seq".parse::<AllowedFlows>().unwrap().types(),
            vec![ControlFlowType::Sequence]
        );
        assert!("par".parse::<AllowedFlows>().is_err());
    }

    #[test]
    #[should_panic(expected = "already finished")]
    fn terminal_status_is_final() {
        let mut tree = Tree::with_root("root");
        tree.finish_agent(NodeId(0), S);
        tree.finish_agent(NodeId(0), F);
    }

    #[test]
    fn trajectory_skips_empty_observations() {
        let mut tree = Tree::with_root("fetch");
        let n = tree.agent_mut(NodeId(0));
        n.push_observation("You are in the house.");
        n.push_action("Think: hmm");
        n.push_observation("");
        n.push_action("Act: done");
        assert_eq!(
            n.trajectory_text(),
            "Your task is to: fetch\nYou are in the house.\nThink: hmm\nAct: done"
        );
    }
}
