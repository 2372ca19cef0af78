//! Executes agent and control-flow nodes against a world and a policy.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::harness::task::TaskSpec;
use crate::harness::trace::{EventPayload, NodeRef, ObservationSource, Trace, TraceEvent};
use crate::memory::{EmbeddingProvider, EpisodicStore, WorkingMemory, DEFAULT_RETRIEVAL_BUDGET};
use crate::policy::{build_prompt, decide, Policy, PromptFlags, SkillGrammar};
use crate::sim::{GoalReport, Observation, World};
use crate::tree::{
    aggregate_parallel, Action, AgentDecision, AllowedFlows, ControlFlowType, DecisionBudget,
    FlowId, Mode, NodeId, NodeStatus, Tree,
};

/// Agent nodes deeper than this may not expand further.
pub const DEFAULT_MAX_DEPTH: u32 = 8;

const SEED_MIX: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EngineConfig {
    pub mode: Mode,
    pub working_memory: bool,
    pub flows: AllowedFlows,
    /// `None` uses the world profile's default.
    pub max_decisions: Option<u32>,
    pub retrieval_budget: usize,
    pub max_depth: u32,
    pub seed: u64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            mode: Mode::Reactree,
            working_memory: true,
            flows: AllowedFlows::ALL,
            max_decisions: None,
            retrieval_budget: DEFAULT_RETRIEVAL_BUDGET,
            max_depth: DEFAULT_MAX_DEPTH,
            seed: 0,
        }
    }
}

/// What an episode reads but does not own.
#[derive(Clone, Copy)]
pub struct EpisodeDeps<'a> {
    pub policy: &'a dyn Policy,
    pub store: Option<&'a EpisodicStore>,
    pub embedder: &'a dyn EmbeddingProvider,
}

#[derive(Debug, Clone)]
pub struct EpisodeOutcome {
    pub task_id: String,
    /// Status of the root agent node.
    pub status: NodeStatus,
    pub goal: GoalReport,
    pub budget: DecisionBudget,
    pub tree: Tree,
    pub world: World,
    pub working_memory: WorkingMemory,
    pub trace: Trace,
}

/// Runs one task from a fresh world and working memory.
pub fn run_episode(
    task: &TaskSpec,
    world: World,
    config: &EngineConfig,
    deps: EpisodeDeps<'_>,
) -> Result<EpisodeOutcome> {
    task.validate(&world)?;
    let cap = config
        .max_decisions
        .unwrap_or_else(|| world.profile.default_decision_cap());
    if let Some(store) = deps.store {
        store.check_embedder(deps.embedder)?;
    }
    let mut engine = Engine {
        tree: Tree::with_root(task.instruction.clone()),
        world,
        wm: WorkingMemory::new(),
        cap_hit: false,
        observations: 0,
        trace: Trace::default(),
        config,
        deps,
    };
    let budget = DecisionBudget::new(cap);
    let root = engine.tree.root();
    engine.emit(
        budget,
        EventPayload::NodeCreated {
            node: root,
            goal: task.instruction.clone(),
            parent_flow: None,
            depth: 0,
        },
    );
    let (status, budget) = engine.exec_agent_node(root, budget)?;
    let goal = task.goal.evaluate(&engine.world)?;
    engine.emit(
        budget,
        EventPayload::EpisodeResult {
            task_id: task.id.clone(),
            mode: config.mode,
            flows: config.flows,
            working_memory: config.working_memory,
            status,
            success: goal.success,
            ssr: goal.ssr,
            decisions: budget.used,
        },
    );
    Ok(EpisodeOutcome {
        task_id: task.id.clone(),
        status,
        goal,
        budget,
        tree: engine.tree,
        world: engine.world,
        working_memory: engine.wm,
        trace: engine.trace,
    })
}

struct Engine<'a> {
    tree: Tree,
    world: World,
    wm: WorkingMemory,
    /// Set once a node is stopped by the decision cap; every control flow
    /// above it then fails without running further children.
    cap_hit: bool,
    observations: u64,
    trace: Trace,
    config: &'a EngineConfig,
    deps: EpisodeDeps<'a>,
}

impl Engine<'_> {
    fn emit(&mut self, budget: DecisionBudget, payload: EventPayload) {
        let seq = self.trace.events.len() as u64;
        self.trace.events.push(TraceEvent {
            seq,
            budget,
            payload,
        });
    }

    fn observe(
        &mut self,
        node: NodeId,
        budget: DecisionBudget,
        source: ObservationSource,
        obs: Observation,
    ) {
        self.observations += 1;
        self.wm.update(&obs.sightings, self.observations);
        self.tree.agent_mut(node).push_observation(obs.text.clone());
        self.emit(
            budget,
            EventPayload::Observation {
                node,
                source,
                text: obs.text,
                error: obs.error,
            },
        );
    }

    fn finish(
        &mut self,
        node: NodeId,
        status: NodeStatus,
        budget: DecisionBudget,
        note: Option<String>,
    ) -> (NodeStatus, DecisionBudget) {
        self.tree.finish_agent(node, status);
        self.emit(
            budget,
            EventPayload::NodeResult {
                node: NodeRef::Agent(node),
                status,
                note,
            },
        );
        (status, budget)
    }

    fn examples(&self, node: NodeId) -> Result<Vec<String>> {
        let Some(store) = self.deps.store else {
            return Ok(Vec::new());
        };
        let seed = self.config.seed ^ u64::from(node.0).wrapping_mul(SEED_MIX);
        let goal = &self.tree.agent(node).subgoal;
        Ok(store
            .retrieve(self.deps.embedder, goal, self.config.retrieval_budget, seed)?
            .into_iter()
            .map(|e| e.trajectory.clone())
            .collect())
    }

    fn exec_agent_node(
        &mut self,
        node: NodeId,
        mut budget: DecisionBudget,
    ) -> Result<(NodeStatus, DecisionBudget)> {
        let examples = self.examples(node)?;
        let summary = self.world.summary();
        self.observe(node, budget, ObservationSource::Initial, summary);

        let flags = PromptFlags {
            mode: self.config.mode,
            working_memory: self.config.working_memory,
            profile: self.world.profile,
            flows: self.config.flows,
        };
        let grammar = SkillGrammar::new(self.world.profile, self.config.working_memory);
        let expand = match self.config.mode {
            Mode::Reactree => Some(self.config.flows),
            Mode::React => None,
        };
        let mut step = 0;

        loop {
            if budget.exhausted() {
                self.cap_hit = true;
                return Ok(self.finish(
                    node,
                    NodeStatus::Failure,
                    budget,
                    Some("decision cap reached".into()),
                ));
            }
            let bundle = {
                let agent = self.tree.agent(node);
                let lineage = self.tree.lineage(node);
                build_prompt(agent, lineage.as_ref(), &examples, &flags)
            };
            let goal = self.tree.agent(node).subgoal.clone();
            let out = decide(
                self.deps.policy,
                &bundle,
                &grammar,
                expand,
                node,
                &goal,
                &mut step,
            )?;
            budget = budget.spend();
            let line = out.decision.to_string();
            self.tree.agent_mut(node).push_action(line.clone());
            self.emit(
                budget,
                EventPayload::Decision {
                    node,
                    line,
                    decision: out.decision.kind().to_string(),
                    raw: out.raw,
                    attempts: out.attempts,
                    rejections: out.rejections,
                    input_tokens: out.input_tokens,
                    output_tokens: out.output_tokens,
                    note: out.note,
                },
            );

            match out.decision {
                AgentDecision::Done => {
                    return Ok(self.finish(node, NodeStatus::Success, budget, None));
                }
                AgentDecision::DeclareFailure => {
                    return Ok(self.finish(node, NodeStatus::Failure, budget, None));
                }
                _ if budget.exhausted() => {
                    self.cap_hit = true;
                    return Ok(self.finish(
                        node,
                        NodeStatus::Failure,
                        budget,
                        Some("decision cap reached".into()),
                    ));
                }
                AgentDecision::Think(_) => {
                    self.observe(node, budget, ObservationSource::Think, Observation::empty());
                }
                AgentDecision::Act(Action::Skill(cmd)) => {
                    let obs = self.world.step(&cmd);
                    self.observe(node, budget, ObservationSource::Environment, obs);
                }
                AgentDecision::Act(Action::Recall { class }) => {
                    let text = self.wm.recall(&class);
                    self.observe(
                        node,
                        budget,
                        ObservationSource::Recall,
                        Observation::ok(text, Vec::new()),
                    );
                }
                AgentDecision::Expand { flow, subgoals } => {
                    if self.tree.agent(node).depth >= self.config.max_depth {
                        let note = format!(
                            "expansion below depth {} refused; treated as failure",
                            self.config.max_depth
                        );
                        return Ok(self.finish(node, NodeStatus::Failure, budget, Some(note)));
                    }
                    let flow_id = self
                        .tree
                        .expand(node, flow, &subgoals, self.config.flows)
                        .expect("grammar only admits allowed, nonempty expansions");
                    let children = self.tree.flow(flow_id).children.clone();
                    self.emit(
                        budget,
                        EventPayload::Expansion {
                            node,
                            flow: flow_id,
                            flow_type: flow,
                            children: children.clone(),
                            subgoals,
                        },
                    );
                    for child in children {
                        let a = self.tree.agent(child);
                        let payload = EventPayload::NodeCreated {
                            node: child,
                            goal: a.subgoal.clone(),
                            parent_flow: a.parent_flow,
                            depth: a.depth,
                        };
                        self.emit(budget, payload);
                    }
                    let (status, budget) = self.exec_control_flow_node(flow_id, budget)?;
                    return Ok(self.finish(node, status, budget, None));
                }
            }
        }
    }

    fn exec_control_flow_node(
        &mut self,
        flow: FlowId,
        mut budget: DecisionBudget,
    ) -> Result<(NodeStatus, DecisionBudget)> {
        let kind = self.tree.flow(flow).flow;
        let children = self.tree.flow(flow).children.clone();
        let mut statuses = Vec::with_capacity(children.len());
        let mut early = None;
        for child in children {
            if self.cap_hit {
                break;
            }
            let (status, b) = self.exec_agent_node(child, budget)?;
            budget = b;
            statuses.push(status);
            match (kind, status) {
                (ControlFlowType::Sequence, NodeStatus::Failure) => {
                    early = Some(NodeStatus::Failure);
                    break;
                }
                (ControlFlowType::Fallback, NodeStatus::Success) => {
                    early = Some(NodeStatus::Success);
                    break;
                }
                _ => {}
            }
        }
        let status = if self.cap_hit {
            NodeStatus::Failure
        } else {
            early.unwrap_or(match kind {
                ControlFlowType::Sequence => NodeStatus::Success,
                ControlFlowType::Fallback => NodeStatus::Failure,
                ControlFlowType::Parallel => aggregate_parallel(&statuses),
            })
        };
        self.tree.finish_flow(flow, status);
        self.emit(
            budget,
            EventPayload::NodeResult {
                node: NodeRef::Flow(flow),
                status,
                note: None,
            },
        );
        Ok((status, budget))
    }
}
