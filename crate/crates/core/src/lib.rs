//! Goal-scoped agent trees coordinated by behavior-tree control flow.
//!
//! An episode starts with a single agent node holding the task goal. Each
//! agent node runs a think/act loop against a text environment and may
//! *expand* its goal into subgoals under a sequence, fallback or parallel
//! control-flow node, growing the tree while it executes. Agent nodes share a
//! per-episode working memory of object sightings and draw in-context
//! examples from an episodic store of subgoal-level trajectories.
//!
//! Module map:
//!
//! - [`tree`] / [`engine`]: the tree data model and its executor.
//! - [`policy`]: prompt assembly, the decision grammar, scripted and remote policies.
//! - [`memory`]: episodic retrieval and working memory.
//! - [`sim`]: the partially observable household simulator.
//! - [`harness`]: tasks, traces, metrics, suites and rendering.

pub mod engine;
pub mod error;
pub mod harness;
pub mod memory;
pub mod policy;
pub mod sim;
pub mod tokens;
pub mod tree;

pub use engine::{run_episode, EngineConfig, EpisodeDeps, EpisodeOutcome};
pub use error::{Error, Result};
pub use tree::{
    aggregate_parallel, AgentDecision, AgentNode, ControlFlowNode, ControlFlowType, DecisionBudget,
    FlowId, Mode, NodeId, NodeStatus, Tree,
};
