//! Tasks, traces, metrics, suite runs, memory bootstrapping and rendering.

pub mod bootstrap;
pub mod metrics;
pub mod render;
pub mod replay;
pub mod suite;
pub mod task;
pub mod trace;

pub use bootstrap::{bootstrap, harvest_trace, BootstrapSummary};
pub use metrics::{compute_token_stats, Breakdown, EpisodeResult, SuiteReport, TokenStats};
pub use replay::{replay, replay_world, Replay};
pub use suite::{run_suite, run_task, PolicyFactory, PolicySource, RunContext, SuiteRun};
pub use task::{Manifest, TaskSpec};
pub use trace::{EventPayload, NodeRef, ObservationSource, Trace, TraceEvent};

use crate::tree::AllowedFlows;

/// Parses `all`, `seq+fb` or `seq`.
pub fn control_flow_config(flag: &str) -> crate::Result<AllowedFlows> {
    flag.parse().map_err(|e: String| crate::Error::Config(e))
}
