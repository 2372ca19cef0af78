use serde::Serialize;

use super::suite::{run_task, PolicyFactory, RunContext};
use super::task::TaskSpec;
use crate::engine::EngineConfig;
use crate::error::Result;
use crate::memory::{EmbeddingProvider, EpisodicStore};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct BootstrapSummary {
    pub episodes: usize,
    pub succeeded: usize,
    pub appended: usize,
}

/// Runs tasks one after another, harvesting each successful episode into
/// `store` so later episodes can retrieve from it.
pub fn bootstrap(
    store: &mut EpisodicStore,
    tasks: &[TaskSpec],
    policies: &dyn PolicyFactory,
    config: &EngineConfig,
    embedder: &dyn EmbeddingProvider,
) -> Result<BootstrapSummary> {
    store.check_embedder(embedder)?;
    let mut summary = BootstrapSummary::default();
    for task in tasks {
        let (result, outcome) = {
            let ctx = RunContext {
                config,
                store: Some(&*store),
                embedder,
            };
            run_task(task, policies, ctx)?
        };
        summary.episodes += 1;
        if result.success {
            summary.succeeded += 1;
        }
        summary.appended += store.harvest(&outcome.tree, result.success, embedder)?;
    }
    Ok(summary)
}

/// Harvests a recorded episode. Task success is read from the trace's
/// episode result; a trace without one counts as failed.
pub fn harvest_trace(
    store: &mut EpisodicStore,
    trace: &super::trace::Trace,
    embedder: &dyn EmbeddingProvider,
) -> Result<usize> {
    let succeeded = matches!(
        trace.episode_result(),
        Some(super::trace::EventPayload::EpisodeResult { success: true, .. })
    );
    if !succeeded || trace.events.is_empty() {
        return Ok(0);
    }
    let tree = trace.rebuild_tree()?;
    store.harvest(&tree, true, embedder)
}
