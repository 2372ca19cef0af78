use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;

use super::metrics::{EpisodeResult, SuiteReport};
use super::task::TaskSpec;
use super::trace::Trace;
use crate::engine::{run_episode, EngineConfig, EpisodeDeps, EpisodeOutcome};
use crate::error::{Error, Result};
use crate::memory::{EmbeddingProvider, EpisodicStore};
use crate::policy::{Policy, RemoteConfig, RemotePolicy, ScriptedPolicy, Transcript};

/// Where decisions come from.
#[derive(Debug, Clone)]
pub enum PolicySource {
    /// A transcript file, or each task's own transcript when `None`.
    Scripted(Option<PathBuf>),
    Remote(RemoteConfig),
}

impl PolicySource {
    pub fn for_task(&self, task: &TaskSpec) -> Result<Arc<dyn Policy>> {
        match self {
            PolicySource::Scripted(path) => {
                let path = path.as_ref().or(task.transcript.as_ref()).ok_or_else(|| {
                    Error::Config(format!(
                        "task {} declares no transcript; pass one with --policy scripted:<file>",
                        task.id
                    ))
                })?;
                Ok(Arc::new(ScriptedPolicy::new(Transcript::load(path)?)))
            }
            PolicySource::Remote(cfg) => Ok(Arc::new(RemotePolicy::new(cfg.clone()))),
        }
    }
}

/// Builds the policy for one task.
pub trait PolicyFactory: Sync {
    fn policy_for(&self, task: &TaskSpec) -> Result<Arc<dyn Policy>>;
}

impl PolicyFactory for PolicySource {
    fn policy_for(&self, task: &TaskSpec) -> Result<Arc<dyn Policy>> {
        self.for_task(task)
    }
}

impl<F> PolicyFactory for F
where
    F: Fn(&TaskSpec) -> Result<Arc<dyn Policy>> + Sync,
{
    fn policy_for(&self, task: &TaskSpec) -> Result<Arc<dyn Policy>> {
        self(task)
    }
}

/// Shared, read-only inputs of a run.
#[derive(Clone, Copy)]
pub struct RunContext<'a> {
    pub config: &'a EngineConfig,
    pub store: Option<&'a EpisodicStore>,
    pub embedder: &'a dyn EmbeddingProvider,
}

/// Runs one task and scores it.
pub fn run_task(
    task: &TaskSpec,
    policies: &dyn PolicyFactory,
    ctx: RunContext<'_>,
) -> Result<(EpisodeResult, EpisodeOutcome)> {
    let start = Instant::now();
    let world = task.load_world()?;
    let policy = policies.policy_for(task)?;
    let outcome = run_episode(
        task,
        world,
        ctx.config,
        EpisodeDeps {
            policy: policy.as_ref(),
            store: ctx.store,
            embedder: ctx.embedder,
        },
    )?;
    let mut result = EpisodeResult::from_outcome(&outcome, &task.task_type, ctx.config.mode);
    result.wall_time_ms = start.elapsed().as_millis();
    Ok((result, outcome))
}

pub struct SuiteRun {
    pub report: SuiteReport,
    /// Per-task traces in manifest order.
    pub traces: Vec<(String, Trace)>,
}

impl SuiteRun {
    /// Writes `<task id>.jsonl` per task into `dir`.
    pub fn save_traces(&self, dir: &Path) -> Result<()> {
        for (id, trace) in &self.traces {
            trace.save(dir.join(trace_file_name(id)))?;
        }
        Ok(())
    }
}

pub fn trace_file_name(task_id: &str) -> String {
    format!("{task_id}.jsonl")
}

/// Runs every task with up to `jobs` episodes at once. Results keep
/// manifest order whatever the parallelism.
pub fn run_suite(
    name: &str,
    tasks: &[TaskSpec],
    policies: &dyn PolicyFactory,
    ctx: RunContext<'_>,
    jobs: usize,
) -> Result<SuiteRun> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let runs: Vec<Result<(EpisodeResult, EpisodeOutcome)>> = pool.install(|| {
        tasks
            .par_iter()
            .map(|task| run_task(task, policies, ctx))
            .collect()
    });
    let mut results = Vec::with_capacity(runs.len());
    let mut traces = Vec::with_capacity(runs.len());
    for run in runs {
        let (mut result, outcome) = run?;
        result.trace = Some(trace_file_name(&result.task_id));
        results.push(result);
        traces.push((outcome.task_id, outcome.trace));
    }
    Ok(SuiteRun {
        report: SuiteReport::new(name, results),
        traces,
    })
}
