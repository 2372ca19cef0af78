use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use reactree_core::harness::{
    bootstrap, control_flow_config, harvest_trace, render, replay, replay_world, run_suite,
    run_task, Manifest, PolicySource, RunContext, SuiteReport, TaskSpec, Trace,
};
use reactree_core::memory::{
    cosine_similarity, EmbeddingProvider, EpisodicStore, HashedBagOfWords, Termination,
};
use reactree_core::policy::RemoteConfig;
use reactree_core::tree::AllowedFlows;
use reactree_core::{EngineConfig, Mode};

#[derive(Parser)]
#[command(
    name = "reactree",
    version,
    about = "Run, score and inspect goal-scoped agent trees"
)]
struct Cli {
    /// Directory holding tasks/, worlds/, transcripts/ and manifests/.
    #[arg(long, global = true, env = "REACTREE_ASSETS", default_value = "assets")]
    assets: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one task.
    Run {
        /// Task id under assets/tasks, or a path to a task file.
        #[arg(long)]
        task: String,
        #[command(flatten)]
        common: Common,
        /// Print the full per-node trajectory after the outline.
        #[arg(long)]
        verbose: bool,
    },
    /// Run every task in a manifest and write a report.
    Suite {
        /// Manifest name under assets/manifests, or a path.
        #[arg(long)]
        manifest: String,
        #[command(flatten)]
        common: Common,
        /// Episodes to run at once.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Directory for one trace file per task.
        #[arg(long)]
        trace_dir: Option<PathBuf>,
    },
    /// Fill an episodic store from successful episodes.
    Bootstrap {
        /// Training manifest run with --policy.
        #[arg(long)]
        manifest: Option<String>,
        /// Manifest run first with each task's own transcript.
        #[arg(long)]
        seed_manifest: Option<String>,
        /// Recorded traces to harvest before running anything.
        #[arg(long = "harvest", value_name = "TRACE")]
        harvest: Vec<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Episodic store utilities.
    Memory {
        #[command(subcommand)]
        command: MemoryCommand,
    },
    /// Recompute metrics from a trace and check its invariants.
    Replay {
        #[arg(long)]
        trace: PathBuf,
        /// Re-simulate the trace against this task's world and goal.
        #[arg(long)]
        task: Option<String>,
    },
    /// Draw the tree recorded in a trace.
    Render {
        #[arg(long)]
        trace: PathBuf,
        #[arg(long, value_enum, default_value_t = RenderFormat::Outline)]
        format: RenderFormat,
    },
    /// Attach a failure tag to an episode in a suite report.
    Tag {
        #[arg(long)]
        report: PathBuf,
        #[arg(long)]
        task: String,
        /// Free-form label, e.g. ambiguous, execution, search or expand.
        #[arg(long)]
        tag: String,
        /// Output path; defaults to rewriting the report in place.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum MemoryCommand {
    /// Print store statistics and the nearest experiences to a goal.
    Inspect {
        #[arg(long)]
        em: PathBuf,
        #[arg(long)]
        query: Option<String>,
        #[arg(long, default_value_t = 5)]
        k: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum RenderFormat {
    Outline,
    Dot,
    Trajectory,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Args)]
struct Common {
    #[arg(long, default_value = "reactree")]
    mode: Mode,
    /// `scripted` (each task's transcript), `scripted:<name or file>`, or `remote`.
    #[arg(long, default_value = "scripted")]
    policy: String,
    #[arg(long, value_enum, default_value_t = Switch::On)]
    wm: Switch,
    /// Episodic store file, or `none`.
    #[arg(long, default_value = "none")]
    em: String,
    /// Allowed control flows: all, seq+fb or seq.
    #[arg(long, default_value = "all")]
    flows: String,
    /// Decision cap; defaults to the world profile's (200 household, 100 extended).
    #[arg(long)]
    max_decisions: Option<u32>,
    #[arg(long, default_value_t = 5000)]
    retrieval_budget: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    trace_out: Option<PathBuf>,
    #[arg(long)]
    report_out: Option<PathBuf>,
}

impl Common {
    fn engine_config(&self) -> Result<EngineConfig> {
        let flows: AllowedFlows = control_flow_config(&self.flows)?;
        if self.max_decisions == Some(0) {
            bail!("--max-decisions must be at least 1");
        }
        Ok(EngineConfig {
            mode: self.mode,
            working_memory: self.wm == Switch::On,
            flows,
            max_decisions: self.max_decisions,
            retrieval_budget: self.retrieval_budget,
            seed: self.seed,
            ..EngineConfig::default()
        })
    }

    fn policy(&self, assets: &Path) -> Result<PolicySource> {
        match self.policy.split_once(':') {
            None if self.policy == "scripted" => Ok(PolicySource::Scripted(None)),
            None if self.policy == "remote" => Ok(PolicySource::Remote(RemoteConfig::from_env()?)),
            Some(("scripted", name)) => Ok(PolicySource::Scripted(Some(resolve(
                assets,
                "transcripts",
                name,
            )?))),
            _ => bail!(
                "unknown --policy {:?} (expected scripted, scripted:<file> or remote)",
                self.policy
            ),
        }
    }

    fn em_path(&self) -> Option<PathBuf> {
        (self.em != "none").then(|| PathBuf::from(&self.em))
    }

    fn store(&self, embedder: &dyn EmbeddingProvider) -> Result<Option<EpisodicStore>> {
        self.em_path()
            .map(|p| {
                EpisodicStore::load(&p, embedder)
                    .with_context(|| format!("loading {}", p.display()))
            })
            .transpose()
    }
}

/// Accepts a path to an existing file or a bare name under `assets/<dir>`.
fn resolve(assets: &Path, dir: &str, name: &str) -> Result<PathBuf> {
    let direct = PathBuf::from(name);
    if direct.is_file() {
        return Ok(direct);
    }
    let named = assets.join(dir).join(format!("{name}.toml"));
    if named.is_file() {
        return Ok(named);
    }
    bail!(
        "{name:?} is neither a file nor a name under {}",
        assets.join(dir).display()
    )
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn cmd_run(assets: &Path, task: &str, common: &Common, verbose: bool) -> Result<()> {
    let spec = TaskSpec::load(resolve(assets, "tasks", task)?)?;
    let config = common.engine_config()?;
    let policy = common.policy(assets)?;
    let embedder = HashedBagOfWords::default();
    let store = common.store(&embedder)?;
    let ctx = RunContext {
        config: &config,
        store: store.as_ref(),
        embedder: &embedder,
    };
    let (mut result, outcome) = run_task(&spec, &policy, ctx)?;
    print!("{}", render::outline(&outcome.tree));
    if verbose {
        println!();
        print!("{}", render::trajectory(&outcome.tree));
    }
    println!("{result}");
    eprintln!("wall time {} ms", result.wall_time_ms);
    if let Some(path) = &common.trace_out {
        outcome.trace.save(path)?;
        result.trace = Some(path.display().to_string());
    }
    if let Some(path) = &common.report_out {
        write_file(
            path,
            &format!("{}\n", serde_json::to_string_pretty(&result)?),
        )?;
    }
    Ok(())
}

fn cmd_suite(
    assets: &Path,
    manifest: &str,
    common: &Common,
    jobs: usize,
    trace_dir: Option<&Path>,
) -> Result<()> {
    let manifest = Manifest::load(resolve(assets, "manifests", manifest)?)?;
    let config = common.engine_config()?;
    let policy = common.policy(assets)?;
    let embedder = HashedBagOfWords::default();
    let store = common.store(&embedder)?;
    let ctx = RunContext {
        config: &config,
        store: store.as_ref(),
        embedder: &embedder,
    };
    let run = run_suite(&manifest.name, &manifest.tasks, &policy, ctx, jobs)?;
    for e in &run.report.episodes {
        println!("{e}");
    }
    print!("{}", run.report);
    if let Some(dir) = trace_dir.or(common.trace_out.as_deref()) {
        run.save_traces(dir)?;
    }
    if let Some(path) = &common.report_out {
        write_file(path, &run.report.to_json())?;
    }
    Ok(())
}

fn cmd_bootstrap(
    assets: &Path,
    manifest: Option<&str>,
    seed_manifest: Option<&str>,
    traces: &[PathBuf],
    common: &Common,
) -> Result<()> {
    let Some(em) = common.em_path() else {
        bail!("bootstrap needs --em <store path>");
    };
    if manifest.is_none() && seed_manifest.is_none() && traces.is_empty() {
        bail!("nothing to bootstrap from: pass --manifest, --seed-manifest or --harvest");
    }
    let embedder = HashedBagOfWords::default();
    let mut store = EpisodicStore::open_or_new(&em, &embedder)?;
    let before = store.len();
    let config = common.engine_config()?;

    for path in traces {
        let trace = Trace::load(path)?;
        let n = harvest_trace(&mut store, &trace, &embedder)?;
        println!("harvested {n} experiences from {}", path.display());
    }
    if let Some(name) = seed_manifest {
        let m = Manifest::load(resolve(assets, "manifests", name)?)?;
        let s = bootstrap(
            &mut store,
            &m.tasks,
            &PolicySource::Scripted(None),
            &config,
            &embedder,
        )?;
        println!(
            "seed {}: {}/{} episodes succeeded, {} experiences added",
            m.name, s.succeeded, s.episodes, s.appended
        );
    }
    if let Some(name) = manifest {
        let m = Manifest::load(resolve(assets, "manifests", name)?)?;
        let policy = common.policy(assets)?;
        let s = bootstrap(&mut store, &m.tasks, &policy, &config, &embedder)?;
        println!(
            "{}: {}/{} episodes succeeded, {} experiences added",
            m.name, s.succeeded, s.episodes, s.appended
        );
    }
    store.save(&em)?;
    println!(
        "{}: {} experiences ({} new)",
        em.display(),
        store.len(),
        store.len() - before
    );
    Ok(())
}

fn cmd_memory_inspect(em: &Path, query: Option<&str>, k: usize) -> Result<()> {
    let embedder = HashedBagOfWords::default();
    let store = EpisodicStore::load(em, &embedder)?;
    println!(
        "{}: {} experiences, embedder {} (dim {})",
        em.display(),
        store.len(),
        store.embedder_id,
        store.dimension
    );
    for t in Termination::ALL {
        println!("  {t}: {}", store.count(t));
    }
    let tokens: usize = store.experiences.iter().map(|e| e.token_count).sum();
    println!("  tokens: {tokens}");
    if let Some(q) = query {
        let qv = embedder.embed(q);
        let mut scored: Vec<(f64, &str, Termination)> = store
            .experiences
            .iter()
            .map(|e| {
                let s = cosine_similarity(&qv, &e.embedding).unwrap_or(-1.0);
                (s, e.goal.as_str(), e.termination)
            })
            .collect();
        scored.sort_by(|a, b| b.0.total_cmp(&a.0));
        println!("nearest to {q:?}:");
        for (s, goal, t) in scored.into_iter().take(k) {
            println!("  {s:.4}  [{t}] {goal}");
        }
    }
    Ok(())
}

fn cmd_replay(assets: &Path, trace_path: &Path, task: Option<&str>) -> Result<()> {
    let trace = Trace::load(trace_path)?;
    let spec = task
        .map(|t| resolve(assets, "tasks", t).and_then(|p| Ok(TaskSpec::load(p)?)))
        .transpose()?;
    let task_type = spec.as_ref().map(|s| s.task_type.as_str()).unwrap_or("");
    let r = replay(&trace, task_type)?;
    for check in &r.checks {
        println!("ok  {check}");
    }
    if let Some(spec) = &spec {
        replay_world(&trace, spec.load_world()?, &spec.goal)?;
        println!("ok  skills re-simulate to the recorded observations and goal score");
    }
    println!("{}", r.result);
    Ok(())
}

fn cmd_render(trace_path: &Path, format: RenderFormat) -> Result<()> {
    let tree = Trace::load(trace_path)?.rebuild_tree()?;
    let text = match format {
        RenderFormat::Outline => render::outline(&tree),
        RenderFormat::Dot => render::dot(&tree),
        RenderFormat::Trajectory => render::trajectory(&tree),
    };
    print!("{text}");
    Ok(())
}

fn cmd_tag(report: &Path, task: &str, tag: &str, out: Option<&Path>) -> Result<()> {
    let text =
        std::fs::read_to_string(report).with_context(|| format!("reading {}", report.display()))?;
    let mut parsed: SuiteReport =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", report.display()))?;
    let Some(episode) = parsed.episodes.iter_mut().find(|e| e.task_id == task) else {
        bail!("no episode for task {task:?} in {}", report.display());
    };
    let tag = tag.trim().to_lowercase();
    if tag.is_empty() {
        bail!("tag is empty");
    }
    if !episode.tags.contains(&tag) {
        episode.tags.push(tag);
        episode.tags.sort();
    }
    let parsed = parsed.retag();
    write_file(out.unwrap_or(report), &parsed.to_json())?;
    print!("{parsed}");
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let assets = cli.assets.as_path();
    let result = match &cli.command {
        Command::Run {
            task,
            common,
            verbose,
        } => cmd_run(assets, task, common, *verbose),
        Command::Suite {
            manifest,
            common,
            jobs,
            trace_dir,
        } => cmd_suite(assets, manifest, common, *jobs, trace_dir.as_deref()),
        Command::Bootstrap {
            manifest,
            seed_manifest,
            harvest,
            common,
        } => cmd_bootstrap(
            assets,
            manifest.as_deref(),
            seed_manifest.as_deref(),
            harvest,
            common,
        ),
        Command::Memory {
            command: MemoryCommand::Inspect { em, query, k },
        } => cmd_memory_inspect(em, query.as_deref(), *k),
        Command::Replay { trace, task } => cmd_replay(assets, trace, task.as_deref()),
        Command::Render { trace, format } => cmd_render(trace, *format),
        Command::Tag {
            report,
            task,
            tag,
            out,
        } => cmd_tag(report, task, tag, out.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
