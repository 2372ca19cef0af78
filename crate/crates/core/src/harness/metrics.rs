use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::trace::{EventPayload, Trace};
use crate::engine::EpisodeOutcome;
use crate::tree::{Mode, NodeStatus};

/// Per-decision token usage, from decision events only.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct TokenStats {
    pub decisions: usize,
    pub max_input: usize,
    pub mean_input: f64,
    pub sd_input: f64,
    pub mean_output: f64,
    pub sd_output: f64,
}

/// Mean and population standard deviation.
fn mean_sd(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

pub fn compute_token_stats(trace: &Trace) -> TokenStats {
    let (inputs, outputs): (Vec<f64>, Vec<f64>) =
        trace.decisions().map(|(i, o)| (i as f64, o as f64)).unzip();
    let (mean_input, sd_input) = mean_sd(&inputs);
    let (mean_output, sd_output) = mean_sd(&outputs);
    TokenStats {
        decisions: inputs.len(),
        max_input: trace.decisions().map(|(i, _)| i).max().unwrap_or(0),
        mean_input,
        sd_input,
        mean_output,
        sd_output,
    }
}

/// Scored result of one episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeResult {
    pub task_id: String,
    pub task_type: String,
    pub mode: Mode,
    /// Root agent node status.
    pub status: NodeStatus,
    /// Whether the goal condition holds at the end.
    pub success: bool,
    pub ssr: f64,
    pub decisions: u32,
    pub cap: u32,
    pub tokens: TokenStats,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tags: Vec<String>,
    /// Not serialized, so reports stay reproducible.
    #[serde(skip)]
    pub wall_time_ms: u128,
}

impl EpisodeResult {
    pub fn from_outcome(outcome: &EpisodeOutcome, task_type: &str, mode: Mode) -> Self {
        Self {
            task_id: outcome.task_id.clone(),
            task_type: task_type.to_string(),
            mode,
            status: outcome.status,
            success: outcome.goal.success,
            ssr: outcome.goal.ssr,
            decisions: outcome.budget.used,
            cap: outcome.budget.cap,
            tokens: compute_token_stats(&outcome.trace),
            trace: None,
            tags: Vec::new(),
            wall_time_ms: 0,
        }
    }

    /// Recomputes the result from a trace alone.
    pub fn from_trace(trace: &Trace, task_type: &str) -> Option<Self> {
        let last = trace.events.last()?;
        let EventPayload::EpisodeResult {
            task_id,
            mode,
            status,
            success,
            ssr,
            decisions,
            ..
        } = trace.episode_result()?
        else {
            return None;
        };
        Some(Self {
            task_id: task_id.clone(),
            task_type: task_type.to_string(),
            mode: *mode,
            status: *status,
            success: *success,
            ssr: *ssr,
            decisions: *decisions,
            cap: last.budget.cap,
            tokens: compute_token_stats(trace),
            trace: None,
            tags: Vec::new(),
            wall_time_ms: 0,
        })
    }
}

impl fmt::Display for EpisodeResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} [{}] {}: goal {} (ssr {:.2}), {}/{} decisions, max input {} tokens",
            self.task_id,
            self.mode,
            self.status,
            if self.success { "met" } else { "not met" },
            self.ssr,
            self.decisions,
            self.cap,
            self.tokens.max_input
        )
    }
}

/// Rounds to two decimals, the precision rates are reported at.
pub fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Breakdown {
    pub tasks: usize,
    pub successes: usize,
    pub gsr: f64,
    pub ssr: f64,
}

impl Breakdown {
    fn of<'a>(results: impl IntoIterator<Item = &'a EpisodeResult>) -> Self {
        let mut tasks = 0;
        let mut successes = 0;
        let mut ssr_sum = 0.0;
        for r in results {
            tasks += 1;
            successes += usize::from(r.success);
            ssr_sum += r.ssr;
        }
        if tasks == 0 {
            return Self::default();
        }
        Self {
            tasks,
            successes,
            gsr: round2(100.0 * successes as f64 / tasks as f64),
            ssr: round2(100.0 * ssr_sum / tasks as f64),
        }
    }
}

/// Aggregate over a manifest. SSR is the macro mean of per-task ssr.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub name: String,
    pub overall: Breakdown,
    pub by_type: BTreeMap<String, Breakdown>,
    /// Count of episodes carrying each failure tag.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub tags: BTreeMap<String, usize>,
    pub episodes: Vec<EpisodeResult>,
}

impl SuiteReport {
    pub fn new(name: impl Into<String>, episodes: Vec<EpisodeResult>) -> Self {
        let mut by_type: BTreeMap<String, Vec<&EpisodeResult>> = BTreeMap::new();
        for e in &episodes {
            by_type.entry(e.task_type.clone()).or_default().push(e);
        }
        let by_type = by_type
            .into_iter()
            .map(|(k, v)| (k, Breakdown::of(v)))
            .collect();
        let mut tags = BTreeMap::new();
        for tag in episodes.iter().flat_map(|e| &e.tags) {
            *tags.entry(tag.clone()).or_insert(0) += 1;
        }
        Self {
            name: name.into(),
            overall: Breakdown::of(&episodes),
            by_type,
            tags,
            episodes,
        }
    }

    pub fn gsr(&self) -> f64 {
        self.overall.gsr
    }

    pub fn ssr(&self) -> f64 {
        self.overall.ssr
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Re-derives the aggregates after tags changed.
    pub fn retag(self) -> Self {
        Self::new(self.name, self.episodes)
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{}: {} tasks, GSR {:.2}, SSR {:.2}",
            self.name, self.overall.tasks, self.overall.gsr, self.overall.ssr
        )?;
        for (ty, b) in &self.by_type {
            writeln!(
                f,
                "  {ty}: {} tasks, GSR {:.2}, SSR {:.2}",
                b.tasks, b.gsr, b.ssr
            )?;
        }
        for (tag, n) in &self.tags {
            writeln!(f, "  tag {tag}: {n}")?;
        }
        Ok(())
    }
}

/// Suggested failure tags; any string is accepted.
pub const SUGGESTED_TAGS: [&str; 4] = ["ambiguous", "execution", "search", "expand"];
