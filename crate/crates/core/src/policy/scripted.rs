use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Policy, PolicyError, PolicyRequest};
use crate::error::{Error, Result};
use crate::sim::normalize_spaces;

/// Fixed decision lines keyed by agent-node goal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Transcript {
    pub name: String,
    /// Line returned when no node entry matches or its lines run out.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub default: Option<String>,
    #[serde(default, rename = "node")]
    pub nodes: Vec<TranscriptNode>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TranscriptNode {
    /// Exact goal (case and spacing insensitive), or a prefix ending in `*`.
    pub goal: String,
    pub lines: Vec<String>,
}

fn goal_key(goal: &str) -> String {
    normalize_spaces(goal).to_lowercase()
}

impl TranscriptNode {
    fn matches(&self, key: &str) -> bool {
        let pattern = goal_key(&self.goal);
        match pattern.strip_suffix('*') {
            Some(prefix) => key.starts_with(prefix.trim_end()),
            None => pattern == key,
        }
    }
}

impl Transcript {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(format!("transcript: {e}")))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::load(path, e))?;
        toml::from_str(&text).map_err(|e| Error::load(path, e))
    }

    /// Exact matches win over prefix patterns; earlier entries win ties.
    pub fn lookup(&self, goal: &str, step: usize) -> Option<&str> {
        let key = goal_key(goal);
        let node = self
            .nodes
            .iter()
            .find(|n| !n.goal.trim_end().ends_with('*') && n.matches(&key))
            .or_else(|| self.nodes.iter().find(|n| n.matches(&key)));
        node.and_then(|n| n.lines.get(step))
            .or(self.default.as_ref())
            .map(String::as_str)
    }

    /// Merges several transcripts; earlier ones take precedence.
    pub fn merge(name: impl Into<String>, parts: impl IntoIterator<Item = Transcript>) -> Self {
        let mut out = Transcript {
            name: name.into(),
            default: None,
            nodes: Vec::new(),
        };
        for part in parts {
            out.default = out.default.or(part.default);
            out.nodes.extend(part.nodes);
        }
        out
    }
}

/// Replays a transcript. The node-local step selects the line, so retries
/// after a rejected line advance to the next one.
#[derive(Debug, Clone)]
pub struct ScriptedPolicy {
    transcript: Transcript,
}

impl ScriptedPolicy {
    pub fn new(transcript: Transcript) -> Self {
        Self { transcript }
    }

    pub fn transcript(&self) -> &Transcript {
        &self.transcript
    }
}

impl Policy for ScriptedPolicy {
    fn complete(&self, request: &PolicyRequest<'_>) -> Result<String, PolicyError> {
        self.transcript
            .lookup(request.goal, request.step)
            .map(str::to_string)
            .ok_or_else(|| {
                PolicyError::Fatal(Error::TranscriptMiss {
                    goal: request.goal.to_string(),
                    step: request.step,
                })
            })
    }
}
