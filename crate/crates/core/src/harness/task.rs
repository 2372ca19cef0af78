use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::{GoalCondition, World};

/// One task: a world, an instruction and the goal that scores it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskSpec {
    pub id: String,
    /// World file; relative paths resolve against the task file's directory.
    pub world: PathBuf,
    pub instruction: String,
    pub task_type: String,
    pub goal: GoalCondition,
    /// Default scripted transcript for this task.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transcript: Option<PathBuf>,
}

impl TaskSpec {
    pub fn from_toml(text: &str, base: &Path) -> Result<Self> {
        let mut spec: TaskSpec = toml::from_str(text).map_err(|e| Error::Task(e.to_string()))?;
        spec.world = base.join(&spec.world);
        spec.transcript = spec.transcript.map(|t| base.join(t));
        Ok(spec)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::load(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_toml(&text, base).map_err(|e| Error::load(path, e))
    }

    /// Loads the world and checks the task against it.
    pub fn load_world(&self) -> Result<World> {
        let world = World::load(&self.world)?;
        self.validate(&world)?;
        Ok(world)
    }

    pub fn validate(&self, world: &World) -> Result<()> {
        if self.id.trim().is_empty() {
            return Err(Error::Task("task id is empty".into()));
        }
        if self.instruction.trim().is_empty() {
            return Err(Error::Task(format!(
                "task {}: instruction is empty",
                self.id
            )));
        }
        self.goal
            .validate(world)
            .map_err(|e| Error::Task(format!("task {}: {e}", self.id)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifestFile {
    name: String,
    tasks: Vec<PathBuf>,
}

/// An ordered list of tasks.
#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub name: String,
    pub tasks: Vec<TaskSpec>,
}

impl Manifest {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::load(path, e))?;
        let file: ManifestFile = toml::from_str(&text).map_err(|e| Error::load(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let tasks = file
            .tasks
            .iter()
            .map(|t| TaskSpec::load(base.join(t)))
            .collect::<Result<Vec<_>>>()?;
        if tasks.is_empty() {
            return Err(Error::load(path, "manifest lists no tasks"));
        }
        let mut ids: Vec<&str> = tasks.iter().map(|t| t.id.as_str()).collect();
        ids.sort_unstable();
        if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::load(path, format!("duplicate task id {:?}", w[0])));
        }
        Ok(Self {
            name: file.name,
            tasks,
        })
    }
}
