use std::fmt;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::embed::{cosine_similarity, EmbeddingProvider};
use crate::error::{Error, Result};
use crate::tokens;
use crate::tree::{NodeStatus, Tree};

pub const STORE_VERSION: u32 = 1;
pub const DEFAULT_RETRIEVAL_BUDGET: usize = 5000;

/// How an agent node ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Termination {
    Success,
    Failure,
    Expand,
}

impl Termination {
    pub const ALL: [Termination; 3] = [
        Termination::Success,
        Termination::Failure,
        Termination::Expand,
    ];
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Termination::Success => "success",
            Termination::Failure => "failure",
            Termination::Expand => "expand",
        })
    }
}

/// One agent node's trajectory, keyed by its goal embedding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Experience {
    pub goal: String,
    pub trajectory: String,
    pub termination: Termination,
    pub token_count: usize,
    pub embedding: Vec<f64>,
}

impl Experience {
    pub fn new(
        goal: impl Into<String>,
        trajectory: impl Into<String>,
        termination: Termination,
        embedder: &dyn EmbeddingProvider,
    ) -> Self {
        let goal = goal.into();
        let trajectory = trajectory.into();
        Self {
            embedding: embedder.embed(&goal),
            token_count: tokens::estimate(&trajectory),
            goal,
            trajectory,
            termination,
        }
    }
}

/// Append-only experience store.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpisodicStore {
    pub version: u32,
    pub embedder_id: String,
    pub dimension: usize,
    pub experiences: Vec<Experience>,
}

impl EpisodicStore {
    pub fn new(embedder: &dyn EmbeddingProvider) -> Self {
        Self {
            version: STORE_VERSION,
            embedder_id: embedder.id().to_string(),
            dimension: embedder.dimension(),
            experiences: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.experiences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.experiences.is_empty()
    }

    pub fn count(&self, termination: Termination) -> usize {
        self.experiences
            .iter()
            .filter(|e| e.termination == termination)
            .count()
    }

    pub fn check_embedder(&self, embedder: &dyn EmbeddingProvider) -> Result<()> {
        if self.embedder_id != embedder.id() || self.dimension != embedder.dimension() {
            return Err(Error::Config(format!(
                "episodic store was written by {} (dim {}), session uses {} (dim {})",
                self.embedder_id,
                self.dimension,
                embedder.id(),
                embedder.dimension()
            )));
        }
        Ok(())
    }

    pub fn push(&mut self, experience: Experience) -> Result<()> {
        if experience.embedding.len() != self.dimension {
            return Err(Error::Dimension(experience.embedding.len(), self.dimension));
        }
        self.experiences.push(experience);
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let store: Self = serde_json::from_str(text).map_err(|e| Error::Store(e.to_string()))?;
        if store.version != STORE_VERSION {
            return Err(Error::Store(format!(
                "unsupported version {} (expected {STORE_VERSION})",
                store.version
            )));
        }
        if let Some(e) = store
            .experiences
            .iter()
            .find(|e| e.embedding.len() != store.dimension)
        {
            return Err(Error::Store(format!(
                "experience {:?} has dimension {}, header says {}",
                e.goal,
                e.embedding.len(),
                store.dimension
            )));
        }
        Ok(store)
    }

    /// Loads a store and checks it was written by `embedder`.
    pub fn load(path: impl AsRef<Path>, embedder: &dyn EmbeddingProvider) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::load(path, e))?;
        let store = Self::from_json(&text).map_err(|e| Error::load(path, e))?;
        store.check_embedder(embedder)?;
        Ok(store)
    }

    /// Loads `path` if it exists, else starts an empty store.
    pub fn open_or_new(path: impl AsRef<Path>, embedder: &dyn EmbeddingProvider) -> Result<Self> {
        if path.as_ref().exists() {
            Self::load(path, embedder)
        } else {
            Ok(Self::new(embedder))
        }
    }

    /// Examples for `goal`, most similar first, within `budget` tokens.
    ///
    /// The selected set does not depend on `seed`: within a group of equal
    /// similarity (rounded to 1e-9) candidates are taken in a fixed
    /// round-robin over termination states. Filling stops at the first
    /// candidate that does not fit. The seed only shuffles the rendering
    /// order inside each selected tie group, again round-robin across
    /// termination states.
    pub fn retrieve(
        &self,
        embedder: &dyn EmbeddingProvider,
        goal: &str,
        budget: usize,
        seed: u64,
    ) -> Result<Vec<&Experience>> {
        self.check_embedder(embedder)?;
        let query = embedder.embed(goal);
        if self.is_empty() || query.iter().all(|x| *x == 0.0) {
            return Ok(Vec::new());
        }
        let mut scored = Vec::with_capacity(self.len());
        for (i, e) in self.experiences.iter().enumerate() {
            let sim = match cosine_similarity(&query, &e.embedding) {
                Ok(s) => s,
                Err(Error::ZeroVector) => -1.0,
                Err(err) => return Err(err),
            };
            scored.push((similarity_key(sim), i));
        }
        scored.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));

        let groups = tie_groups(&scored);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::new();
        let mut used = 0usize;
        'fill: for group in groups {
            let canonical = stratified(group, |i| self.experiences[i].termination);
            let mut taken = Vec::new();
            for i in canonical {
                let cost = self.experiences[i].token_count;
                if used + cost > budget {
                    shuffle_group(&mut taken, &mut rng, |i| self.experiences[i].termination);
                    out.extend(taken);
                    break 'fill;
                }
                used += cost;
                taken.push(i);
            }
            shuffle_group(&mut taken, &mut rng, |i| self.experiences[i].termination);
            out.extend(taken);
        }
        Ok(out.into_iter().map(|i| &self.experiences[i]).collect())
    }

    /// Appends one experience per executed agent node of a successful
    /// task. Nodes that never ran are skipped. Returns the number appended.
    pub fn harvest(
        &mut self,
        tree: &Tree,
        task_succeeded: bool,
        embedder: &dyn EmbeddingProvider,
    ) -> Result<usize> {
        if !task_succeeded {
            return Ok(0);
        }
        self.check_embedder(embedder)?;
        let mut added = 0;
        for node in &tree.agents {
            let termination = if node.child_flow.is_some() {
                Termination::Expand
            } else {
                match node.status {
                    NodeStatus::Success => Termination::Success,
                    NodeStatus::Failure => Termination::Failure,
                    NodeStatus::Running => continue,
                }
            };
            self.push(Experience::new(
                node.subgoal.clone(),
                node.trajectory_text(),
                termination,
                embedder,
            ))?;
            added += 1;
        }
        Ok(added)
    }
}

/// Similarity rounded to 9 decimals, as an orderable integer.
pub(crate) fn similarity_key(sim: f64) -> i64 {
    (sim * 1e9).round() as i64
}

fn tie_groups(sorted: &[(i64, usize)]) -> Vec<Vec<usize>> {
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut last = None;
    for &(key, i) in sorted {
        if last == Some(key) {
            groups.last_mut().expect("group exists").push(i);
        } else {
            groups.push(vec![i]);
            last = Some(key);
        }
    }
    groups
}

/// Round-robin over termination states in fixed state order, keeping the
/// given order within each state.
fn stratified(items: Vec<usize>, state: impl Fn(usize) -> Termination) -> Vec<usize> {
    let buckets: Vec<Vec<usize>> = Termination::ALL
        .iter()
        .map(|t| items.iter().copied().filter(|&i| state(i) == *t).collect())
        .collect();
    interleave(buckets)
}

fn interleave(buckets: Vec<Vec<usize>>) -> Vec<usize> {
    let longest = buckets.iter().map(Vec::len).max().unwrap_or(0);
    let mut out = Vec::new();
    for rank in 0..longest {
        out.extend(buckets.iter().filter_map(|b| b.get(rank).copied()));
    }
    out
}

/// Seeded stratified order: states visited in shuffled order, members
/// drawn uniformly within each state.
fn shuffle_group(
    items: &mut Vec<usize>,
    rng: &mut ChaCha8Rng,
    state: impl Fn(usize) -> Termination,
) {
    if items.len() < 2 {
        return;
    }
    let mut buckets: Vec<Vec<usize>> = Termination::ALL
        .iter()
        .map(|t| items.iter().copied().filter(|&i| state(i) == *t).collect())
        .filter(|b: &Vec<usize>| !b.is_empty())
        .collect();
    buckets.shuffle(rng);
    for b in &mut buckets {
        b.shuffle(rng);
    }
    *items = interleave(buckets);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::memory::HashedBagOfWords;

    fn store_of(items: &[(&str, usize, Termination)]) -> EpisodicStore {
        let e = HashedBagOfWords::default();
        let mut store = EpisodicStore::new(&e);
        for (goal, tokens, t) in items {
            store
                .push(Experience {
                    goal: goal.to_string(),
                    trajectory: "x".repeat(tokens * 4),
                    termination: *t,
                    token_count: *tokens,
                    embedding: e.embed(goal),
                })
                .unwrap();
        }
        store
    }

    #[test]
    fn sorted_by_similarity() {
        let e = HashedBagOfWords::default();
        let store = store_of(&[
            ("turn on tv", 10, Termination::Success),
            ("find and pick up the wine", 10, Termination::Success),
            ("pick up the wine in kitchen 1", 10, Termination::Failure),
        ]);
        let got = store
            .retrieve(&e, "find and pick up the wine", 1_000_000, 0)
            .unwrap();
        let goals: Vec<&str> = got.iter().map(|x| x.goal.as_str()).collect();
        assert_eq!(
            goals,
            [
                "find and pick up the wine",
                "pick up the wine in kitchen 1",
                "turn on tv"
            ]
        );
    }

    #[test]
    fn budget_limits_selection() {
        let e = HashedBagOfWords::default();
        let store = store_of(&[
            ("find the wine", 3000, Termination::Success),
            ("find the juice", 3000, Termination::Success),
        ]);
        let got = store
            .retrieve(&e, "find the wine", DEFAULT_RETRIEVAL_BUDGET, 0)
            .unwrap();
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].goal, "find the wine");
    }

    #[test]
    fn ties_same_set_seeded_order() {
        let e = HashedBagOfWords::default();
        let store = store_of(&[
            ("find the wine", 1000, Termination::Success),
            ("find the wine", 1000, Termination::Failure),
            ("find the wine", 1000, Termination::Expand),
            ("find the wine", 1000, Termination::Success),
        ]);
        let set = |seed| {
            let mut v: Vec<*const Experience> = store
                .retrieve(&e, "find the wine", 3000, seed)
                .unwrap()
                .into_iter()
                .map(|x| x as *const _)
                .collect();
            v.sort();
            v
        };
        for seed in 0..20 {
            assert_eq!(set(seed), set(0));
            assert_eq!(
                store.retrieve(&e, "find the wine", 3000, seed).unwrap(),
                store.retrieve(&e, "find the wine", 3000, seed).unwrap()
            );
        }
        // one of each state is chosen before a second success
        let picked = store.retrieve(&e, "find the wine", 3000, 7).unwrap();
        let mut states: Vec<Termination> = picked.iter().map(|x| x.termination).collect();
        states.sort();
        assert_eq!(states, Termination::ALL);
    }

    #[test]
    fn embedder_mismatch_is_an_error() {
        let store = store_of(&[("a", 1, Termination::Success)]);
        let other = HashedBagOfWords::new(64);
        assert!(matches!(
            store.retrieve(&other, "a", 10, 0),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn round_trip_is_exact() {
        let store = store_of(&[
            ("find and pick up the wine", 12, Termination::Expand),
            ("put down the juice", 40, Termination::Failure),
        ]);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m/store.json");
        store.save(&path).unwrap();
        let e = HashedBagOfWords::default();
        assert_eq!(EpisodicStore::load(&path, &e).unwrap(), store);
        assert!(EpisodicStore::load(&path, &HashedBagOfWords::new(64)).is_err());

        let empty = EpisodicStore::new(&e);
        empty.save(&path).unwrap();
        assert!(EpisodicStore::load(&path, &e).unwrap().is_empty());

        let bad = std::fs::read_to_string(&path)
            .unwrap()
            .replace("\"version\": 1", "\"version\": 9");
        assert!(EpisodicStore::from_json(&bad).is_err());
    }

    #[test]
    fn harvest_only_successful_tasks() {
        let e = HashedBagOfWords::default();
        let mut tree = Tree::with_root("root");
        tree.agent_mut(tree.root()).push_observation("o");
        let mut store = EpisodicStore::new(&e);
        assert_eq!(store.harvest(&tree, false, &e).unwrap(), 0);
        // root still running: nothing executed to completion
        assert_eq!(store.harvest(&tree, true, &e).unwrap(), 0);
        tree.finish_agent(tree.root(), NodeStatus::Success);
        assert_eq!(store.harvest(&tree, true, &e).unwrap(), 1);
        assert_eq!(store.experiences[0].trajectory, "Your task is to: root\no");
    }
}
