//! Fixtures shared by the benchmarks.

use std::path::PathBuf;

use reactree_core::harness::TaskSpec;
use reactree_core::memory::{EmbeddingProvider, EpisodicStore, Experience, Termination};

pub fn assets() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../assets")
}

pub fn task(id: &str) -> TaskSpec {
    TaskSpec::load(assets().join(format!("tasks/{id}.toml"))).expect("shipped task loads")
}

/// `n` experiences over a small goal vocabulary, so retrieval sees ties.
pub fn synthetic_store(n: usize, embedder: &dyn EmbeddingProvider) -> EpisodicStore {
    let goals = [
        "find the juice",
        "put the wine on the coffee table",
        "open the fridge",
        "turn on the tv",
        "pick up the remote control",
    ];
    let mut store = EpisodicStore::new(embedder);
    for i in 0..n {
        let goal = format!("{} {}", goals[i % goals.len()], i % 7);
        let mut e = Experience::new(goal, "Act: done", Termination::ALL[i % 3], embedder);
        e.token_count = 50 + (i * 37) % 400;
        store.push(e).expect("dimensions match");
    }
    store
}
