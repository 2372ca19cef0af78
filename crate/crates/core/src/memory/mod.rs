//! Episodic memory of subgoal-level trajectories and per-episode working
//! memory of object sightings.

mod embed;
mod episodic;
mod working;

pub use embed::{cosine_similarity, EmbeddingProvider, HashedBagOfWords};
pub use episodic::{
    EpisodicStore, Experience, Termination, DEFAULT_RETRIEVAL_BUDGET, STORE_VERSION,
};
pub use working::{WmEntry, WorkingMemory};
