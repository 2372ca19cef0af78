//! Endpoint-agnostic token estimate shared by prompt accounting and the
//! episodic retrieval budget.

/// `ceil(chars / 4)`, counted in Unicode scalar values.
pub fn estimate(text: &str) -> usize {
    text.chars().count().div_ceil(4)
}
