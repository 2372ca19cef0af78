use std::hash::Hasher;

use fnv::FnvHasher;

use crate::error::{Error, Result};

/// Maps text to a fixed-length vector. Must be deterministic.
pub trait EmbeddingProvider: Send + Sync {
    /// Stored with every episodic store; loading checks it.
    fn id(&self) -> &str;
    fn dimension(&self) -> usize;
    fn embed(&self, text: &str) -> Vec<f64>;
}

/// Hashed bag of lowercased alphanumeric tokens, L2-normalised.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HashedBagOfWords {
    dimension: usize,
}

impl HashedBagOfWords {
    pub const DEFAULT_DIMENSION: usize = 256;

    pub fn new(dimension: usize) -> Self {
        assert!(dimension > 0);
        Self { dimension }
    }

    fn bucket(&self, token: &str) -> usize {
        let mut h = FnvHasher::default();
        h.write(token.as_bytes());
        (h.finish() % self.dimension as u64) as usize
    }
}

impl Default for HashedBagOfWords {
    fn default() -> Self {
        Self::new(Self::DEFAULT_DIMENSION)
    }
}

impl EmbeddingProvider for HashedBagOfWords {
    fn id(&self) -> &str {
        if self.dimension == Self::DEFAULT_DIMENSION {
            "hashed-bow-256"
        } else {
            "hashed-bow"
        }
    }

    fn dimension(&self) -> usize {
        self.dimension
    }

    fn embed(&self, text: &str) -> Vec<f64> {
        let mut v = vec![0.0; self.dimension];
        let lower = text.to_lowercase();
        let mut any = false;
        for token in lower
            .split(|c: char| !c.is_alphanumeric())
            .filter(|t| !t.is_empty())
        {
            v[self.bucket(token)] += 1.0;
            any = true;
        }
        // punctuation-only text still gets a nonzero vector
        if !any && !text.is_empty() {
            v[self.bucket(text)] = 1.0;
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            v.iter_mut().for_each(|x| *x /= norm);
        }
        v
    }
}

pub fn cosine_similarity(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Dimension(a.len(), b.len()));
    }
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok((dot / (na * nb)).clamp(-1.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cosine_cases() {
        assert_eq!(cosine_similarity(&[1.0, 0.0], &[1.0, 0.0]).unwrap(), 1.0);
        assert_eq!(cosine_similarity(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        let oracle = 32.0 / (14f64.sqrt() * 77f64.sqrt());
        let got = cosine_similarity(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]).unwrap();
        assert!((got - oracle).abs() < 1e-12);
        assert!((got - 0.974631846).abs() < 1e-9);
        assert!(matches!(
            cosine_similarity(&[0.0, 0.0], &[1.0, 0.0]),
            Err(Error::ZeroVector)
        ));
        assert!(matches!(
            cosine_similarity(&[1.0], &[1.0, 0.0]),
            Err(Error::Dimension(1, 2))
        ));
    }

    #[test]
    fn embedding_is_deterministic_and_normalised() {
        let e = HashedBagOfWords::default();
        let a = e.embed("Find and pick up the wine");
        assert_eq!(a, e.embed("Find and pick up the wine"));
        assert_eq!(a.len(), 256);
        let norm: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() < 1e-12);
        // case and punctuation do not matter
        assert_eq!(a, e.embed("find, and PICK up the wine!"));
        assert!(e.embed("...").iter().any(|x| *x != 0.0));
        assert!(e.embed("").iter().all(|x| *x == 0.0));
    }

    #[test]
    fn similar_goals_score_higher() {
        let e = HashedBagOfWords::default();
        let q = e.embed("find and pick up the juice");
        let near = cosine_similarity(&q, &e.embed("find and pick up the wine")).unwrap();
        let far = cosine_similarity(&q, &e.embed("turn on tv")).unwrap();
        assert!(near > far);
    }
}
