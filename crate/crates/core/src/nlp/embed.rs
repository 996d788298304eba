//! Deterministic feature-hashing embedder.

use std::hash::Hasher;

use fnv::FnvHasher;

use super::{EmbeddingStore, Message, NlpError};
use crate::Scalar;

const BUCKET_KEY: u64 = 0x9e37_79b9_7f4a_7c15;
const SIGN_KEY: u64 = 0xc2b2_ae3d_27d4_eb4f;

/// Source of message vectors.
pub trait Embedder<F>: Sync {
    fn dim(&self) -> usize;
    fn embed(&self, message: &Message) -> Result<Vec<F>, NlpError>;
}

/// Lowercase and split on non-alphanumeric characters. A `#` or `@`
/// directly followed by an alphanumeric character stays attached, so
/// hashtags and mentions form single tokens.
pub fn tokenize(text: &str) -> Vec<String> {
    let chars: Vec<char> = text.to_lowercase().chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let prefixed = (c == '#' || c == '@') && chars.get(i + 1).is_some_and(|n| n.is_alphanumeric());
        if !(c.is_alphanumeric() || prefixed) {
            i += 1;
            continue;
        }
        let start = i;
        i += 1;
        while i < chars.len() && chars[i].is_alphanumeric() {
            i += 1;
        }
        tokens.push(chars[start..i].iter().collect());
    }
    tokens
}

fn keyed_hash(key: u64, token: &str) -> u64 {
    let mut h = FnvHasher::with_key(key);
    h.write(token.as_bytes());
    h.finish()
}

/// Signed token-count vector hashed into `dim` buckets, L2-normalized.
/// Empty text (no tokens) yields the zero vector.
///
/// # Panics
/// If `dim < 16`.
pub fn hash_embed<F: Scalar>(text: &str, dim: usize) -> Vec<F> {
    assert!(dim >= 16, "hash embedding dimension must be at least 16");
    let mut v = vec![F::zero(); dim];
    for token in tokenize(text) {
        let bucket = (keyed_hash(BUCKET_KEY, &token) % dim as u64) as usize;
        if keyed_hash(SIGN_KEY, &token) & 1 == 0 {
            v[bucket] += F::one();
        } else {
            v[bucket] -= F::one();
        }
    }
    let norm = v.iter().map(|&x| x * x).sum::<F>().sqrt();
    if norm > F::zero() {
        for x in &mut v {
            *x /= norm;
        }
    }
    v
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HashEmbedder {
    dim: usize,
}

impl HashEmbedder {
    pub fn new(dim: usize) -> Result<Self, NlpError> {
        if dim < 16 {
            return Err(NlpError::InvalidConfig(format!("hash embedding dimension {dim} is below 16")));
        }
        Ok(Self { dim })
    }
}

impl<F: Scalar> Embedder<F> for HashEmbedder {
    fn dim(&self) -> usize {
        self.dim
    }

    fn embed(&self, message: &Message) -> Result<Vec<F>, NlpError> {
        Ok(hash_embed(&message.text, self.dim))
    }
}

impl<F: Scalar> Embedder<F> for EmbeddingStore {
    fn dim(&self) -> usize {
        EmbeddingStore::dim(self)
    }

    fn embed(&self, message: &Message) -> Result<Vec<F>, NlpError> {
        let row =
            self.row(&message.message_id).ok_or_else(|| NlpError::MissingEmbedding(message.message_id.clone()))?;
        Ok(row.iter().map(|&x| F::lit(x as f64)).collect())
    }
}
