//! Deterministic text embedding and vector similarity.

use thiserror::Error;

use super::{Embedder, SemanticVector};

#[derive(Debug, Error, PartialEq)]
pub enum CosineError {
    #[error("vector dimensions differ: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("cosine similarity is undefined for an all-zero vector")]
    ZeroVector,
}

#[derive(Debug, Error, PartialEq)]
pub enum EmbedError {
    #[error("text has no tokens to embed")]
    EmptyText,
    #[error("token signs cancelled to an all-zero vector")]
    ZeroVector,
    #[error("embedding endpoint failure: {0}")]
    Remote(String),
}

/// Cosine similarity (a·b)/(‖a‖‖b‖), clamped to [-1, 1] so accumulated
/// rounding can never push a score out of range.
pub fn cosine_sim(a: &SemanticVector, b: &SemanticVector) -> Result<f64, CosineError> {
    if a.values.len() != b.values.len() {
        return Err(CosineError::DimensionMismatch(a.values.len(), b.values.len()));
    }
    let mut dot = 0.0f64;
    let mut norm_a = 0.0f64;
    let mut norm_b = 0.0f64;
    for (&x, &y) in a.values.iter().zip(&b.values) {
        dot += x * y;
        norm_a += x * x;
        norm_b += y * y;
    }
    if norm_a == 0.0 || norm_b == 0.0 {
        return Err(CosineError::ZeroVector);
    }
    Ok((dot / (norm_a.sqrt() * norm_b.sqrt())).clamp(-1.0, 1.0))
}

/// Embedding tokenization: lowercase, split on non-alphanumerics, drop
/// empties. Shared by the default embedder and the Jaccard scorer so their
/// notion of a token never drifts apart.
pub fn embedding_tokens(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect()
}

const FNV_OFFSET_BASIS: u64 = 0xcbf29ce484222325;
const FNV_PRIME: u64 = 0x100000001b3;

/// FNV-1a over the token bytes: a fixed, published 64-bit hash, so vectors
/// are identical across platforms and releases.
fn fnv1a(token: &str) -> u64 {
    let mut hash = FNV_OFFSET_BASIS;
    for byte in token.bytes() {
        hash ^= u64::from(byte);
        hash = hash.wrapping_mul(FNV_PRIME);
    }
    hash
}

/// Signed feature hashing over a bag of tokens.
///
/// Each token adds ±1 at index `hash mod D`, with the sign taken from the
/// hash's top bit (the index uses the low bits, keeping sign and position
/// independent). The accumulated vector is L2-normalized. Stand-in for a
/// trained embedding model: deterministic, dependency-free, and good enough
/// for lexical-overlap retrieval.
#[derive(Debug, Clone)]
pub struct HashedBowEmbedder {
    pub dimension: usize,
}

impl Default for HashedBowEmbedder {
    fn default() -> Self {
        HashedBowEmbedder {
            dimension: DEFAULT_DIMENSION,
        }
    }
}

pub const DEFAULT_DIMENSION: usize = 512;

impl HashedBowEmbedder {
    fn embed_one(&self, text: &str) -> Result<SemanticVector, EmbedError> {
        let tokens = embedding_tokens(text);
        if tokens.is_empty() {
            return Err(EmbedError::EmptyText);
        }
        let mut values = vec![0.0f64; self.dimension];
        for token in &tokens {
            let hash = fnv1a(token);
            let index = (hash % self.dimension as u64) as usize;
            let sign = if hash >> 63 == 1 { -1.0 } else { 1.0 };
            values[index] += sign;
        }
        let norm: f64 = values.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(EmbedError::ZeroVector);
        }
        for v in &mut values {
            *v /= norm;
        }
        Ok(SemanticVector { values })
    }
}

impl Embedder for HashedBowEmbedder {
    fn id(&self) -> String {
        format!("hashed-bow-fnv1a64-d{}", self.dimension)
    }

    fn dimension(&self) -> usize {
        self.dimension
    }

    fn embed(&self, texts: &[String]) -> Result<Vec<SemanticVector>, EmbedError> {
        texts.iter().map(|t| self.embed_one(t)).collect()
    }
}
