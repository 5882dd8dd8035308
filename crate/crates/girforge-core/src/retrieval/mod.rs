//! Retrieval support for the second generation stage.
//!
//! A corpus of single-module snippets is indexed as (fingerprint, semantic
//! vector) pairs. At generation time the design's function summary is
//! embedded with the same embedder, the top candidates are found by cosine
//! similarity, and a pluggable pair scorer re-ranks them. No model training
//! is involved anywhere: the default embedder is hashed bag-of-words and the
//! default scorer is token-set Jaccard, with HTTP hooks for real models.

mod embed;
mod index;
mod remote;
mod rerank;

pub use embed::{
    cosine_sim, embedding_tokens, CosineError, EmbedError, HashedBowEmbedder, DEFAULT_DIMENSION,
};
pub use index::{
    build_index, build_index_from_dir, load_index, retrieve_coarse, IndexError, RetrievalIndex,
};
pub use remote::{HttpEmbedder, HttpScorer, RemoteConfig};
pub use rerank::{rerank, JaccardScorer, PairScorer, RerankResult, ScorerError, ScorerInput};

use serde::{Deserialize, Serialize};

/// Fixed-dimension embedding vector, L2-normalized by every embedder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemanticVector {
    pub values: Vec<f64>,
}

/// One indexed snippet: purified single-module code plus the description
/// that was embedded for it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeEntry {
    pub fingerprint: String,
    pub code: String,
    pub description: String,
}

/// A retrieval hit with both ranking scores. `rerank_score` is on the
/// scorer's own scale and is only comparable within one query.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredCandidate {
    pub entry: CodeEntry,
    pub coarse_score: f64,
    pub rerank_score: f64,
}

/// Batch text embedder. Implementations must be deterministic for the same
/// `id()`, since persisted indexes record the id and refuse mismatches.
pub trait Embedder {
    fn id(&self) -> String;
    fn dimension(&self) -> usize;
    fn embed(&self, texts: &[String]) -> Result<Vec<SemanticVector>, EmbedError>;
}

/// Everything the second stage needs from retrieval: the winning snippet
/// for the prompt, every scored candidate for logging, and whether the
/// re-ranker fell back to coarse order.
#[derive(Debug, Clone, PartialEq)]
pub struct RetrievedContext {
    pub winner: CodeEntry,
    pub candidates: Vec<ScoredCandidate>,
    pub fallback_warning: Option<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum RetrieveError {
    #[error("retrieval index is empty")]
    EmptyIndex,
    #[error("query text is empty")]
    EmptyQuery,
    #[error(transparent)]
    Embed(#[from] EmbedError),
}

/// Number of coarse candidates fed to the re-ranker.
pub const DEFAULT_TOP_K: usize = 3;

/// Full retrieval: coarse top-k by cosine similarity, then re-ranking.
pub fn retrieve(
    index: &RetrievalIndex,
    query_text: &str,
    embedder: &dyn Embedder,
    scorer: &dyn PairScorer,
    k: usize,
) -> Result<RetrievedContext, RetrieveError> {
    if query_text.trim().is_empty() {
        return Err(RetrieveError::EmptyQuery);
    }
    let coarse = retrieve_coarse(index, query_text, embedder, k)?;
    let reranked = rerank(coarse, query_text, scorer);
    let winner = reranked
        .candidates
        .first()
        .expect("coarse retrieval returned at least one candidate")
        .entry
        .clone();
    Ok(RetrievedContext {
        winner,
        candidates: reranked.candidates,
        fallback_warning: reranked.fallback_warning,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture_index() -> RetrievalIndex {
        let entries = [
            ("shift register with serial input and parallel output", "module sr; endmodule"),
            ("16-bit carry lookahead adder with carry out", "module cla; endmodule"),
            ("asynchronous fifo buffer with gray code pointers", "module fifo; endmodule"),
            ("round robin arbiter for four requesters", "module arb; endmodule"),
            ("pwm generator with configurable duty cycle", "module pwm; endmodule"),
        ];
        let embedder = HashedBowEmbedder::default();
        build_index(
            entries
                .iter()
                .map(|(desc, code)| (code.to_string(), desc.to_string()))
                .collect(),
            &embedder,
        )
        .unwrap()
    }

    #[test]
    fn golden_path_finds_the_lexical_match() {
        let index = fixture_index();
        let embedder = HashedBowEmbedder::default();
        let ctx = retrieve(
            &index,
            "a carry lookahead adder, 16-bit",
            &embedder,
            &JaccardScorer,
            DEFAULT_TOP_K,
        )
        .unwrap();
        assert_eq!(ctx.winner.code, "module cla; endmodule");
        assert_eq!(ctx.candidates.len(), 3);
        assert!(ctx.fallback_warning.is_none());
        assert!(ctx.candidates[0].rerank_score >= ctx.candidates[1].rerank_score);
    }

    #[test]
    fn empty_query_is_rejected() {
        let index = fixture_index();
        let embedder = HashedBowEmbedder::default();
        assert!(matches!(
            retrieve(&index, "  ", &embedder, &JaccardScorer, 3),
            Err(RetrieveError::EmptyQuery)
        ));
    }
}
