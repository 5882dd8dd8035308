//! Second-stage reranking of coarse candidates.

use std::collections::BTreeSet;

use thiserror::Error;

use super::embed::embedding_tokens;
use super::ScoredCandidate;

#[derive(Debug, Error)]
pub enum ScorerError {
    #[error("scorer returned {got} scores for {expected} pairs")]
    CountMismatch { expected: usize, got: usize },
    #[error("scorer unavailable: {0}")]
    Unavailable(String),
}

/// One query/document pair, plus the framed form sent to cross-encoder
/// style scorers.
#[derive(Debug, Clone)]
pub struct ScorerInput {
    pub framed: String,
    pub query: String,
    pub document: String,
}

impl ScorerInput {
    pub fn new(query: &str, document: &str) -> Self {
        ScorerInput {
            framed: format!("[CLS] {query} [SEP] {document} [SEP]"),
            query: query.to_string(),
            document: document.to_string(),
        }
    }
}

pub trait PairScorer {
    fn id(&self) -> String;
    fn score(&self, inputs: &[ScorerInput]) -> Result<Vec<f64>, ScorerError>;
}

/// Token-set Jaccard overlap between query and document. The built-in
/// scorer: cheap, deterministic, and with no external dependencies.
#[derive(Debug, Clone, Copy, Default)]
pub struct JaccardScorer;

impl PairScorer for JaccardScorer {
    fn id(&self) -> String {
        "jaccard-token-set".to_string()
    }

    fn score(&self, inputs: &[ScorerInput]) -> Result<Vec<f64>, ScorerError> {
        Ok(inputs
            .iter()
            .map(|input| {
                let q: BTreeSet<String> = embedding_tokens(&input.query).into_iter().collect();
                let d: BTreeSet<String> = embedding_tokens(&input.document).into_iter().collect();
                let union = q.union(&d).count();
                if union == 0 {
                    return 0.0;
                }
                q.intersection(&d).count() as f64 / union as f64
            })
            .collect())
    }
}

#[derive(Debug, Clone)]
pub struct RerankResult {
    pub candidates: Vec<ScoredCandidate>,
    /// Set when the scorer failed and the coarse order was kept.
    pub fallback_warning: Option<String>,
}

/// Reorders candidates by scorer output, descending. Ties fall back to the
/// coarse score and then the fingerprint, so the result is a deterministic
/// permutation of the input. A scorer failure keeps the coarse order and
/// reports it in `fallback_warning`.
pub fn rerank(
    candidates: Vec<ScoredCandidate>,
    query: &str,
    scorer: &dyn PairScorer,
) -> RerankResult {
    let inputs: Vec<ScorerInput> = candidates
        .iter()
        .map(|c| ScorerInput::new(query, &c.entry.description))
        .collect();

    let scores = match scorer.score(&inputs) {
        Ok(scores) if scores.len() == inputs.len() => scores,
        Ok(scores) => {
            return coarse_fallback(
                candidates,
                ScorerError::CountMismatch {
                    expected: inputs.len(),
                    got: scores.len(),
                },
            )
        }
        Err(e) => return coarse_fallback(candidates, e),
    };

    let mut reranked: Vec<ScoredCandidate> = candidates
        .into_iter()
        .zip(scores)
        .map(|(mut c, score)| {
            c.rerank_score = score;
            c
        })
        .collect();
    reranked.sort_by(|a, b| {
        b.rerank_score
            .total_cmp(&a.rerank_score)
            .then_with(|| b.coarse_score.total_cmp(&a.coarse_score))
            .then_with(|| a.entry.fingerprint.cmp(&b.entry.fingerprint))
    });
    RerankResult {
        candidates: reranked,
        fallback_warning: None,
    }
}

fn coarse_fallback(mut candidates: Vec<ScoredCandidate>, error: ScorerError) -> RerankResult {
    candidates.sort_by(|a, b| {
        b.coarse_score
            .total_cmp(&a.coarse_score)
            .then_with(|| a.entry.fingerprint.cmp(&b.entry.fingerprint))
    });
    for c in &mut candidates {
        c.rerank_score = c.coarse_score;
    }
    RerankResult {
        candidates,
        fallback_warning: Some(format!("reranker fell back to coarse order: {error}")),
    }
}
