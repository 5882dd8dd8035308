//! Orchestration of the two-stage generation flow and dataset preparation.

mod dataprep;
mod generate;
mod prompts;
mod stages;

pub use dataprep::{
    build_instruction_pairs, DataprepError, DataprepOptions, DataprepSummary, InstructionPair,
};
pub use generate::{generate, read_candidates, GenerateError, GenerationRecord};
pub use prompts::{
    description_prompt, stage1_prompt, stage1_retry_prompt, stage2_prompt, template_description,
    Stage1Prompt, Stage2Prompt,
};
pub use stages::{
    extract_verilog, run_stage1, run_stage2, Candidate, CandidateScore, RetrievalOutcome,
    RetrievedContextSummary, Stage1Attempt, Stage1Error, Stage1Trace, Stage2Error, Stage2Output,
    DEFAULT_RETRY_BUDGET,
};

use crate::llm::GenerationConfig;
use crate::retrieval::{Embedder, PairScorer, RetrievalIndex, DEFAULT_TOP_K};

/// Retrieval wiring for stage 2: disabled when absent.
pub struct RetrievalHandle<'a> {
    pub index: &'a RetrievalIndex,
    pub embedder: &'a dyn Embedder,
    pub scorer: &'a dyn PairScorer,
    pub top_k: usize,
}

impl<'a> RetrievalHandle<'a> {
    pub fn new(
        index: &'a RetrievalIndex,
        embedder: &'a dyn Embedder,
        scorer: &'a dyn PairScorer,
    ) -> Self {
        RetrievalHandle {
            index,
            embedder,
            scorer,
            top_k: DEFAULT_TOP_K,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub generation: GenerationConfig,
    /// Extra stage-1 attempts after a failed parse.
    pub retry_budget: u32,
    /// Put every retrieved snippet in the stage-2 prompt, not just the
    /// rerank winner.
    pub include_all_retrieved: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            generation: GenerationConfig::default(),
            retry_budget: DEFAULT_RETRY_BUDGET,
            include_all_retrieved: false,
        }
    }
}
