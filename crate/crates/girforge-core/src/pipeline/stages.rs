//! The two generation stages.

use serde::Serialize;
use thiserror::Error;

use super::prompts::{stage1_prompt, stage1_retry_prompt, stage2_prompt};
use super::{PipelineConfig, RetrievalHandle};
use crate::align::{render_alignment, AlignmentText};
use crate::eval::EMPTY_CANDIDATE_MARKER;
use crate::gir::{parse_gir, repair_gir, serialize_gir, validate_gir, GirDocument};
use crate::llm::{ChatRequest, LlmClient, LlmError};
use crate::retrieval::retrieve;

pub const DEFAULT_RETRY_BUDGET: u32 = 2;

#[derive(Debug, Error)]
pub enum Stage1Error {
    #[error("no valid design summary after {attempts} attempts; last error: {last_report}")]
    Exhausted { attempts: usize, last_report: String },
    #[error(transparent)]
    Llm(#[from] LlmError),
}

#[derive(Debug, Error)]
pub enum Stage2Error {
    #[error("design summary no longer serializes: {0}")]
    Serialize(String),
    #[error(transparent)]
    Llm(#[from] LlmError),
}

/// What each stage-1 attempt did, kept for the run record.
#[derive(Debug, Clone, Serialize)]
pub struct Stage1Attempt {
    pub reply_sha256: String,
    /// Parse or validation report; absent on the successful attempt.
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Stage1Trace {
    pub attempts: Vec<Stage1Attempt>,
    pub retries_used: u32,
}

/// Asks for a design summary, repairs and parses the reply, and re-prompts
/// with the error report on failure, up to `retry_budget` extra attempts.
pub fn run_stage1(
    nl_description: &str,
    llm: &LlmClient,
    retry_budget: u32,
    config: &PipelineConfig,
) -> Result<(GirDocument, Stage1Trace), Stage1Error> {
    let mut attempts = Vec::new();
    let mut last_report = String::new();

    for attempt in 0..=retry_budget {
        let prompt = if attempt == 0 {
            stage1_prompt(nl_description)
        } else {
            stage1_retry_prompt(nl_description, &last_report)
        };
        let mut generation = config.generation.clone();
        generation.n_samples = 1;
        let response = llm.complete(&ChatRequest {
            system_text: prompt.system,
            user_text: prompt.user,
            config: generation,
        })?;
        let reply = &response.samples[0];
        let reply_sha256 = crate::llm::sha256_hex(reply.as_bytes());

        match parse_reply(reply) {
            Ok(doc) => {
                attempts.push(Stage1Attempt {
                    reply_sha256,
                    error: None,
                });
                return Ok((
                    doc,
                    Stage1Trace {
                        attempts,
                        retries_used: attempt,
                    },
                ));
            }
            Err(report) => {
                attempts.push(Stage1Attempt {
                    reply_sha256,
                    error: Some(report.clone()),
                });
                last_report = report;
            }
        }
    }

    Err(Stage1Error::Exhausted {
        attempts: attempts.len(),
        last_report,
    })
}

fn parse_reply(reply: &str) -> Result<GirDocument, String> {
    let json = repair_gir(reply).map_err(|e| e.to_string())?;
    let doc = parse_gir(&json).map_err(|e| e.to_string())?;
    let report = validate_gir(&doc);
    if report.has_errors() {
        return Err(report.to_string());
    }
    Ok(doc)
}

/// Pulls Verilog out of one sample: the first fenced code block wins; with
/// no fences, the longest `module ... endmodule` span does. Returns None
/// when neither yields any code.
pub fn extract_verilog(sample: &str) -> Option<String> {
    if let Some(inner) = first_fenced_block(sample) {
        let trimmed = inner.trim();
        if trimmed.is_empty() {
            return None;
        }
        return Some(format!("{trimmed}\n"));
    }
    let span = longest_module_span(sample)?;
    Some(format!("{}\n", span.trim()))
}

fn first_fenced_block(text: &str) -> Option<&str> {
    let open = text.find("```")?;
    let after_ticks = &text[open + 3..];
    // Skip the info string up to the end of the opening line.
    let body_start = after_ticks.find('\n')? + 1;
    let body = &after_ticks[body_start..];
    let close = body.find("```")?;
    Some(&body[..close])
}

fn longest_module_span(text: &str) -> Option<&str> {
    let module_re = regex::Regex::new(r"\bmodule\b").unwrap();
    let endmodule_re = regex::Regex::new(r"\bendmodule\b").unwrap();
    let start = module_re.find(text)?.start();
    let end = endmodule_re.find_iter(text).last()?.end();
    if end <= start {
        return None;
    }
    Some(&text[start..end])
}

#[derive(Debug, Clone, Serialize)]
pub struct Candidate {
    pub text: String,
    pub extracted: bool,
}

#[derive(Debug, Clone, Serialize)]
pub enum RetrievalOutcome {
    Disabled,
    Unavailable { warning: String },
    Retrieved(RetrievedContextSummary),
}

/// Slimmed retrieval context for the run record: full candidate code lives
/// in the index, only scores and the winner snippet are recorded.
#[derive(Debug, Clone, Serialize)]
pub struct RetrievedContextSummary {
    pub query: String,
    pub winner_fingerprint: String,
    pub winner_code: String,
    pub candidates: Vec<CandidateScore>,
    pub fallback_warning: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CandidateScore {
    pub fingerprint: String,
    pub coarse_score: f64,
    pub rerank_score: f64,
}

pub struct Stage2Output {
    pub candidates: Vec<Candidate>,
    pub alignment: AlignmentText,
    pub retrieval: RetrievalOutcome,
    pub user_prompt: String,
}

/// Renders alignment text, retrieves a reference snippet keyed on the top
/// module's function description, asks for n samples, and extracts Verilog
/// from each. Extraction failures keep their slot as empty-marked
/// candidates so downstream pass@k still sees n attempts.
pub fn run_stage2(
    gir: &GirDocument,
    retrieval_handle: Option<&RetrievalHandle>,
    llm: &LlmClient,
    n: usize,
    config: &PipelineConfig,
) -> Result<Stage2Output, Stage2Error> {
    let alignment = render_alignment(gir);
    let gir_json = serialize_gir(gir).map_err(|e| Stage2Error::Serialize(e.to_string()))?;

    let query = gir
        .top()
        .map(|top| top.function_summary.clone())
        .unwrap_or_default();
    let (retrieval, context) = match retrieval_handle {
        None => (RetrievalOutcome::Disabled, None),
        Some(handle) => {
            match retrieve(handle.index, &query, handle.embedder, handle.scorer, handle.top_k) {
                Ok(context) => (
                    RetrievalOutcome::Retrieved(RetrievedContextSummary {
                        query: query.clone(),
                        winner_fingerprint: context.winner.fingerprint.clone(),
                        winner_code: context.winner.code.clone(),
                        candidates: context
                            .candidates
                            .iter()
                            .map(|c| CandidateScore {
                                fingerprint: c.entry.fingerprint.clone(),
                                coarse_score: c.coarse_score,
                                rerank_score: c.rerank_score,
                            })
                            .collect(),
                        fallback_warning: context.fallback_warning.clone(),
                    }),
                    Some(context),
                ),
                Err(e) => (
                    RetrievalOutcome::Unavailable {
                        warning: format!("retrieval unavailable, proceeding without context: {e}"),
                    },
                    None,
                ),
            }
        }
    };

    let prompt = stage2_prompt(
        &gir_json,
        &alignment,
        context.as_ref(),
        config.include_all_retrieved,
    );
    let mut generation = config.generation.clone();
    generation.n_samples = n;
    let user_prompt = prompt.user.clone();
    let response = llm.complete(&ChatRequest {
        system_text: prompt.system,
        user_text: prompt.user,
        config: generation,
    })?;

    let candidates = response
        .samples
        .iter()
        .map(|sample| match extract_verilog(sample) {
            Some(text) => Candidate {
                text,
                extracted: true,
            },
            None => Candidate {
                text: format!("{EMPTY_CANDIDATE_MARKER}\n"),
                extracted: false,
            },
        })
        .collect();

    Ok(Stage2Output {
        candidates,
        alignment,
        retrieval,
        user_prompt,
    })
}
