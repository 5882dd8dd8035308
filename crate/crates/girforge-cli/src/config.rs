//! Run configuration: a TOML file merged with command-line overrides.
//!
//! Every key has a default, so all sections and fields are optional in the
//! file. Unknown keys are rejected by name rather than ignored, to catch
//! typos before they silently fall back to defaults. The effective
//! configuration is echoed into each run's manifest.

use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::{Deserialize, Serialize};

use girforge_core::eval::{ToolConfig, DEFAULT_COMPILE_TEMPLATE, DEFAULT_RUN_TEMPLATE};
use girforge_core::llm::GenerationConfig;
use girforge_core::pipeline::{PipelineConfig, DEFAULT_RETRY_BUDGET};
use girforge_core::retrieval::{DEFAULT_DIMENSION, DEFAULT_TOP_K};

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub paths: PathsSection,
    pub llm: LlmSection,
    pub retrieval: RetrievalSection,
    pub eval: EvalSection,
    pub run: RunSection,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathsSection {
    /// Retrieval index consulted by `gen` when no --index flag is given.
    pub index: Option<PathBuf>,
    /// Parent directory for run output.
    pub runs: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LlmSection {
    /// Model name sent to the chat endpoint. The GIRFORGE_LLM_MODEL
    /// environment variable takes precedence when set.
    pub model: String,
    pub temperature: f64,
    pub max_tokens: u64,
    /// Candidates per generation request.
    pub n_samples: usize,
    pub timeout_ms: u64,
    /// Transport-level retries per request (rate limits, 5xx, timeouts).
    pub max_retries: u32,
    /// Extra stage-1 attempts after a reply fails to parse or validate.
    pub retry_budget: u32,
    /// Simultaneous in-flight requests.
    pub concurrent_requests: usize,
}

impl Default for LlmSection {
    fn default() -> Self {
        let g = GenerationConfig::default();
        LlmSection {
            model: g.model_name,
            temperature: g.temperature,
            max_tokens: g.max_tokens,
            n_samples: g.n_samples,
            timeout_ms: g.timeout_ms,
            max_retries: g.max_retries,
            retry_budget: DEFAULT_RETRY_BUDGET,
            concurrent_requests: girforge_core::llm::DEFAULT_CONCURRENT_REQUESTS,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RetrievalSection {
    /// Embedding vector width. Must match any index being loaded.
    pub dimension: usize,
    /// Candidates kept by the coarse stage and shown to the re-ranker.
    pub top_k: usize,
    /// Put every retrieved snippet in the stage-2 prompt, not just the
    /// re-rank winner.
    pub include_all_retrieved: bool,
}

impl Default for RetrievalSection {
    fn default() -> Self {
        RetrievalSection {
            dimension: DEFAULT_DIMENSION,
            top_k: DEFAULT_TOP_K,
            include_all_retrieved: false,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalSection {
    /// Compile command template; {files} expands to the source list and
    /// {out} to the build product path.
    pub compile_template: String,
    /// Simulation command template; {vvp} expands to the build product.
    pub run_template: String,
    pub compile_timeout_ms: u64,
    /// Attempts per case expected by the evaluator. `eval --from` infers
    /// this from the run directory; `eval --live` generates this many.
    pub n: usize,
}

impl Default for EvalSection {
    fn default() -> Self {
        EvalSection {
            compile_template: DEFAULT_COMPILE_TEMPLATE.to_string(),
            run_template: DEFAULT_RUN_TEMPLATE.to_string(),
            compile_timeout_ms: girforge_core::eval::ToolConfig::default().compile_timeout_ms,
            n: 1,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    /// Worker threads for evaluation; 0 means one per CPU.
    pub jobs: usize,
    /// Recorded in manifests and reports. The pipeline itself is
    /// deterministic; this seeds auxiliary tooling only.
    pub seed: Option<u64>,
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> anyhow::Result<RunConfig> {
        let Some(path) = path else {
            return Ok(RunConfig::default());
        };
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config file {}", path.display()))?;
        let config: RunConfig = toml::from_str(&text)
            .with_context(|| format!("parsing config file {}", path.display()))?;
        Ok(config)
    }

    pub fn tool_config(&self) -> ToolConfig {
        ToolConfig {
            compile_template: self.eval.compile_template.clone(),
            run_template: self.eval.run_template.clone(),
            compile_timeout_ms: self.eval.compile_timeout_ms,
        }
    }

    pub fn generation_config(&self) -> GenerationConfig {
        let model_name = girforge_core::llm::HttpBackend::env_model()
            .unwrap_or_else(|| self.llm.model.clone());
        GenerationConfig {
            model_name,
            temperature: self.llm.temperature,
            max_tokens: self.llm.max_tokens,
            n_samples: self.llm.n_samples,
            timeout_ms: self.llm.timeout_ms,
            max_retries: self.llm.max_retries,
        }
    }

    pub fn pipeline_config(&self) -> PipelineConfig {
        PipelineConfig {
            generation: self.generation_config(),
            retry_budget: self.llm.retry_budget,
            include_all_retrieved: self.retrieval.include_all_retrieved,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_yields_defaults() {
        let config: RunConfig = toml::from_str("").unwrap();
        assert_eq!(config.retrieval.dimension, 512);
        assert_eq!(config.retrieval.top_k, 3);
        assert_eq!(config.llm.retry_budget, 2);
        assert_eq!(config.eval.n, 1);
        assert!(config.eval.compile_template.contains("{files}"));
    }

    #[test]
    fn unknown_keys_are_rejected_by_name() {
        let err = toml::from_str::<RunConfig>("[llm]\nn_sample = 5\n").unwrap_err();
        assert!(err.to_string().contains("n_sample"), "{err}");
        let err = toml::from_str::<RunConfig>("[llmm]\nmodel = \"x\"\n").unwrap_err();
        assert!(err.to_string().contains("llmm"), "{err}");
    }

    #[test]
    fn partial_sections_keep_other_defaults()  {
        let config: RunConfig =
            toml::from_str("[llm]\nn_samples = 5\n\n[run]\njobs = 2\n").unwrap();
        assert_eq!(config.llm.n_samples, 5);
        assert_eq!(config.llm.max_tokens, 4096);
        assert_eq!(config.run.jobs, 2);
    }
}
