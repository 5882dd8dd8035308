//! Benchmark evaluation: external-tool syntax checks, testbench runs
//! against golden references, and pass@k aggregation.

mod passk;
mod report;
mod suite;
mod tools;

pub use passk::{pass_at_k, DomainError};
pub use report::{
    evaluate_suite, render_table, write_report, CaseReport, EnvironmentManifest, EvalRunConfig,
    SuiteReport,
};
pub use suite::{
    load_suite, BenchmarkCase, ExcludedCase, LoadedSuite, SuiteLoadError, SuiteMetadata,
    DEFAULT_CASE_TIMEOUT_MS,
};
pub use tools::{
    check_syntax, is_empty_candidate, run_command, run_functional, simulate, AttemptResult,
    EvalError, OutputNormalizer, SimRun, SyntaxCheck, ToolConfig, ToolOutcome,
    DEFAULT_COMPILE_TEMPLATE, DEFAULT_RUN_TEMPLATE, DEFAULT_SIM_TIMEOUT_MS,
    EMPTY_CANDIDATE_MARKER,
};

pub(crate) use crate::llm::sha256_hex;

#[cfg(test)]
pub(crate) use tools::fake_tools;
