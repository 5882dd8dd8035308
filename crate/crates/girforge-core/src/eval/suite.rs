//! Benchmark suite loading and preflight.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::tools::{simulate, EvalError, OutputNormalizer, ToolConfig};
use crate::extract::{extract_modules, hierarchy_depth, purify_source};

pub const DEFAULT_CASE_TIMEOUT_MS: u64 = 10_000;

#[derive(Debug, Clone)]
pub struct BenchmarkCase {
    pub id: String,
    pub description: String,
    pub golden_files: Vec<PathBuf>,
    pub testbench: PathBuf,
    pub top_module: String,
    pub timeout_ms: u64,
}

#[derive(Deserialize)]
struct CaseManifest {
    id: String,
    top_module: String,
    #[serde(default)]
    timeout_ms: Option<u64>,
}

/// Optional suite-level manifest (`suite.json` at the suite root).
#[derive(Deserialize, Default)]
struct SuiteManifest {
    /// Extra stdout line filters, appended to the built-in ones.
    #[serde(default)]
    drop_line_patterns: Vec<String>,
    #[serde(default)]
    default_timeout_ms: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteMetadata {
    pub case_count: usize,
    pub avg_golden_lines: f64,
    pub avg_hierarchy_depth: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExcludedCase {
    pub case_id: String,
    pub reason: String,
}

pub struct LoadedSuite {
    pub root: PathBuf,
    pub cases: Vec<BenchmarkCase>,
    pub excluded: Vec<ExcludedCase>,
    pub metadata: SuiteMetadata,
    pub normalizer: OutputNormalizer,
    /// Normalized golden stdout per case, recorded during preflight so
    /// candidate runs never recompute it.
    pub golden_stdout: BTreeMap<String, String>,
}

impl LoadedSuite {
    pub fn case(&self, id: &str) -> Option<&BenchmarkCase> {
        self.cases.iter().find(|c| c.id == id)
    }
}

#[derive(Debug, Error)]
pub enum SuiteLoadError {
    #[error("no benchmark cases under {dir} ({} excluded by preflight: {})", .excluded.len(), .excluded.join("; "))]
    NoCases { dir: String, excluded: Vec<String> },
    #[error("case {case_id}: {reason}")]
    BadManifest { case_id: String, reason: String },
    #[error("bad stdout filter pattern: {0}")]
    BadPattern(#[from] regex::Error),
    #[error(transparent)]
    Tool(EvalError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Loads every case directory, runs each golden reference through the
/// configured toolchain, and caches its normalized stdout. Cases whose
/// golden fails are excluded with a note; a missing tool aborts the load.
pub fn load_suite(suite_dir: &Path, tools: &ToolConfig) -> Result<LoadedSuite, SuiteLoadError> {
    let manifest: SuiteManifest = match std::fs::read_to_string(suite_dir.join("suite.json")) {
        Ok(text) => serde_json::from_str(&text).map_err(|e| SuiteLoadError::BadManifest {
            case_id: "suite.json".to_string(),
            reason: e.to_string(),
        })?,
        Err(_) => SuiteManifest::default(),
    };
    let normalizer = OutputNormalizer::with_extra_patterns(&manifest.drop_line_patterns)?;

    let mut case_dirs: Vec<PathBuf> = std::fs::read_dir(suite_dir)?
        .filter_map(|entry| entry.ok())
        .map(|entry| entry.path())
        .filter(|path| path.is_dir())
        .collect();
    case_dirs.sort();

    let mut cases = Vec::new();
    let mut excluded = Vec::new();
    let mut golden_stdout = BTreeMap::new();
    let scratch = tempfile::tempdir()?;

    for dir in &case_dirs {
        let case = parse_case(dir, manifest.default_timeout_ms)?;

        let mut sources = case.golden_files.clone();
        sources.push(case.testbench.clone());
        let workdir = scratch.path().join(&case.id);
        let run = simulate(&sources, &workdir, tools, &normalizer, case.timeout_ms)
            .map_err(SuiteLoadError::Tool)?;
        if !run.compiled {
            excluded.push(ExcludedCase {
                case_id: case.id.clone(),
                reason: format!("golden failed to compile: {}", first_line(&run.compiler_log)),
            });
            continue;
        }
        if run.timed_out {
            excluded.push(ExcludedCase {
                case_id: case.id.clone(),
                reason: format!("golden simulation exceeded {} ms", case.timeout_ms),
            });
            continue;
        }
        if !run.sim_ok {
            excluded.push(ExcludedCase {
                case_id: case.id.clone(),
                reason: "golden simulation exited nonzero".to_string(),
            });
            continue;
        }
        golden_stdout.insert(case.id.clone(), run.stdout_normalized);
        cases.push(case);
    }

    if cases.is_empty() {
        return Err(SuiteLoadError::NoCases {
            dir: suite_dir.display().to_string(),
            excluded: excluded
                .iter()
                .map(|e| format!("{}: {}", e.case_id, e.reason))
                .collect(),
        });
    }

    let metadata = compute_metadata(&cases);
    Ok(LoadedSuite {
        root: suite_dir.to_path_buf(),
        cases,
        excluded,
        metadata,
        normalizer,
        golden_stdout,
    })
}

fn parse_case(dir: &Path, default_timeout_ms: Option<u64>) -> Result<BenchmarkCase, SuiteLoadError> {
    let dir_name = dir
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let bad = |reason: String| SuiteLoadError::BadManifest {
        case_id: dir_name.clone(),
        reason,
    };

    let manifest_path = dir.join("case.json");
    let manifest_text =
        std::fs::read_to_string(&manifest_path).map_err(|e| bad(format!("case.json: {e}")))?;
    let manifest: CaseManifest =
        serde_json::from_str(&manifest_text).map_err(|e| bad(format!("case.json: {e}")))?;
    if manifest.id != dir_name {
        return Err(bad(format!(
            "manifest id {:?} does not match directory name",
            manifest.id
        )));
    }

    let description = std::fs::read_to_string(dir.join("description.txt"))
        .map_err(|e| bad(format!("description.txt: {e}")))?;

    let golden_dir = dir.join("golden");
    let mut golden_files: Vec<PathBuf> = std::fs::read_dir(&golden_dir)
        .map_err(|e| bad(format!("golden/: {e}")))?
        .filter_map(|entry| entry.ok())
        .map(|entry| entry.path())
        .filter(|path| path.extension().map(|e| e == "v" || e == "sv").unwrap_or(false))
        .collect();
    golden_files.sort();
    if golden_files.is_empty() {
        return Err(bad("golden/ holds no .v files".to_string()));
    }

    let testbench = dir.join("tb.v");
    if !testbench.is_file() {
        return Err(bad("tb.v is missing".to_string()));
    }

    Ok(BenchmarkCase {
        id: manifest.id,
        description,
        golden_files,
        testbench,
        top_module: manifest.top_module,
        timeout_ms: manifest
            .timeout_ms
            .or(default_timeout_ms)
            .unwrap_or(DEFAULT_CASE_TIMEOUT_MS),
    })
}

fn compute_metadata(cases: &[BenchmarkCase]) -> SuiteMetadata {
    let mut total_lines = 0usize;
    let mut total_depth = 0usize;
    for case in cases {
        let mut combined = String::new();
        for file in &case.golden_files {
            if let Ok(text) = std::fs::read_to_string(file) {
                total_lines += text.lines().count();
                combined.push_str(&text);
                combined.push('\n');
            }
        }
        let depth = purify_source(&combined)
            .ok()
            .and_then(|purified| extract_modules(&purified).ok())
            .map(|(decls, _)| hierarchy_depth(&decls, &case.top_module))
            .unwrap_or(1);
        total_depth += depth;
    }
    let count = cases.len().max(1) as f64;
    SuiteMetadata {
        case_count: cases.len(),
        avg_golden_lines: total_lines as f64 / count,
        avg_hierarchy_depth: total_depth as f64 / count,
    }
}

fn first_line(text: &str) -> String {
    text.lines()
        .find(|l| !l.trim().is_empty())
        .unwrap_or("")
        .to_string()
}
