//! Suite evaluation and report emission.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::passk::pass_at_k;
use super::sha256_hex;
use super::suite::{ExcludedCase, LoadedSuite, SuiteMetadata};
use super::tools::{check_syntax, run_functional, AttemptResult, EvalError, ToolConfig};

#[derive(Debug, Clone)]
pub struct EvalRunConfig {
    /// Attempts per case; the sample count the suite was generated with.
    pub n: usize,
    /// Worker threads; 0 means one per CPU.
    pub jobs: usize,
    pub tools: ToolConfig,
    /// Echoed into the report manifest for reproducibility bookkeeping.
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnvironmentManifest {
    pub tool: String,
    pub compile_template: String,
    pub run_template: String,
    pub n: usize,
    pub jobs: usize,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CaseReport {
    pub case_id: String,
    pub n: usize,
    pub c: usize,
    pub pass_at_1: f64,
    pub pass_at_5: Option<f64>,
    pub attempts: Vec<AttemptResult>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteReport {
    pub metadata: SuiteMetadata,
    pub environment: EnvironmentManifest,
    pub cases: Vec<CaseReport>,
    pub excluded: Vec<ExcludedCase>,
    pub suite_pass_at_1: f64,
    pub suite_pass_at_5: Option<f64>,
}

/// Evaluates one candidate set per case: each candidate is syntax-checked,
/// then run against the testbench and compared with the cached golden
/// stdout. Identical candidate texts within a case are evaluated once and
/// the result reused slot by slot.
pub fn evaluate_suite(
    suite: &LoadedSuite,
    candidates_by_case: &BTreeMap<String, Vec<String>>,
    config: &EvalRunConfig,
) -> Result<SuiteReport, EvalError> {
    if config.n < 1 {
        return Err(EvalError::BadConfig(
            "attempt count n must be at least 1".to_string(),
        ));
    }
    for case in &suite.cases {
        let got = candidates_by_case
            .get(&case.id)
            .map(|c| c.len())
            .ok_or_else(|| EvalError::MissingCandidates {
                case_id: case.id.clone(),
            })?;
        if got != config.n {
            return Err(EvalError::BadConfig(format!(
                "case {} has {} candidates, expected n={}",
                case.id, got, config.n
            )));
        }
    }

    let scratch = tempfile::tempdir()?;

    // One job per distinct candidate text per case.
    struct Job<'a> {
        case_index: usize,
        text: &'a str,
        key: (usize, String),
    }
    let mut jobs: Vec<Job> = Vec::new();
    let mut slot_keys: Vec<Vec<(usize, String)>> = Vec::new();
    for (case_index, case) in suite.cases.iter().enumerate() {
        let candidates = &candidates_by_case[&case.id];
        let mut keys = Vec::with_capacity(candidates.len());
        for text in candidates {
            let key = (case_index, sha256_hex(text.as_bytes()));
            if !jobs.iter().any(|j| j.key == key) {
                jobs.push(Job {
                    case_index,
                    text,
                    key: key.clone(),
                });
            }
            keys.push(key);
        }
        slot_keys.push(keys);
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs)
        .build()
        .map_err(|e| EvalError::BadConfig(e.to_string()))?;

    let outcomes: Vec<Result<((usize, String), AttemptResult), EvalError>> = pool.install(|| {
        use rayon::prelude::*;
        jobs.par_iter()
            .map(|job| {
                let case = &suite.cases[job.case_index];
                let workdir = scratch
                    .path()
                    .join(format!("{}-{}", case.id, &job.key.1[..16]));
                let attempt = evaluate_candidate(
                    job.text,
                    case,
                    &suite.golden_stdout[&case.id],
                    &workdir,
                    config,
                    suite,
                )?;
                Ok((job.key.clone(), attempt))
            })
            .collect()
    });

    let mut by_key: BTreeMap<(usize, String), AttemptResult> = BTreeMap::new();
    for outcome in outcomes {
        let (key, attempt) = outcome?;
        by_key.insert(key, attempt);
    }

    let mut cases = Vec::new();
    for (case_index, case) in suite.cases.iter().enumerate() {
        let attempts: Vec<AttemptResult> = slot_keys[case_index]
            .iter()
            .enumerate()
            .map(|(slot, key)| {
                let mut attempt = by_key[key].clone();
                attempt.candidate_index = slot;
                attempt
            })
            .collect();
        let c = attempts.iter().filter(|a| a.functional_ok).count();
        let n = attempts.len();
        let pass_at_1 = pass_at_k(n as u64, c as u64, 1).expect("n >= 1 was checked");
        let pass_at_5 = if n >= 5 {
            Some(pass_at_k(n as u64, c as u64, 5).unwrap())
        } else {
            None
        };
        cases.push(CaseReport {
            case_id: case.id.clone(),
            n,
            c,
            pass_at_1,
            pass_at_5,
            attempts,
        });
    }

    let suite_pass_at_1 = mean(cases.iter().map(|c| c.pass_at_1));
    let suite_pass_at_5 = cases
        .iter()
        .map(|c| c.pass_at_5)
        .collect::<Option<Vec<f64>>>()
        .map(|values| mean(values.into_iter()));

    Ok(SuiteReport {
        metadata: suite.metadata.clone(),
        environment: EnvironmentManifest {
            tool: config.tools.describe_tool(),
            compile_template: config.tools.compile_template.clone(),
            run_template: config.tools.run_template.clone(),
            n: config.n,
            jobs: config.jobs,
            seed: config.seed,
        },
        cases,
        excluded: suite.excluded.clone(),
        suite_pass_at_1,
        suite_pass_at_5,
    })
}

fn evaluate_candidate(
    text: &str,
    case: &super::suite::BenchmarkCase,
    expected_stdout: &str,
    workdir: &Path,
    config: &EvalRunConfig,
    suite: &LoadedSuite,
) -> Result<AttemptResult, EvalError> {
    let syntax = check_syntax(text, &workdir.join("syntax"), &config.tools)?;
    if !syntax.ok {
        return Ok(AttemptResult {
            candidate_index: 0,
            syntax_ok: false,
            functional_ok: false,
            compiler_log: syntax.log,
            sim_output_hash: String::new(),
            timed_out: false,
            wall_ms: 0,
        });
    }
    let mut attempt = run_functional(
        text,
        0,
        &case.testbench,
        expected_stdout,
        &workdir.join("sim"),
        &config.tools,
        &suite.normalizer,
        case.timeout_ms,
    )?;
    // The candidate alone compiled; a failure linking against the testbench
    // is a functional failure, not a syntax one.
    attempt.syntax_ok = true;
    Ok(attempt)
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut count = 0usize;
    for v in values {
        sum += v;
        count += 1;
    }
    if count == 0 {
        0.0
    } else {
        sum / count as f64
    }
}

fn fmt_rate(value: Option<f64>) -> String {
    match value {
        Some(v) => format!("{v:.4}"),
        None => "-".to_string(),
    }
}

/// Renders the fixed-width table mirrored by report.txt.
pub fn render_table(report: &SuiteReport) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "suite: {} cases ({} excluded), avg {:.1} lines, avg hierarchy depth {:.2}",
        report.metadata.case_count,
        report.excluded.len(),
        report.metadata.avg_golden_lines,
        report.metadata.avg_hierarchy_depth
    )
    .unwrap();
    writeln!(out, "tool: {}", report.environment.tool).unwrap();
    writeln!(out).unwrap();
    writeln!(
        out,
        "{:<24} {:>4} {:>4} {:>8} {:>8}",
        "case", "n", "c", "pass@1", "pass@5"
    )
    .unwrap();
    for case in &report.cases {
        writeln!(
            out,
            "{:<24} {:>4} {:>4} {:>8} {:>8}",
            case.case_id,
            case.n,
            case.c,
            fmt_rate(Some(case.pass_at_1)),
            fmt_rate(case.pass_at_5)
        )
        .unwrap();
    }
    for excluded in &report.excluded {
        writeln!(
            out,
            "{:<24} excluded: {}",
            excluded.case_id, excluded.reason
        )
        .unwrap();
    }
    writeln!(out).unwrap();
    writeln!(
        out,
        "{:<24} {:>4} {:>4} {:>8} {:>8}",
        "suite mean",
        "",
        "",
        fmt_rate(Some(report.suite_pass_at_1)),
        fmt_rate(report.suite_pass_at_5)
    )
    .unwrap();
    out
}

/// Writes report.json and report.txt into `dir`.
pub fn write_report(report: &SuiteReport, dir: &Path) -> Result<(), EvalError> {
    std::fs::create_dir_all(dir)?;
    let mut json = serde_json::to_string_pretty(report).expect("report serializes");
    json.push('\n');
    std::fs::write(dir.join("report.json"), json)?;
    std::fs::write(dir.join("report.txt"), render_table(report))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::super::suite::load_suite;
    use super::super::suite::tests::write_case;
    use super::super::tools::fake_tools;
    use super::*;

    fn toy_suite(root: &Path) -> (LoadedSuite, ToolConfig) {
        let suite_dir = root.join("suite");
        write_case(&suite_dir, "case01", "EMIT a\n", "EMIT tb\n", "m1");
        write_case(&suite_dir, "case02", "EMIT b\n", "EMIT tb\n", "m2");
        let tools = fake_tools::config(root);
        let suite = load_suite(&suite_dir, &tools).unwrap();
        (suite, tools)
    }

    fn config(tools: &ToolConfig, n: usize) -> EvalRunConfig {
        EvalRunConfig {
            n,
            jobs: 2,
            tools: tools.clone(),
            seed: None,
        }
    }

    #[test]
    fn golden_echo_scores_full_marks() {
        let root = tempfile::tempdir().unwrap();
        let (suite, tools) = toy_suite(root.path());
        let candidates: BTreeMap<String, Vec<String>> = [
            ("case01".to_string(), vec!["EMIT a\n".to_string(); 2]),
            ("case02".to_string(), vec!["EMIT b\n".to_string(); 2]),
        ]
        .into();
        let report = evaluate_suite(&suite, &candidates, &config(&tools, 2)).unwrap();
        assert_eq!(report.suite_pass_at_1, 1.0);
        assert!(report.suite_pass_at_5.is_none());
        assert!(report.cases.iter().all(|c| c.c == c.n));
    }

    #[test]
    fn one_broken_case_gives_two_thirds() {
        let root = tempfile::tempdir().unwrap();
        let suite_dir = root.path().join("suite");
        write_case(&suite_dir, "case01", "EMIT a\n", "", "m1");
        write_case(&suite_dir, "case02", "EMIT b\n", "", "m2");
        write_case(&suite_dir, "case03", "EMIT c\n", "", "m3");
        let tools = fake_tools::config(root.path());
        let suite = load_suite(&suite_dir, &tools).unwrap();
        let candidates: BTreeMap<String, Vec<String>> = [
            ("case01".to_string(), vec!["EMIT a\n".to_string()]),
            ("case02".to_string(), vec!["EMIT wrong\n".to_string()]),
            ("case03".to_string(), vec!["EMIT c\n".to_string()]),
        ]
        .into();
        let report = evaluate_suite(&suite, &candidates, &config(&tools, 1)).unwrap();
        assert!((report.suite_pass_at_1 - 2.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn duplicate_candidates_share_one_evaluation() {
        let root = tempfile::tempdir().unwrap();
        let (suite, tools) = toy_suite(root.path());
        let candidates: BTreeMap<String, Vec<String>> = [
            ("case01".to_string(), vec!["EMIT a\n".to_string(); 5]),
            ("case02".to_string(), vec!["EMIT wrong\n".to_string(); 5]),
        ]
        .into();
        let report = evaluate_suite(&suite, &candidates, &config(&tools, 5)).unwrap();
        let case1 = &report.cases[0];
        assert_eq!(case1.c, 5);
        assert_eq!(case1.pass_at_5, Some(1.0));
        let case2 = &report.cases[1];
        assert_eq!(case2.c, 0);
        assert_eq!(case2.pass_at_5, Some(0.0));
        // Slots keep their own indices even when results are shared.
        let indices: Vec<usize> = case1.attempts.iter().map(|a| a.candidate_index).collect();
        assert_eq!(indices, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn empty_marked_candidates_fail_without_breaking_slots() {
        let root = tempfile::tempdir().unwrap();
        let (suite, tools) = toy_suite(root.path());
        let marker = format!("{}\n", super::super::tools::EMPTY_CANDIDATE_MARKER);
        let candidates: BTreeMap<String, Vec<String>> = [
            (
                "case01".to_string(),
                vec!["EMIT a\n".to_string(), marker.clone(), "EMIT a\n".to_string()],
            ),
            ("case02".to_string(), vec!["EMIT b\n".to_string(); 3]),
        ]
        .into();
        let report = evaluate_suite(&suite, &candidates, &config(&tools, 3)).unwrap();
        let case1 = &report.cases[0];
        assert_eq!(case1.n, 3);
        assert_eq!(case1.c, 2);
        assert!(!case1.attempts[1].syntax_ok);
    }

    #[test]
    fn candidate_count_mismatch_is_rejected() {
        let root = tempfile::tempdir().unwrap();
        let (suite, tools) = toy_suite(root.path());
        let candidates: BTreeMap<String, Vec<String>> = [
            ("case01".to_string(), vec!["EMIT a\n".to_string()]),
            ("case02".to_string(), vec!["EMIT b\n".to_string(); 2]),
        ]
        .into();
        assert!(matches!(
            evaluate_suite(&suite, &candidates, &config(&tools, 1)),
            Err(EvalError::BadConfig(_))
        ));
        let missing: BTreeMap<String, Vec<String>> =
            [("case01".to_string(), vec!["EMIT a\n".to_string()])].into();
        assert!(matches!(
            evaluate_suite(&suite, &missing, &config(&tools, 1)),
            Err(EvalError::MissingCandidates { .. })
        ));
    }

    #[test]
    fn report_files_are_written_and_stable() {
        let root = tempfile::tempdir().unwrap();
        let (suite, tools) = toy_suite(root.path());
        let candidates: BTreeMap<String, Vec<String>> = [
            ("case01".to_string(), vec!["EMIT a\n".to_string()]),
            ("case02".to_string(), vec!["EMIT b\n".to_string()]),
        ]
        .into();
        let report = evaluate_suite(&suite, &candidates, &config(&tools, 1)).unwrap();
        let out = root.path().join("out");
        write_report(&report, &out).unwrap();
        let table = std::fs::read_to_string(out.join("report.txt")).unwrap();
        assert!(table.contains("case01"));
        assert!(table.contains("pass@1"));
        assert!(table.contains("suite mean"));
        let json: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap())
                .unwrap();
        assert_eq!(json["cases"].as_array().unwrap().len(), 2);
        assert_eq!(json["environment"]["n"], 1);
    }
}
