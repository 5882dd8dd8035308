use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::Context;

use girforge_core::eval::{evaluate_suite, load_suite, render_table, write_report, EvalRunConfig};
use girforge_core::pipeline::{generate, read_candidates, RetrievalHandle};
use girforge_core::retrieval::JaccardScorer;

use super::{build_client, open_index, resolve_run_dir, write_manifest, RunManifest};
use crate::config::RunConfig;
use crate::{EvalArgs, Ui};

pub fn run(
    args: &EvalArgs,
    config: &RunConfig,
    mock: Option<&Path>,
    ui: &Ui,
) -> anyhow::Result<()> {
    let tools = config.tool_config();
    let suite = load_suite(&args.suite, &tools)?;
    for excluded in &suite.excluded {
        ui.info(&format!(
            "excluded {}: {}",
            excluded.case_id, excluded.reason
        ));
    }

    let (report_dir, candidates, n) = match &args.source.from {
        Some(run_dir) => {
            let (candidates, n) = collect_candidates(&suite, run_dir)?;
            (run_dir.clone(), candidates, n)
        }
        None => generate_live(args, config, mock, &suite, ui)?,
    };

    let eval_config = EvalRunConfig {
        n,
        jobs: config.run.jobs,
        tools,
        seed: config.run.seed,
    };
    let report = evaluate_suite(&suite, &candidates, &eval_config)?;
    write_report(&report, &report_dir)?;
    print!("{}", render_table(&report));
    ui.info(&format!("report written to {}", report_dir.display()));
    Ok(())
}

/// Reads every suite case's candidates from an existing run directory; the
/// sample count must agree across cases.
fn collect_candidates(
    suite: &girforge_core::eval::LoadedSuite,
    run_dir: &Path,
) -> anyhow::Result<(BTreeMap<String, Vec<String>>, usize)> {
    let mut candidates = BTreeMap::new();
    let mut n: Option<usize> = None;
    for case in &suite.cases {
        let case_dir = run_dir.join(&case.id);
        let texts = read_candidates(&case_dir)
            .with_context(|| format!("reading candidates for {}", case_dir.display()))?;
        match n {
            None => n = Some(texts.len()),
            Some(expected) if expected != texts.len() => anyhow::bail!(
                "case {} has {} candidates where earlier cases had {}",
                case.id,
                texts.len(),
                expected
            ),
            Some(_) => {}
        }
        candidates.insert(case.id.clone(), texts);
    }
    let n = n.filter(|n| *n > 0).context("run directory holds no candidates")?;
    Ok((candidates, n))
}

/// Generates candidates for every suite case, then hands back the fresh run
/// directory for evaluation.
fn generate_live(
    args: &EvalArgs,
    config: &RunConfig,
    mock: Option<&Path>,
    suite: &girforge_core::eval::LoadedSuite,
    ui: &Ui,
) -> anyhow::Result<(PathBuf, BTreeMap<String, Vec<String>>, usize)> {
    let n = args.n.unwrap_or(config.eval.n);
    let mut config = config.clone();
    config.llm.n_samples = n;
    config.eval.n = n;

    let parent: PathBuf = args
        .out
        .clone()
        .or_else(|| config.paths.runs.clone())
        .unwrap_or_else(|| PathBuf::from("runs"));
    let (run_id, run_dir) = resolve_run_dir(&parent, args.run_id.as_deref())?;
    std::fs::create_dir_all(&run_dir)?;

    let index_path = args.index.clone().or_else(|| config.paths.index.clone());
    let loaded = match &index_path {
        Some(path) => Some(open_index(path)?),
        None => None,
    };
    let scorer = JaccardScorer;
    let handle = loaded.as_ref().map(|(index, embedder)| {
        let mut handle = RetrievalHandle::new(index, embedder, &scorer);
        handle.top_k = config.retrieval.top_k;
        handle
    });

    let client = build_client(mock, &config, Some(&run_dir.join("transcript.jsonl")))?;
    let pipeline = config.pipeline_config();

    let mut candidates = BTreeMap::new();
    for case in &suite.cases {
        let record = generate(
            &case.id,
            &case.description,
            &client,
            handle.as_ref(),
            &pipeline,
            &run_dir,
        )
        .with_context(|| format!("generating candidates for case {}", case.id))?;
        ui.info(&format!(
            "case {}: {} candidate(s) generated",
            case.id,
            record.candidates.len()
        ));
        candidates.insert(case.id.clone(), read_candidates(&run_dir.join(&case.id))?);
    }

    write_manifest(
        &run_dir,
        &RunManifest {
            run_id: &run_id,
            backend: if mock.is_some() { "mock" } else { "http" },
            cases: suite.cases.iter().map(|c| c.id.clone()).collect(),
            config: &config,
        },
    )?;

    Ok((run_dir, candidates, n))
}
