use std::path::{Path, PathBuf};

use girforge_core::pipeline::{generate, RetrievalHandle};
use girforge_core::retrieval::JaccardScorer;

use super::{build_client, open_index, resolve_run_dir, write_manifest, RunManifest};
use crate::config::RunConfig;
use crate::{GenArgs, Ui};

pub fn run(
    args: &GenArgs,
    config: &RunConfig,
    mock: Option<&Path>,
    ui: &Ui,
) -> anyhow::Result<()> {
    let mut config = config.clone();
    if let Some(n) = args.n {
        config.llm.n_samples = n;
    }

    let description = super::read_input(&args.desc)?;
    let case_id = match &args.case_id {
        Some(id) => id.clone(),
        None => case_id_from_path(&args.desc),
    };

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
    let record = generate(
        &case_id,
        &description,
        &client,
        handle.as_ref(),
        &pipeline,
        &run_dir,
    )?;

    write_manifest(
        &run_dir,
        &RunManifest {
            run_id: &run_id,
            backend: if mock.is_some() { "mock" } else { "http" },
            cases: vec![case_id.clone()],
            config: &config,
        },
    )?;

    ui.info(&format!(
        "case {}: {} candidate(s), {} stage-1 retr{}",
        case_id,
        record.candidates.len(),
        record.stage1.retries_used,
        if record.stage1.retries_used == 1 { "y" } else { "ies" },
    ));
    println!("{}", run_dir.display());
    Ok(())
}

fn case_id_from_path(path: &Path) -> String {
    if path == Path::new("-") {
        return "case".to_string();
    }
    path.file_stem()
        .map(|stem| stem.to_string_lossy().into_owned())
        .unwrap_or_else(|| "case".to_string())
}
