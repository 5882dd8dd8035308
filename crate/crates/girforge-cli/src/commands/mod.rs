//! Subcommand implementations plus the I/O plumbing they share.

pub mod align;
pub mod dataprep;
pub mod eval;
pub mod extract;
pub mod gen;
pub mod index;
pub mod report;

use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::Context;
use serde::Serialize;

use girforge_core::llm::{mock_from_script, ChatBackend, HttpBackend, LlmClient};
use girforge_core::retrieval::{load_index, Embedder, HashedBowEmbedder, RetrievalIndex};

use crate::config::RunConfig;

/// Reads a whole file, or stdin when the path is `-`.
pub(crate) fn read_input(path: &Path) -> anyhow::Result<String> {
    if path == Path::new("-") {
        let mut text = String::new();
        std::io::stdin()
            .read_to_string(&mut text)
            .context("reading stdin")?;
        Ok(text)
    } else {
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
    }
}

/// Writes to a file (creating parent directories), or stdout when the path
/// is `-`.
pub(crate) fn write_output(path: &Path, text: &str) -> anyhow::Result<()> {
    if path == Path::new("-") {
        std::io::stdout()
            .write_all(text.as_bytes())
            .context("writing stdout")?;
        return Ok(());
    }
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .with_context(|| format!("creating {}", parent.display()))?;
        }
    }
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Builds the LLM client: the scripted mock when `--mock-llm` was given
/// (never touching the network), otherwise the HTTP backend configured via
/// GIRFORGE_LLM_* environment variables.
pub(crate) fn build_client(
    mock: Option<&Path>,
    config: &RunConfig,
    transcript: Option<&Path>,
) -> anyhow::Result<LlmClient> {
    let backend: Box<dyn ChatBackend> = match mock {
        Some(script) => Box::new(
            mock_from_script(script)
                .with_context(|| format!("loading mock script {}", script.display()))?,
        ),
        None => Box::new(HttpBackend::from_env()?),
    };
    let mut client =
        LlmClient::new(backend).with_concurrency_limit(config.llm.concurrent_requests);
    if let Some(path) = transcript {
        client = client
            .with_transcript(path)
            .with_context(|| format!("opening transcript {}", path.display()))?;
    }
    Ok(client)
}

/// Loads an index and pairs it with the matching local embedder; an index
/// built by a different embedder is refused rather than silently misqueried.
pub(crate) fn open_index(path: &Path) -> anyhow::Result<(RetrievalIndex, HashedBowEmbedder)> {
    let index =
        load_index(path).with_context(|| format!("loading index {}", path.display()))?;
    let embedder = HashedBowEmbedder {
        dimension: index.dimension,
    };
    if index.embedder_id != embedder.id() {
        anyhow::bail!(
            "index {} was built with embedder \"{}\", but this build embeds with \"{}\"",
            path.display(),
            index.embedder_id,
            embedder.id()
        );
    }
    Ok((index, embedder))
}

/// Picks the run directory: an explicit id verbatim, otherwise a fresh
/// timestamp-derived name under the parent.
pub(crate) fn resolve_run_dir(
    parent: &Path,
    run_id: Option<&str>,
) -> anyhow::Result<(String, PathBuf)> {
    if let Some(id) = run_id {
        return Ok((id.to_string(), parent.join(id)));
    }
    let secs = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .expect("system clock before 1970")
        .as_secs();
    let mut suffix = 0u32;
    loop {
        let id = if suffix == 0 {
            format!("run-{secs}")
        } else {
            format!("run-{secs}-{suffix}")
        };
        let dir = parent.join(&id);
        if !dir.exists() {
            return Ok((id, dir));
        }
        suffix += 1;
    }
}

/// Effective settings of a generation run, written next to its cases so a
/// report can always be traced back to the configuration that produced it.
#[derive(Serialize)]
pub(crate) struct RunManifest<'a> {
    pub run_id: &'a str,
    pub backend: &'a str,
    pub cases: Vec<String>,
    pub config: &'a RunConfig,
}

pub(crate) fn write_manifest(run_dir: &Path, manifest: &RunManifest) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(manifest)?;
    text.push('\n');
    write_output(&run_dir.join("manifest.json"), &text)
}
