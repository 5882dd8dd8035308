use std::path::Path;

use girforge_core::pipeline::{build_instruction_pairs, DataprepOptions};

use super::build_client;
use crate::config::RunConfig;
use crate::{DataprepArgs, Ui};

pub fn run(
    args: &DataprepArgs,
    config: &RunConfig,
    mock: Option<&Path>,
    ui: &Ui,
) -> anyhow::Result<()> {
    let client = if args.llm {
        Some(build_client(mock, config, None)?)
    } else {
        None
    };

    let options = DataprepOptions {
        two_way: args.two_way,
        tools: config.tool_config(),
        generation: config.generation_config(),
        ..DataprepOptions::default()
    };
    let summary = build_instruction_pairs(&args.corpus, client.as_ref(), &args.out, &options)?;

    for note in &summary.skipped {
        ui.note(&format!("{}: {}: {}", note.file, note.construct, note.reason));
    }
    ui.info(&format!(
        "wrote {} pair line(s) for {} design(s) to {} ({} skipped, {} flagged for review)",
        summary.lines_written,
        summary.survivors,
        args.out.display(),
        summary.skipped.len(),
        summary.flagged_for_review
    ));
    Ok(())
}
