use girforge_core::retrieval::{build_index_from_dir, retrieve, HashedBowEmbedder, JaccardScorer};

use super::open_index;
use crate::config::RunConfig;
use crate::{IndexCommand, Ui};

pub fn run(command: &IndexCommand, config: &RunConfig, ui: &Ui) -> anyhow::Result<()> {
    match command {
        IndexCommand::Build { corpus, out } => {
            let embedder = HashedBowEmbedder {
                dimension: config.retrieval.dimension,
            };
            let (index, notes) = build_index_from_dir(corpus, &embedder)?;
            for note in &notes {
                ui.note(&format!("{}: {}: {}", note.file, note.construct, note.reason));
            }
            index.save(out)?;
            ui.info(&format!(
                "indexed {} entr{} to {} ({} file(s) skipped)",
                index.len(),
                if index.len() == 1 { "y" } else { "ies" },
                out.display(),
                notes.iter().filter(|n| n.construct != "description").count()
            ));
        }
        IndexCommand::Query { index, text, k } => {
            let (index, embedder) = open_index(index)?;
            let scorer = JaccardScorer;
            let context = retrieve(&index, text, &embedder, &scorer, *k)?;
            if let Some(warning) = &context.fallback_warning {
                ui.info(warning);
            }
            for (rank, candidate) in context.candidates.iter().enumerate() {
                println!(
                    "{:>2}. {} coarse={:.4} rerank={:.4}",
                    rank + 1,
                    candidate.entry.fingerprint,
                    candidate.coarse_score,
                    candidate.rerank_score
                );
                println!("    {}", candidate.entry.description);
            }
        }
    }
    Ok(())
}
