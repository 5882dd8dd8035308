use std::path::Path;

use anyhow::Context;

use girforge_core::extract::{extract_modules, infer_top, purify_source, to_gir};
use girforge_core::gir::serialize_gir;

use super::{read_input, write_output};
use crate::{ExtractArgs, Ui};

pub fn run(args: &ExtractArgs, ui: &Ui) -> anyhow::Result<()> {
    if args.files.iter().filter(|f| *f == Path::new("-")).count() > 1 {
        anyhow::bail!("stdin (\"-\") can be given at most once");
    }

    let mut decls = Vec::new();
    for file in &args.files {
        let source = read_input(file)?;
        let purified = purify_source(&source)
            .with_context(|| format!("purifying {}", file.display()))?;
        let (file_decls, notes) = extract_modules(&purified)
            .with_context(|| format!("extracting modules from {}", file.display()))?;
        for note in &notes {
            ui.note(&format!(
                "{}: {}: {}",
                file.display(),
                note.construct,
                note.reason
            ));
        }
        decls.extend(file_decls);
    }
    if decls.is_empty() {
        anyhow::bail!("no module declarations found in the input");
    }

    let top = match &args.top {
        Some(name) => name.clone(),
        None => {
            let inferred = infer_top(&decls).expect("non-empty declaration list");
            ui.note(&format!("inferred top module: {inferred}"));
            inferred
        }
    };

    let (doc, notes) = to_gir(&decls, &top)?;
    for note in &notes {
        ui.note(&format!("{}: {}", note.construct, note.reason));
    }

    let mut json = serialize_gir(&doc)?;
    json.push('\n');
    write_output(&args.out, &json)?;
    if args.out != Path::new("-") {
        ui.info(&format!(
            "wrote summary of {} module(s) to {}",
            doc.modules.len(),
            args.out.display()
        ));
    }
    Ok(())
}
