use std::path::Path;

use anyhow::Context;

use girforge_core::align::render_alignment;
use girforge_core::gir::{parse_gir, validate_gir, Severity};

use super::{read_input, write_output};
use crate::{AlignArgs, Ui};

pub fn run(args: &AlignArgs, ui: &Ui) -> anyhow::Result<()> {
    let text = read_input(&args.gir)?;
    let doc = parse_gir(&text)
        .with_context(|| format!("parsing design summary {}", args.gir.display()))?;

    let report = validate_gir(&doc);
    for issue in &report.issues {
        let line = format!("{}: {}: {}", issue.severity, issue.path, issue.message);
        match issue.severity {
            Severity::Error => ui.info(&line),
            Severity::Warning => ui.note(&line),
        }
    }

    let alignment = render_alignment(&doc);
    write_output(&args.out, &alignment.to_text())?;
    if args.out != Path::new("-") {
        ui.info(&format!("wrote alignment text to {}", args.out.display()));
    }
    Ok(())
}
