use anyhow::Context;

use girforge_core::eval::{render_table, SuiteReport};

use crate::ReportArgs;

pub fn run(args: &ReportArgs) -> anyhow::Result<()> {
    let path = args.run.join("report.json");
    let text = std::fs::read_to_string(&path)
        .with_context(|| format!("reading {}", path.display()))?;
    let report: SuiteReport = serde_json::from_str(&text)
        .with_context(|| format!("parsing {}", path.display()))?;
    print!("{}", render_table(&report));
    Ok(())
}
