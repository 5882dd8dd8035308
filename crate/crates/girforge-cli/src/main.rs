//! girforge: two-stage Verilog generation from natural-language
//! descriptions, plus the supporting extract/align/index/eval tooling.
//!
//! One subcommand per pipeline stage, so each stage can be run, cached, and
//! inspected on its own. Exit status: 0 on success, 1 on harness or tool
//! errors, 2 on usage errors.

mod commands;
mod config;

use std::path::PathBuf;

use clap::{ArgAction, Args, Parser, Subcommand};

use config::RunConfig;

#[derive(Parser)]
#[command(name = "girforge", version, about = "Verilog generation toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML config file; flags override its values
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Replay LLM replies from a script file instead of the network
    #[arg(long, global = true, value_name = "SCRIPT")]
    mock_llm: Option<PathBuf>,

    /// Seed recorded in manifests and passed to auxiliary tooling
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker cap for parallel evaluation (0 = one per CPU)
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Print per-file notes and progress detail
    #[arg(short, long, global = true, action = ArgAction::Count)]
    verbose: u8,

    /// Suppress everything but results and errors
    #[arg(short, long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Extract a structured design summary from Verilog sources
    Extract(ExtractArgs),
    /// Render a design summary as natural-language alignment text
    Align(AlignArgs),
    /// Build or query a retrieval index
    #[command(subcommand)]
    Index(IndexCommand),
    /// Build instruction pairs from a Verilog corpus
    Dataprep(DataprepArgs),
    /// Generate Verilog candidates from a description
    Gen(GenArgs),
    /// Evaluate generated candidates against a benchmark suite
    Eval(EvalArgs),
    /// Print the result table of a finished evaluation
    Report(ReportArgs),
}

#[derive(Args)]
struct ExtractArgs {
    /// Verilog source files ("-" reads one source from stdin)
    #[arg(required = true)]
    files: Vec<PathBuf>,

    /// Top module name (default: the module nothing else instantiates)
    #[arg(long, value_name = "MODULE")]
    top: Option<String>,

    /// Output path for the summary JSON ("-" writes to stdout)
    #[arg(short, long, default_value = "-")]
    out: PathBuf,
}

#[derive(Args)]
struct AlignArgs {
    /// Design summary JSON ("-" reads from stdin)
    gir: PathBuf,

    /// Output path for the alignment text ("-" writes to stdout)
    #[arg(short, long, default_value = "-")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum IndexCommand {
    /// Index a directory of Verilog files for retrieval
    Build {
        /// Corpus directory; `<file>.desc.txt` sidecars supply descriptions
        corpus: PathBuf,
        /// Output path for the index
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Retrieve the best-matching entries for a query
    Query {
        /// Index file written by `index build`
        index: PathBuf,
        /// Query text
        text: String,
        /// Candidates to retrieve
        #[arg(short, default_value_t = girforge_core::retrieval::DEFAULT_TOP_K)]
        k: usize,
    },
}

#[derive(Args)]
struct DataprepArgs {
    /// Corpus directory of Verilog sources
    corpus: PathBuf,

    /// Output path for the JSONL pair file
    #[arg(short, long)]
    out: PathBuf,

    /// Also emit the reverse (summary-to-description) direction
    #[arg(long)]
    two_way: bool,

    /// Write descriptions with the configured LLM instead of the template
    #[arg(long)]
    llm: bool,
}

#[derive(Args)]
struct GenArgs {
    /// Natural-language description file ("-" reads from stdin)
    #[arg(long, value_name = "FILE")]
    desc: PathBuf,

    /// Retrieval index for reference snippets
    #[arg(long, value_name = "FILE")]
    index: Option<PathBuf>,

    /// Candidates to sample
    #[arg(short, value_name = "N")]
    n: Option<usize>,

    /// Parent directory for run output (default: "runs")
    #[arg(short, long)]
    out: Option<PathBuf>,

    /// Run directory name (default: a timestamp-derived id)
    #[arg(long, value_name = "ID")]
    run_id: Option<String>,

    /// Case directory name (default: the description file stem)
    #[arg(long, value_name = "ID")]
    case_id: Option<String>,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct EvalSource {
    /// Evaluate candidates from an existing run directory
    #[arg(long, value_name = "RUN_DIR")]
    from: Option<PathBuf>,

    /// Generate candidates now, then evaluate them
    #[arg(long)]
    live: bool,
}

#[derive(Args)]
struct EvalArgs {
    /// Benchmark suite directory
    suite: PathBuf,

    #[command(flatten)]
    source: EvalSource,

    /// Attempts per case for --live (--from infers it from the run)
    #[arg(short, value_name = "N")]
    n: Option<usize>,

    /// Retrieval index for --live generation
    #[arg(long, value_name = "FILE")]
    index: Option<PathBuf>,

    /// Parent directory for --live run output (default: "runs")
    #[arg(short, long)]
    out: Option<PathBuf>,

    /// Run directory name for --live (default: a timestamp-derived id)
    #[arg(long, value_name = "ID")]
    run_id: Option<String>,
}

#[derive(Args)]
struct ReportArgs {
    /// Run directory containing report.json
    run: PathBuf,
}

/// Output channel choices shared by every subcommand.
pub(crate) struct Ui {
    pub verbose: bool,
    pub quiet: bool,
}

impl Ui {
    pub fn note(&self, text: &str) {
        if self.verbose && !self.quiet {
            eprintln!("{text}");
        }
    }

    pub fn info(&self, text: &str) {
        if !self.quiet {
            eprintln!("{text}");
        }
    }
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => {}
        Err(err) => {
            eprintln!("error: {err:#}");
            std::process::exit(1);
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let mut config = RunConfig::load(cli.config.as_deref())?;
    if let Some(jobs) = cli.jobs {
        config.run.jobs = jobs;
    }
    if let Some(seed) = cli.seed {
        config.run.seed = Some(seed);
    }
    let ui = Ui {
        verbose: cli.verbose > 0,
        quiet: cli.quiet,
    };
    let mock_llm = cli.mock_llm.as_deref();

    match cli.command {
        Command::Extract(args) => commands::extract::run(&args, &ui),
        Command::Align(args) => commands::align::run(&args, &ui),
        Command::Index(args) => commands::index::run(&args, &config, &ui),
        Command::Dataprep(args) => commands::dataprep::run(&args, &config, mock_llm, &ui),
        Command::Gen(args) => commands::gen::run(&args, &config, mock_llm, &ui),
        Command::Eval(args) => commands::eval::run(&args, &config, mock_llm, &ui),
        Command::Report(args) => commands::report::run(&args),
    }
}
