//! External compile/simulate tooling.
//!
//! Tool invocations are argv templates, split on whitespace and expanded
//! without any shell: `{files}` becomes one argv entry per input file,
//! `{out}` the compile output path, `{vvp}` the compiled artifact to run.

use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::sha256_hex;

pub const DEFAULT_COMPILE_TEMPLATE: &str = "iverilog -g2012 -o {out} {files}";
pub const DEFAULT_RUN_TEMPLATE: &str = "vvp {vvp}";
pub const DEFAULT_COMPILE_TIMEOUT_MS: u64 = 60_000;
pub const DEFAULT_SIM_TIMEOUT_MS: u64 = 10_000;

/// Candidates carrying this marker failed stage-2 extraction; they occupy
/// their slot for pass@k but are never handed to the compiler.
pub const EMPTY_CANDIDATE_MARKER: &str = "// no verilog extracted from sample";

pub fn is_empty_candidate(code: &str) -> bool {
    let trimmed = code.trim();
    trimmed.is_empty() || trimmed.starts_with(EMPTY_CANDIDATE_MARKER)
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ToolConfig {
    pub compile_template: String,
    pub run_template: String,
    pub compile_timeout_ms: u64,
}

impl Default for ToolConfig {
    fn default() -> Self {
        ToolConfig {
            compile_template: DEFAULT_COMPILE_TEMPLATE.to_string(),
            run_template: DEFAULT_RUN_TEMPLATE.to_string(),
            compile_timeout_ms: DEFAULT_COMPILE_TIMEOUT_MS,
        }
    }
}

impl ToolConfig {
    pub fn compile_argv(&self, files: &[PathBuf], out: &Path) -> Vec<String> {
        expand_template(&self.compile_template, files, out, out)
    }

    pub fn run_argv(&self, compiled: &Path) -> Vec<String> {
        expand_template(&self.run_template, &[], compiled, compiled)
    }

    /// First line of the compiler's version banner, for report manifests.
    pub fn describe_tool(&self) -> String {
        let program = match self.compile_template.split_whitespace().next() {
            Some(p) => p,
            None => return "unconfigured".to_string(),
        };
        for flag in ["--version", "-V"] {
            match run_command(&[program.to_string(), flag.to_string()], None, 5_000) {
                Ok(outcome) if outcome.status == Some(0) || !outcome.stdout.trim().is_empty() => {
                    let banner = if outcome.stdout.trim().is_empty() {
                        &outcome.stderr
                    } else {
                        &outcome.stdout
                    };
                    if let Some(line) = banner.lines().find(|l| !l.trim().is_empty()) {
                        return line.trim().to_string();
                    }
                }
                _ => continue,
            }
        }
        format!("{program} (version unavailable)")
    }
}

fn expand_template(template: &str, files: &[PathBuf], out: &Path, vvp: &Path) -> Vec<String> {
    let mut argv = Vec::new();
    for token in template.split_whitespace() {
        if token == "{files}" {
            argv.extend(files.iter().map(|f| f.display().to_string()));
        } else {
            argv.push(
                token
                    .replace("{out}", &out.display().to_string())
                    .replace("{vvp}", &vvp.display().to_string()),
            );
        }
    }
    argv
}

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("tool not found: {command:?} (configure compile/run templates)")]
    ToolNotFound { command: String },
    #[error("tool invocation is empty")]
    EmptyCommand,
    #[error("{what} timed out after {timeout_ms} ms")]
    ToolTimeout { what: String, timeout_ms: u64 },
    #[error("no candidates supplied for case {case_id}")]
    MissingCandidates { case_id: String },
    #[error("bad evaluation config: {0}")]
    BadConfig(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone)]
pub struct ToolOutcome {
    pub status: Option<i32>,
    pub stdout: String,
    pub stderr: String,
    pub timed_out: bool,
    pub wall_ms: u64,
}

impl ToolOutcome {
    pub fn ok(&self) -> bool {
        self.status == Some(0) && !self.timed_out
    }
}

/// Runs argv (no shell) in `cwd`, killing the child at the timeout. Output
/// pipes are drained on reader threads so chatty children cannot deadlock
/// against the poll loop.
pub fn run_command(
    argv: &[String],
    cwd: Option<&Path>,
    timeout_ms: u64,
) -> Result<ToolOutcome, EvalError> {
    let (program, args) = argv.split_first().ok_or(EvalError::EmptyCommand)?;
    let mut command = Command::new(program);
    command
        .args(args)
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped());
    if let Some(dir) = cwd {
        command.current_dir(dir);
    }

    let started = Instant::now();
    let mut child = command.spawn().map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            EvalError::ToolNotFound {
                command: program.clone(),
            }
        } else {
            EvalError::Io(e)
        }
    })?;

    let stdout_pipe = child.stdout.take().unwrap();
    let stderr_pipe = child.stderr.take().unwrap();
    let stdout_reader = std::thread::spawn(move || read_all(stdout_pipe));
    let stderr_reader = std::thread::spawn(move || read_all(stderr_pipe));

    let deadline = started + Duration::from_millis(timeout_ms);
    let mut timed_out = false;
    let status = loop {
        if let Some(status) = child.try_wait()? {
            break Some(status);
        }
        if Instant::now() >= deadline {
            timed_out = true;
            let _ = child.kill();
            let _ = child.wait();
            break None;
        }
        std::thread::sleep(Duration::from_millis(5));
    };

    let stdout = stdout_reader.join().unwrap_or_default();
    let stderr = stderr_reader.join().unwrap_or_default();
    Ok(ToolOutcome {
        status: status.and_then(|s| s.code()),
        stdout,
        stderr,
        timed_out,
        wall_ms: started.elapsed().as_millis() as u64,
    })
}

fn read_all(mut pipe: impl std::io::Read) -> String {
    let mut buf = Vec::new();
    let _ = pipe.read_to_end(&mut buf);
    String::from_utf8_lossy(&buf).into_owned()
}

/// Line filters applied to simulator stdout before comparison. Matching
/// lines are dropped; every surviving line loses trailing whitespace, and
/// trailing blank lines are removed.
#[derive(Debug, Clone)]
pub struct OutputNormalizer {
    patterns: Vec<regex::Regex>,
}

impl Default for OutputNormalizer {
    fn default() -> Self {
        OutputNormalizer::with_extra_patterns(&[]).unwrap()
    }
}

impl OutputNormalizer {
    /// Built-in filters cover the banner/noise lines of common simulators;
    /// suites extend them via their manifest.
    pub fn with_extra_patterns(extra: &[String]) -> Result<Self, regex::Error> {
        let mut sources = vec![
            r"^VCD info:".to_string(),
            r"^VCD warning:".to_string(),
            r"\$finish called".to_string(),
            r"^- [^ ]+:\d+: Verilog \$finish$".to_string(),
            r"^- S i m u l a t i o n".to_string(),
            r"^- Verilator:".to_string(),
        ];
        sources.extend(extra.iter().cloned());
        let patterns = sources
            .iter()
            .map(|s| regex::Regex::new(s))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(OutputNormalizer { patterns })
    }

    pub fn normalize(&self, raw: &str) -> String {
        let mut lines: Vec<&str> = raw
            .lines()
            .filter(|line| !self.patterns.iter().any(|p| p.is_match(line)))
            .map(|line| line.trim_end())
            .collect();
        while lines.last() == Some(&"") {
            lines.pop();
        }
        lines.join("\n")
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SyntaxCheck {
    pub ok: bool,
    pub log: String,
}

/// Compiles the candidate alone. Empty-marked candidates short-circuit to
/// a failed check without touching the compiler.
pub fn check_syntax(
    candidate_code: &str,
    workdir: &Path,
    tools: &ToolConfig,
) -> Result<SyntaxCheck, EvalError> {
    if is_empty_candidate(candidate_code) {
        return Ok(SyntaxCheck {
            ok: false,
            log: "empty candidate (no code extracted); compiler not invoked".to_string(),
        });
    }
    let workdir = std::path::absolute(workdir)?;
    std::fs::create_dir_all(&workdir)?;
    let source = workdir.join("candidate.v");
    std::fs::write(&source, candidate_code)?;
    let out = workdir.join("syntax.out");
    let argv = tools.compile_argv(&[source], &out);
    let outcome = run_command(&argv, Some(&workdir), tools.compile_timeout_ms)?;
    if outcome.timed_out {
        return Err(EvalError::ToolTimeout {
            what: "syntax check".to_string(),
            timeout_ms: tools.compile_timeout_ms,
        });
    }
    Ok(SyntaxCheck {
        ok: outcome.ok(),
        log: format!("{}{}", outcome.stdout, outcome.stderr),
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AttemptResult {
    pub candidate_index: usize,
    pub syntax_ok: bool,
    pub functional_ok: bool,
    pub compiler_log: String,
    pub sim_output_hash: String,
    pub timed_out: bool,
    pub wall_ms: u64,
}

/// Compiles and runs `sources` (design + testbench), returning the
/// normalized stdout. Used both for golden references and candidates.
pub fn simulate(
    sources: &[PathBuf],
    workdir: &Path,
    tools: &ToolConfig,
    normalizer: &OutputNormalizer,
    sim_timeout_ms: u64,
) -> Result<SimRun, EvalError> {
    // The tools run with the scratch directory as their cwd, so any
    // caller-relative path has to be pinned to an absolute one first.
    let workdir = std::path::absolute(workdir)?;
    let sources = sources
        .iter()
        .map(std::path::absolute)
        .collect::<Result<Vec<_>, _>>()?;
    std::fs::create_dir_all(&workdir)?;
    let out = workdir.join("sim.out");
    let compile = run_command(
        &tools.compile_argv(&sources, &out),
        Some(&workdir),
        tools.compile_timeout_ms,
    )?;
    if compile.timed_out {
        return Err(EvalError::ToolTimeout {
            what: "compile".to_string(),
            timeout_ms: tools.compile_timeout_ms,
        });
    }
    if !compile.ok() {
        return Ok(SimRun {
            compiled: false,
            compiler_log: format!("{}{}", compile.stdout, compile.stderr),
            stdout_normalized: String::new(),
            sim_ok: false,
            timed_out: false,
            wall_ms: compile.wall_ms,
        });
    }
    let run = run_command(&tools.run_argv(&out), Some(&workdir), sim_timeout_ms)?;
    Ok(SimRun {
        compiled: true,
        compiler_log: format!("{}{}", compile.stdout, compile.stderr),
        stdout_normalized: normalizer.normalize(&run.stdout),
        sim_ok: run.ok(),
        timed_out: run.timed_out,
        wall_ms: compile.wall_ms + run.wall_ms,
    })
}

#[derive(Debug, Clone)]
pub struct SimRun {
    pub compiled: bool,
    pub compiler_log: String,
    pub stdout_normalized: String,
    pub sim_ok: bool,
    pub timed_out: bool,
    pub wall_ms: u64,
}

/// Full functional check of one candidate against the cached golden stdout.
/// A simulation timeout or crash yields `functional_ok = false`, never an
/// error: a bad candidate is a result, not a harness failure.
pub fn run_functional(
    candidate_code: &str,
    candidate_index: usize,
    testbench: &Path,
    expected_stdout: &str,
    workdir: &Path,
    tools: &ToolConfig,
    normalizer: &OutputNormalizer,
    sim_timeout_ms: u64,
) -> Result<AttemptResult, EvalError> {
    if is_empty_candidate(candidate_code) {
        return Ok(AttemptResult {
            candidate_index,
            syntax_ok: false,
            functional_ok: false,
            compiler_log: "empty candidate (no code extracted); compiler not invoked".to_string(),
            sim_output_hash: String::new(),
            timed_out: false,
            wall_ms: 0,
        });
    }
    std::fs::create_dir_all(workdir)?;
    let source = workdir.join("candidate.v");
    std::fs::write(&source, candidate_code)?;
    let run = simulate(
        &[source, testbench.to_path_buf()],
        workdir,
        tools,
        normalizer,
        sim_timeout_ms,
    )?;
    let functional_ok = run.compiled
        && run.sim_ok
        && !run.timed_out
        && run.stdout_normalized == expected_stdout;
    Ok(AttemptResult {
        candidate_index,
        syntax_ok: run.compiled,
        functional_ok,
        compiler_log: run.compiler_log,
        sim_output_hash: if run.compiled {
            sha256_hex(run.stdout_normalized.as_bytes())
        } else {
            String::new()
        },
        timed_out: run.timed_out,
        wall_ms: run.wall_ms,
    })
}

#[cfg(test)]
pub(crate) mod fake_tools {
    use std::path::{Path, PathBuf};

    /// Writes a pair of python scripts standing in for a compiler and a
    /// simulator, so harness machinery is testable without a real
    /// toolchain. The "compiler" concatenates its input files into {out}
    /// and fails when any file contains the token `SYNTAX_ERROR`. The
    /// "simulator" scans the compiled file for `EMIT <text>` directives and
    /// prints them; `HANG` makes it sleep; `CRASH` exits nonzero.
    pub fn install(dir: &Path) -> (PathBuf, PathBuf) {
        let fakecc = dir.join("fakecc.py");
        std::fs::write(
            &fakecc,
            r#"import sys
args = sys.argv[1:]
out = args[args.index("-o") + 1]
files = [a for i, a in enumerate(args) if a != "-o" and (i == 0 or args[i-1] != "-o")]
blob = ""
for f in files:
    blob += open(f).read()
if "SYNTAX_ERROR" in blob:
    sys.stderr.write("fakecc: syntax error near SYNTAX_ERROR\n")
    sys.exit(1)
open(out, "w").write(blob)
print("VCD info: fake banner")
"#,
        )
        .unwrap();
        let fakesim = dir.join("fakesim.py");
        std::fs::write(
            &fakesim,
            r#"import sys, time
blob = open(sys.argv[1]).read()
print("VCD info: dumpfile opened")
for line in blob.splitlines():
    line = line.strip()
    if line.startswith("EMIT "):
        print(line[5:])
    elif line == "HANG":
        time.sleep(30)
    elif line == "CRASH":
        sys.exit(3)
print("$finish called at 100")
"#,
        )
        .unwrap();
        (fakecc, fakesim)
    }

    pub fn config(dir: &Path) -> super::ToolConfig {
        let (fakecc, fakesim) = install(dir);
        super::ToolConfig {
            compile_template: format!("python3 {} -o {{out}} {{files}}", fakecc.display()),
            run_template: format!("python3 {} {{vvp}}", fakesim.display()),
            compile_timeout_ms: 20_000,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn template_expansion_covers_all_placeholders() {
        let tools = ToolConfig::default();
        let argv = tools.compile_argv(
            &[PathBuf::from("a.v"), PathBuf::from("b.v")],
            Path::new("/tmp/x.out"),
        );
        assert_eq!(argv, vec!["iverilog", "-g2012", "-o", "/tmp/x.out", "a.v", "b.v"]);
        assert_eq!(
            tools.run_argv(Path::new("/tmp/x.out")),
            vec!["vvp", "/tmp/x.out"]
        );
    }

    #[test]
    fn missing_tool_is_a_distinct_error() {
        let argv = vec!["definitely-not-a-real-tool-9x7".to_string()];
        assert!(matches!(
            run_command(&argv, None, 1000),
            Err(EvalError::ToolNotFound { .. })
        ));
    }

    #[test]
    fn command_timeout_kills_the_child() {
        let argv = vec![
            "python3".to_string(),
            "-c".to_string(),
            "import time; time.sleep(30)".to_string(),
        ];
        let started = std::time::Instant::now();
        let outcome = run_command(&argv, None, 300).unwrap();
        assert!(outcome.timed_out);
        assert!(started.elapsed() < Duration::from_secs(5));
    }

    #[test]
    fn normalizer_strips_noise_and_trailing_blanks() {
        let normalizer = OutputNormalizer::default();
        let raw = "VCD info: dumpfile opened\nresult = 5 \n- tb.v:12: Verilog $finish\n\n\n";
        assert_eq!(normalizer.normalize(raw), "result = 5");
        let custom =
            OutputNormalizer::with_extra_patterns(&[r"^debug:".to_string()]).unwrap();
        assert_eq!(custom.normalize("debug: x\nkeep\n"), "keep");
    }

    #[test]
    fn empty_candidate_short_circuits_without_tool() {
        let dir = tempfile::tempdir().unwrap();
        // A config whose tool does not exist proves nothing was invoked.
        let tools = ToolConfig {
            compile_template: "no-such-compiler {files} -o {out}".to_string(),
            ..ToolConfig::default()
        };
        let check =
            check_syntax(&format!("{EMPTY_CANDIDATE_MARKER}\n"), dir.path(), &tools).unwrap();
        assert!(!check.ok);
        assert!(check.log.contains("not invoked"));
        let check = check_syntax("   \n", dir.path(), &tools).unwrap();
        assert!(!check.ok);
    }

    #[test]
    fn fake_toolchain_syntax_check() {
        let dir = tempfile::tempdir().unwrap();
        let tools = fake_tools::config(dir.path());
        let good = check_syntax("module m; endmodule\n", &dir.path().join("w1"), &tools).unwrap();
        assert!(good.ok);
        let bad = check_syntax("SYNTAX_ERROR here\n", &dir.path().join("w2"), &tools).unwrap();
        assert!(!bad.ok);
        assert!(bad.log.contains("syntax error"));
    }

    #[test]
    fn functional_check_compares_normalized_stdout() {
        let dir = tempfile::tempdir().unwrap();
        let tools = fake_tools::config(dir.path());
        let normalizer = OutputNormalizer::default();
        let tb = dir.path().join("tb.v");
        std::fs::write(&tb, "EMIT sum=3\n").unwrap();

        let pass = run_functional(
            "EMIT design-ok\n",
            0,
            &tb,
            "design-ok\nsum=3",
            &dir.path().join("w1"),
            &tools,
            &normalizer,
            2000,
        )
        .unwrap();
        assert!(pass.syntax_ok);
        assert!(pass.functional_ok);
        assert_eq!(pass.sim_output_hash, sha256_hex(b"design-ok\nsum=3"));

        let fail = run_functional(
            "EMIT design-wrong\n",
            1,
            &tb,
            "design-ok\nsum=3",
            &dir.path().join("w2"),
            &tools,
            &normalizer,
            2000,
        )
        .unwrap();
        assert!(fail.syntax_ok);
        assert!(!fail.functional_ok);
    }

    #[test]
    fn sim_timeout_and_crash_are_failures_not_errors() {
        let dir = tempfile::tempdir().unwrap();
        let tools = fake_tools::config(dir.path());
        let normalizer = OutputNormalizer::default();
        let tb = dir.path().join("tb.v");
        std::fs::write(&tb, "").unwrap();

        let hung = run_functional(
            "HANG\n",
            0,
            &tb,
            "",
            &dir.path().join("w1"),
            &tools,
            &normalizer,
            400,
        )
        .unwrap();
        assert!(hung.timed_out);
        assert!(!hung.functional_ok);
        assert!(hung.syntax_ok);

        let crashed = run_functional(
            "CRASH\n",
            1,
            &tb,
            "",
            &dir.path().join("w2"),
            &tools,
            &normalizer,
            2000,
        )
        .unwrap();
        assert!(!crashed.functional_ok);
        assert!(!crashed.timed_out);
    }

    #[test]
    fn functional_implies_syntax() {
        let dir = tempfile::tempdir().unwrap();
        let tools = fake_tools::config(dir.path());
        let normalizer = OutputNormalizer::default();
        let tb = dir.path().join("tb.v");
        std::fs::write(&tb, "EMIT t\n").unwrap();
        for (i, code) in ["EMIT a\n", "SYNTAX_ERROR\n", "CRASH\n", ""].iter().enumerate() {
            let result = run_functional(
                code,
                i,
                &tb,
                "a\nt",
                &dir.path().join(format!("w{i}")),
                &tools,
                &normalizer,
                2000,
            )
            .unwrap();
            assert!(!result.functional_ok || result.syntax_ok);
        }
    }
}
