//! Instruction-pair dataset preparation from a Verilog corpus.

use std::collections::BTreeSet;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::prompts::{description_prompt, template_description};
use crate::eval::{check_syntax, EvalError, ToolConfig};
use crate::extract::{
    extract_modules, fingerprint_text, infer_top, load_corpus, purify_source, to_gir,
    token_length, CorpusNote, DEFAULT_MAX_TOKENS,
};
use crate::gir::{parse_gir, serialize_gir, validate_gir, GirDocument};
use crate::llm::{ChatRequest, GenerationConfig, LlmClient, LlmError};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstructionPair {
    pub description: String,
    /// Canonical design-summary JSON, embedded as a string.
    pub gir: String,
    pub source_fingerprint: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub direction: Option<String>,
}

pub struct DataprepOptions {
    pub two_way: bool,
    pub max_tokens: usize,
    pub tools: ToolConfig,
    /// Used only when an LLM client is supplied for description writing.
    pub generation: GenerationConfig,
}

impl Default for DataprepOptions {
    fn default() -> Self {
        DataprepOptions {
            two_way: false,
            max_tokens: DEFAULT_MAX_TOKENS,
            tools: ToolConfig::default(),
            generation: GenerationConfig::default(),
        }
    }
}

#[derive(Debug, Error)]
pub enum DataprepError {
    #[error("no instruction pairs survived the filters ({skipped} files skipped)")]
    EmptyOutput { skipped: usize },
    #[error(transparent)]
    Llm(#[from] LlmError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Serialize)]
pub struct DataprepSummary {
    pub lines_written: usize,
    pub survivors: usize,
    pub flagged_for_review: usize,
    pub skipped: Vec<CorpusNote>,
}

#[derive(Serialize)]
struct ReviewEntry<'a> {
    source_fingerprint: &'a str,
    unknown_tokens: Vec<String>,
}

/// Builds description/summary pairs from every usable corpus file:
/// duplicate and oversized sources are dropped, files the external compiler
/// rejects are skipped, and each survivor's summary is paired with either
/// an LLM-written or a deterministic template description. Pairs that fail
/// to re-parse cleanly are never written. Descriptions naming identifiers
/// the summary does not contain go to a review-queue sidecar file.
pub fn build_instruction_pairs(
    corpus_dir: &Path,
    llm: Option<&LlmClient>,
    out_path: &Path,
    options: &DataprepOptions,
) -> Result<DataprepSummary, DataprepError> {
    let files = load_corpus(&[corpus_dir.to_path_buf()])?;
    let mut notes: Vec<CorpusNote> = Vec::new();
    let mut seen = BTreeSet::new();
    let scratch = tempfile::tempdir()?;

    let mut pairs: Vec<(InstructionPair, Vec<String>)> = Vec::new();
    for (index, file) in files.iter().enumerate() {
        let name = file.path.display().to_string();
        let skip = |construct: &str, reason: String, notes: &mut Vec<CorpusNote>| {
            notes.push(CorpusNote {
                file: name.clone(),
                construct: construct.to_string(),
                reason,
            });
        };

        let purified = match purify_source(&file.source) {
            Ok(text) => text,
            Err(e) => {
                skip("purify", e.to_string(), &mut notes);
                continue;
            }
        };
        let fingerprint = fingerprint_text(&purified);
        if !seen.insert(fingerprint.clone()) {
            skip("dedupe", "duplicate of an earlier file".to_string(), &mut notes);
            continue;
        }
        let tokens = token_length(&purified);
        if tokens > options.max_tokens {
            skip(
                "token filter",
                format!("{tokens} tokens exceeds the {} cap", options.max_tokens),
                &mut notes,
            );
            continue;
        }
        let syntax = check_syntax(&purified, &scratch.path().join(index.to_string()), &options.tools)?;
        if !syntax.ok {
            skip(
                "syntax",
                format!("compiler rejected the source: {}", first_line(&syntax.log)),
                &mut notes,
            );
            continue;
        }
        let decls = match extract_modules(&purified) {
            Ok((decls, _)) => decls,
            Err(e) => {
                skip("extract", e.to_string(), &mut notes);
                continue;
            }
        };
        let top = infer_top(&decls).unwrap_or_default();
        let doc = match to_gir(&decls, &top) {
            Ok((doc, _)) => doc,
            Err(e) => {
                skip("summary", e.to_string(), &mut notes);
                continue;
            }
        };

        let gir_json = match self_check(&doc) {
            Ok(json) => json,
            Err(reason) => {
                skip("self-check", reason, &mut notes);
                continue;
            }
        };

        let description = match llm {
            Some(client) => {
                let (system_text, user_text) = description_prompt(&gir_json);
                let mut config = options.generation.clone();
                config.n_samples = 1;
                let response = client.complete(&ChatRequest {
                    system_text,
                    user_text,
                    config,
                })?;
                let text = response.samples[0].trim().to_string();
                if text.is_empty() {
                    skip(
                        "description",
                        "empty reply; using the template description".to_string(),
                        &mut notes,
                    );
                    template_description(&doc)
                } else {
                    text
                }
            }
            None => template_description(&doc),
        };

        let unknown = unknown_identifiers(&description, &doc);
        pairs.push((
            InstructionPair {
                description,
                gir: gir_json,
                source_fingerprint: fingerprint,
                direction: None,
            },
            unknown,
        ));
    }

    if pairs.is_empty() {
        return Err(DataprepError::EmptyOutput {
            skipped: notes.len(),
        });
    }

    let mut out = std::io::BufWriter::new(std::fs::File::create(out_path)?);
    let mut lines_written = 0;
    for (pair, _) in &pairs {
        if options.two_way {
            let mut forward = pair.clone();
            forward.direction = Some("description_to_gir".to_string());
            writeln!(out, "{}", serde_json::to_string(&forward).unwrap())?;
            let mut backward = pair.clone();
            backward.direction = Some("gir_to_description".to_string());
            writeln!(out, "{}", serde_json::to_string(&backward).unwrap())?;
            lines_written += 2;
        } else {
            writeln!(out, "{}", serde_json::to_string(pair).unwrap())?;
            lines_written += 1;
        }
    }
    out.flush()?;

    let review_path = out_path.with_extension("review.jsonl");
    let mut flagged = 0;
    let mut review = std::io::BufWriter::new(std::fs::File::create(&review_path)?);
    for (pair, unknown) in &pairs {
        if !unknown.is_empty() {
            flagged += 1;
            writeln!(
                review,
                "{}",
                serde_json::to_string(&ReviewEntry {
                    source_fingerprint: &pair.source_fingerprint,
                    unknown_tokens: unknown.clone(),
                })
                .unwrap()
            )?;
        }
    }
    review.flush()?;

    Ok(DataprepSummary {
        lines_written,
        survivors: pairs.len(),
        flagged_for_review: flagged,
        skipped: notes,
    })
}

/// Serializes, re-parses, and re-validates; any failure disqualifies the
/// pair before it reaches the dataset.
fn self_check(doc: &GirDocument) -> Result<String, String> {
    let json = serialize_gir(doc).map_err(|e| e.to_string())?;
    let reparsed = parse_gir(&json).map_err(|e| format!("round-trip parse failed: {e}"))?;
    let report = validate_gir(&reparsed);
    if report.has_errors() {
        return Err(format!("round-trip validation failed: {report}"));
    }
    Ok(json)
}

/// Identifier-looking description tokens (underscore or digit inside) that
/// name nothing in the summary.
fn unknown_identifiers(description: &str, doc: &GirDocument) -> Vec<String> {
    let mut known: BTreeSet<String> = BTreeSet::new();
    for module in &doc.modules {
        known.insert(module.name.to_lowercase());
        for p in &module.parameters {
            known.insert(p.name.to_lowercase());
        }
        for port in &module.ports {
            known.insert(port.name.to_lowercase());
        }
        for inst in &module.instances {
            known.insert(inst.instance_name.to_lowercase());
            known.insert(inst.module_type.to_lowercase());
        }
    }

    let ident = regex::Regex::new(r"^[A-Za-z_][A-Za-z0-9_$]*$").unwrap();
    let mut unknown = Vec::new();
    for raw in description.split(|c: char| c.is_whitespace() || ",.;:()[]{}".contains(c)) {
        let token = raw.trim();
        if token.is_empty() || !ident.is_match(token) {
            continue;
        }
        let looks_like_identifier =
            token.contains('_') || token.chars().any(|c| c.is_ascii_digit());
        if !looks_like_identifier {
            continue;
        }
        let lower = token.to_lowercase();
        if !known.contains(&lower) && !unknown.contains(&lower) {
            unknown.push(lower);
        }
    }
    unknown
}

fn first_line(text: &str) -> String {
    text.lines()
        .find(|l| !l.trim().is_empty())
        .unwrap_or("")
        .to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fake_tools(dir: &Path) -> ToolConfig {
        crate::eval::fake_tools::config(dir)
    }

    fn write_corpus(dir: &Path) {
        std::fs::write(
            dir.join("and2.v"),
            "module and2(input a, input b, output y);\n  assign y = a & b;\nendmodule\n",
        )
        .unwrap();
        std::fs::write(
            dir.join("or2.v"),
            "module or2(input a, input b, output y);\n  assign y = a | b;\nendmodule\n",
        )
        .unwrap();
        std::fs::write(
            dir.join("pair.v"),
            "module pair(input a, input b, output x, output y);\n  and2 u0(.a(a), .b(b), .y(x));\n  or2 u1(.a(a), .b(b), .y(y));\nendmodule\nmodule and2(input a, input b, output y);\n  assign y = a & b;\nendmodule\nmodule or2(input a, input b, output y);\n  assign y = a | b;\nendmodule\n",
        )
        .unwrap();
    }

    #[test]
    fn template_descriptions_for_valid_fixtures() {
        let root = tempfile::tempdir().unwrap();
        let corpus = root.path().join("corpus");
        std::fs::create_dir_all(&corpus).unwrap();
        write_corpus(&corpus);
        let out = root.path().join("pairs.jsonl");
        let options = DataprepOptions {
            tools: fake_tools(root.path()),
            ..DataprepOptions::default()
        };
        let summary = build_instruction_pairs(&corpus, None, &out, &options).unwrap();
        assert_eq!(summary.survivors, 3);
        assert_eq!(summary.lines_written, 3);

        let text = std::fs::read_to_string(&out).unwrap();
        for line in text.lines() {
            let pair: InstructionPair = serde_json::from_str(line).unwrap();
            assert!(pair.description.starts_with("Design a Verilog module named"));
            let doc = parse_gir(&pair.gir).unwrap();
            assert!(!validate_gir(&doc).has_errors());
            assert!(pair.direction.is_none());
        }
    }

    #[test]
    fn syntax_failures_and_duplicates_are_skipped_with_notes() {
        let root = tempfile::tempdir().unwrap();
        let corpus = root.path().join("corpus");
        std::fs::create_dir_all(&corpus).unwrap();
        write_corpus(&corpus);
        std::fs::write(corpus.join("broken.v"), "module broken; SYNTAX_ERROR endmodule\n")
            .unwrap();
        // Identical content to and2.v apart from comments: same fingerprint.
        std::fs::write(
            corpus.join("zz_dup.v"),
            "// copy\nmodule and2(input a, input b, output y);\n  assign y = a & b;\nendmodule\n",
        )
        .unwrap();
        let out = root.path().join("pairs.jsonl");
        let options = DataprepOptions {
            tools: fake_tools(root.path()),
            ..DataprepOptions::default()
        };
        let summary = build_instruction_pairs(&corpus, None, &out, &options).unwrap();
        assert_eq!(summary.survivors, 3);
        assert!(summary.skipped.iter().any(|n| n.construct == "syntax"));
        assert!(summary.skipped.iter().any(|n| n.construct == "dedupe"));
    }

    #[test]
    fn two_way_doubles_the_line_count() {
        let root = tempfile::tempdir().unwrap();
        let corpus = root.path().join("corpus");
        std::fs::create_dir_all(&corpus).unwrap();
        write_corpus(&corpus);
        let out = root.path().join("pairs.jsonl");
        let options = DataprepOptions {
            two_way: true,
            tools: fake_tools(root.path()),
            ..DataprepOptions::default()
        };
        let summary = build_instruction_pairs(&corpus, None, &out, &options).unwrap();
        assert_eq!(summary.survivors, 3);
        assert_eq!(summary.lines_written, 6);
        let text = std::fs::read_to_string(&out).unwrap();
        let directions: Vec<String> = text
            .lines()
            .map(|l| {
                serde_json::from_str::<InstructionPair>(l)
                    .unwrap()
                    .direction
                    .unwrap()
            })
            .collect();
        assert_eq!(directions.iter().filter(|d| *d == "description_to_gir").count(), 3);
        assert_eq!(directions.iter().filter(|d| *d == "gir_to_description").count(), 3);
    }

    #[test]
    fn empty_corpus_is_an_error() {
        let root = tempfile::tempdir().unwrap();
        let corpus = root.path().join("corpus");
        std::fs::create_dir_all(&corpus).unwrap();
        std::fs::write(corpus.join("bad.v"), "SYNTAX_ERROR\n").unwrap();
        let out = root.path().join("pairs.jsonl");
        let options = DataprepOptions {
            tools: fake_tools(root.path()),
            ..DataprepOptions::default()
        };
        assert!(matches!(
            build_instruction_pairs(&corpus, None, &out, &options),
            Err(DataprepError::EmptyOutput { .. })
        ));
    }

    #[test]
    fn review_queue_flags_identifiers_missing_from_the_summary() {
        let doc = parse_gir(
            r#"{"modules": [{"fifo_ctrl": "controls a fifo", "Function": "controls a fifo",
                "Parameters": [{"DEPTH": "16"}],
                "Ports": [{"wr_en": {"Direction": "input", "Type": "wire", "Bits": 1}}],
                "Instances": []}]}"#,
        )
        .unwrap();
        let unknown = unknown_identifiers(
            "The fifo_ctrl module uses wr_en and DEPTH, plus a phantom_port signal.",
            &doc,
        );
        assert_eq!(unknown, vec!["phantom_port"]);
        assert!(unknown_identifiers("plain english words only", &doc).is_empty());
    }
}
