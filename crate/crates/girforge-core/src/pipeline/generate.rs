//! End-to-end generation for one case, persisted as a run directory.

use std::path::Path;
use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use super::stages::{run_stage1, run_stage2, RetrievalOutcome, Stage1Error, Stage1Trace, Stage2Error};
use super::{PipelineConfig, RetrievalHandle};
use crate::gir::serialize_gir;
use crate::llm::{sha256_hex, LlmClient};

#[derive(Debug, Error)]
pub enum GenerateError {
    #[error(transparent)]
    Stage1(#[from] Stage1Error),
    #[error(transparent)]
    Stage2(#[from] Stage2Error),
    #[error("description is empty")]
    EmptyDescription,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Serialize)]
pub struct CandidateRecord {
    pub file: String,
    pub extracted: bool,
    pub sha256: String,
}

/// Wall-clock timings, kept in their own field so the rest of the record
/// stays byte-stable across reruns.
#[derive(Debug, Clone, Serialize)]
pub struct Timings {
    pub stage1_ms: u64,
    pub stage2_ms: u64,
}

#[derive(Debug, Serialize)]
pub struct GenerationRecord {
    pub case_id: String,
    pub description_sha256: String,
    pub stage1: Stage1Trace,
    pub gir_sha256: String,
    pub alignment_sha256: String,
    pub retrieval: RetrievalOutcome,
    pub candidates: Vec<CandidateRecord>,
    pub timings: Timings,
}

/// Runs both stages for one description and writes the case directory:
/// stage1.json, gir.json, alignment.txt, retrieval.json,
/// candidates/cand_<i>.v, and record.json under `<parent>/<case_id>/`.
pub fn generate(
    case_id: &str,
    nl_description: &str,
    llm: &LlmClient,
    retrieval: Option<&RetrievalHandle>,
    config: &PipelineConfig,
    parent_dir: &Path,
) -> Result<GenerationRecord, GenerateError> {
    if nl_description.trim().is_empty() {
        return Err(GenerateError::EmptyDescription);
    }

    let stage1_started = Instant::now();
    let (gir, stage1_trace) = run_stage1(nl_description, llm, config.retry_budget, config)?;
    let stage1_ms = stage1_started.elapsed().as_millis() as u64;

    let stage2_started = Instant::now();
    let n = config.generation.n_samples;
    let stage2 = run_stage2(&gir, retrieval, llm, n, config)?;
    let stage2_ms = stage2_started.elapsed().as_millis() as u64;

    let case_dir = parent_dir.join(case_id);
    let candidates_dir = case_dir.join("candidates");
    std::fs::create_dir_all(&candidates_dir)?;

    let gir_json = serialize_gir(&gir).expect("stage 1 output was validated");
    std::fs::write(case_dir.join("gir.json"), &gir_json)?;

    let alignment_text = stage2.alignment.to_text();
    std::fs::write(case_dir.join("alignment.txt"), &alignment_text)?;

    let mut stage1_json = serde_json::to_string_pretty(&stage1_trace).unwrap();
    stage1_json.push('\n');
    std::fs::write(case_dir.join("stage1.json"), stage1_json)?;

    let mut retrieval_json = serde_json::to_string_pretty(&stage2.retrieval).unwrap();
    retrieval_json.push('\n');
    std::fs::write(case_dir.join("retrieval.json"), retrieval_json)?;

    let mut candidate_records = Vec::with_capacity(stage2.candidates.len());
    for (i, candidate) in stage2.candidates.iter().enumerate() {
        let file = format!("cand_{i}.v");
        std::fs::write(candidates_dir.join(&file), &candidate.text)?;
        candidate_records.push(CandidateRecord {
            file: format!("candidates/{file}"),
            extracted: candidate.extracted,
            sha256: sha256_hex(candidate.text.as_bytes()),
        });
    }

    let record = GenerationRecord {
        case_id: case_id.to_string(),
        description_sha256: sha256_hex(nl_description.as_bytes()),
        stage1: stage1_trace,
        gir_sha256: sha256_hex(gir_json.as_bytes()),
        alignment_sha256: sha256_hex(alignment_text.as_bytes()),
        retrieval: stage2.retrieval,
        candidates: candidate_records,
        timings: Timings {
            stage1_ms,
            stage2_ms,
        },
    };
    let mut record_json = serde_json::to_string_pretty(&record).unwrap();
    record_json.push('\n');
    std::fs::write(case_dir.join("record.json"), record_json)?;

    Ok(record)
}

/// Reads the candidate texts of a previously generated case directory, in
/// slot order.
pub fn read_candidates(case_dir: &Path) -> std::io::Result<Vec<String>> {
    let record_text = std::fs::read_to_string(case_dir.join("record.json"))?;
    let record: serde_json::Value = serde_json::from_str(&record_text).map_err(|e| {
        std::io::Error::new(
            std::io::ErrorKind::InvalidData,
            format!("record.json: {e}"),
        )
    })?;
    let files = record["candidates"]
        .as_array()
        .ok_or_else(|| {
            std::io::Error::new(
                std::io::ErrorKind::InvalidData,
                "record.json lacks a candidates list",
            )
        })?
        .iter()
        .map(|c| c["file"].as_str().unwrap_or_default().to_string())
        .collect::<Vec<_>>();
    files
        .iter()
        .map(|file| std::fs::read_to_string(case_dir.join(file)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::llm::{mock_from_script, LlmClient};

    fn golden_echo_client(dir: &Path) -> LlmClient {
        let script = dir.join("script.jsonl");
        let gir_reply = r#"```json\n{\"modules\": [{\"inv\": \"inverts a bit\", \"Function\": \"inverts a bit\", \"Parameters\": [], \"Ports\": [{\"a\": {\"Direction\": \"input\", \"Type\": \"wire\", \"Bits\": 1}}, {\"z\": {\"Direction\": \"output\", \"Type\": \"wire\", \"Bits\": 1}}], \"Instances\": []}]}\n```"#;
        let code_reply = r#"```verilog\nmodule inv(input a, output z); assign z = ~a; endmodule\n```"#;
        let line1 = format!(r#"{{"match": "hierarchical design summary", "reply": "{gir_reply}"}}"#);
        let line2 = format!(r#"{{"match": "synthesizable", "reply": "{code_reply}"}}"#);
        std::fs::write(&script, format!("{line1}\n{line2}\n")).unwrap();
        LlmClient::new(Box::new(mock_from_script(&script).unwrap()))
    }

    #[test]
    fn generate_writes_the_full_case_directory() {
        let dir = tempfile::tempdir().unwrap();
        let client = golden_echo_client(dir.path());
        let mut config = PipelineConfig::default();
        config.generation.n_samples = 2;
        let parent = dir.path().join("runs").join("r1");
        let record = generate("case01", "invert a bit", &client, None, &config, &parent).unwrap();

        assert_eq!(record.candidates.len(), 2);
        let case_dir = parent.join("case01");
        for file in [
            "stage1.json",
            "gir.json",
            "alignment.txt",
            "retrieval.json",
            "record.json",
            "candidates/cand_0.v",
            "candidates/cand_1.v",
        ] {
            assert!(case_dir.join(file).is_file(), "{file} missing");
        }
        let gir = std::fs::read_to_string(case_dir.join("gir.json")).unwrap();
        assert!(gir.contains("\"inv\""));
        let cand = std::fs::read_to_string(case_dir.join("candidates/cand_0.v")).unwrap();
        assert!(cand.contains("assign z = ~a;"));

        let read_back = read_candidates(&case_dir).unwrap();
        assert_eq!(read_back.len(), 2);
        assert!(read_back[0].contains("assign z = ~a;"));
    }

    #[test]
    fn generate_is_deterministic_apart_from_timings() {
        let dir = tempfile::tempdir().unwrap();
        let client = golden_echo_client(dir.path());
        let config = PipelineConfig::default();
        let parent_a = dir.path().join("a");
        let parent_b = dir.path().join("b");
        generate("case01", "invert a bit", &client, None, &config, &parent_a).unwrap();
        let client2 = golden_echo_client(dir.path());
        generate("case01", "invert a bit", &client2, None, &config, &parent_b).unwrap();

        for file in [
            "stage1.json",
            "gir.json",
            "alignment.txt",
            "retrieval.json",
            "candidates/cand_0.v",
        ] {
            let a = std::fs::read(parent_a.join("case01").join(file)).unwrap();
            let b = std::fs::read(parent_b.join("case01").join(file)).unwrap();
            assert_eq!(a, b, "{file} differs between identical runs");
        }
        let strip = |path: &Path| {
            let mut v: serde_json::Value =
                serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
            v.as_object_mut().unwrap().remove("timings");
            v
        };
        assert_eq!(
            strip(&parent_a.join("case01/record.json")),
            strip(&parent_b.join("case01/record.json"))
        );
    }

    #[test]
    fn empty_description_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let client = golden_echo_client(dir.path());
        let config = PipelineConfig::default();
        assert!(matches!(
            generate("c", "  \n", &client, None, &config, dir.path()),
            Err(GenerateError::EmptyDescription)
        ));
    }

    #[test]
    fn stage1_failure_propagates() {
        let dir = tempfile::tempdir().unwrap();
        let script = dir.path().join("bad.jsonl");
        std::fs::write(&script, r#"{"default": "never valid json"}"#).unwrap();
        let client = LlmClient::new(Box::new(mock_from_script(&script).unwrap()));
        let config = PipelineConfig::default();
        assert!(matches!(
            generate("c", "anything", &client, None, &config, dir.path()),
            Err(GenerateError::Stage1(Stage1Error::Exhausted { .. }))
        ));
    }
}
