//! Scripted backend for offline, reproducible runs.

use std::path::Path;
use std::sync::Mutex;

use serde::Deserialize;

use super::{sha256_hex, BackendReply, ChatBackend, ChatRequest, LlmError, Usage};

#[derive(Deserialize)]
struct ScriptHeader {
    #[serde(default)]
    default: Option<String>,
    #[serde(default)]
    on_unmatched: Option<String>,
}

#[derive(Deserialize)]
struct ScriptRule {
    #[serde(rename = "match")]
    pattern: String,
    reply: String,
    #[serde(default)]
    times: Option<u64>,
}

struct RuleState {
    pattern: String,
    reply: String,
    remaining: Option<u64>,
}

enum UnmatchedPolicy {
    Error,
    Default(String),
}

/// Replays a JSON-lines script. Each line is a rule
/// `{"match": <substring or sha256>, "reply": <text>, "times": <count>}`;
/// an optional first line `{"default": ..., "on_unmatched": ...}` sets the
/// fallback. Rules are consulted in file order, each consumed `times`
/// consultations before the next matching rule takes over.
pub struct MockBackend {
    rules: Mutex<Vec<RuleState>>,
    unmatched: UnmatchedPolicy,
}

pub fn mock_from_script(script_path: &Path) -> Result<MockBackend, LlmError> {
    let text = std::fs::read_to_string(script_path)?;
    let mut rules = Vec::new();
    let mut unmatched = UnmatchedPolicy::Error;

    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        if let Ok(rule) = serde_json::from_str::<ScriptRule>(line) {
            rules.push(RuleState {
                pattern: rule.pattern,
                reply: rule.reply,
                remaining: rule.times,
            });
            continue;
        }
        if i == 0 {
            let header: ScriptHeader =
                serde_json::from_str(line).map_err(|e| LlmError::Script(format!("line 1: {e}")))?;
            unmatched = match (header.on_unmatched.as_deref(), header.default) {
                (Some("error"), _) | (None, None) => UnmatchedPolicy::Error,
                (Some("default"), Some(default)) | (None, Some(default)) => {
                    UnmatchedPolicy::Default(default)
                }
                (Some("default"), None) => {
                    return Err(LlmError::Script(
                        "on_unmatched is \"default\" but no default reply is given".to_string(),
                    ))
                }
                (Some(other), _) => {
                    return Err(LlmError::Script(format!(
                        "unknown on_unmatched policy {other:?}"
                    )))
                }
            };
            continue;
        }
        return Err(LlmError::Script(format!(
            "line {}: not a valid rule",
            i + 1
        )));
    }

    Ok(MockBackend {
        rules: Mutex::new(rules),
        unmatched,
    })
}

fn looks_like_sha256(pattern: &str) -> bool {
    pattern.len() == 64 && pattern.chars().all(|c| c.is_ascii_hexdigit())
}

impl MockBackend {
    fn consult(&self, prompt: &str) -> Result<String, LlmError> {
        let prompt_hash = sha256_hex(prompt.as_bytes());
        let mut rules = self.rules.lock().unwrap();
        for rule in rules.iter_mut() {
            if rule.remaining == Some(0) {
                continue;
            }
            let hit = if looks_like_sha256(&rule.pattern) {
                rule.pattern.eq_ignore_ascii_case(&prompt_hash) || prompt.contains(&rule.pattern)
            } else {
                prompt.contains(&rule.pattern)
            };
            if hit {
                if let Some(remaining) = &mut rule.remaining {
                    *remaining -= 1;
                }
                return Ok(rule.reply.clone());
            }
        }
        match &self.unmatched {
            UnmatchedPolicy::Default(reply) => Ok(reply.clone()),
            UnmatchedPolicy::Error => Err(LlmError::NoScriptedReply {
                prompt_sha256: prompt_hash,
            }),
        }
    }
}

impl ChatBackend for MockBackend {
    fn name(&self) -> String {
        "mock".to_string()
    }

    /// Sequential sampling lets `times`-limited rules hand successive
    /// samples different replies.
    fn supports_native_sampling(&self) -> bool {
        false
    }

    fn complete_once(&self, req: &ChatRequest, n: usize) -> Result<BackendReply, LlmError> {
        let prompt = req.prompt_text();
        let mut samples = Vec::with_capacity(n);
        for _ in 0..n {
            samples.push(self.consult(&prompt)?);
        }
        let completion_tokens = samples
            .iter()
            .map(|s| s.split_whitespace().count() as u64)
            .sum();
        Ok(BackendReply {
            samples,
            usage: Usage {
                prompt_tokens: prompt.split_whitespace().count() as u64,
                completion_tokens,
            },
            retries: 0,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::super::GenerationConfig;
    use super::*;

    fn write_script(lines: &[&str]) -> (tempfile::TempDir, std::path::PathBuf) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("script.jsonl");
        std::fs::write(&path, lines.join("\n")).unwrap();
        (dir, path)
    }

    fn request(user: &str) -> ChatRequest {
        ChatRequest {
            system_text: "sys".to_string(),
            user_text: user.to_string(),
            config: GenerationConfig::default(),
        }
    }

    #[test]
    fn substring_rule_matches() {
        let (_dir, path) = write_script(&[r#"{"match": "adder", "reply": "module out"}"#]);
        let backend = mock_from_script(&path).unwrap();
        let reply = backend.complete_once(&request("make an adder"), 1).unwrap();
        assert_eq!(reply.samples, vec!["module out"]);
    }

    #[test]
    fn exhausted_rule_falls_through_to_next() {
        let (_dir, path) = write_script(&[
            r#"{"match": "adder", "reply": "first", "times": 2}"#,
            r#"{"match": "adder", "reply": "second"}"#,
        ]);
        let backend = mock_from_script(&path).unwrap();
        let req = request("an adder");
        assert_eq!(backend.consult(&req.prompt_text()).unwrap(), "first");
        assert_eq!(backend.consult(&req.prompt_text()).unwrap(), "first");
        assert_eq!(backend.consult(&req.prompt_text()).unwrap(), "second");
        assert_eq!(backend.consult(&req.prompt_text()).unwrap(), "second");
    }

    #[test]
    fn hash_rule_matches_exact_prompt() {
        let req = request("precise");
        let hash = sha256_hex(req.prompt_text().as_bytes());
        let (_dir, path) =
            write_script(&[&format!(r#"{{"match": "{hash}", "reply": "by hash"}}"#)]);
        let backend = mock_from_script(&path).unwrap();
        assert_eq!(backend.consult(&req.prompt_text()).unwrap(), "by hash");
        assert!(backend.consult("different prompt").is_err());
    }

    #[test]
    fn unmatched_uses_header_default() {
        let (_dir, path) = write_script(&[
            r#"{"default": "fallback text"}"#,
            r#"{"match": "xyz", "reply": "specific"}"#,
        ]);
        let backend = mock_from_script(&path).unwrap();
        assert_eq!(backend.consult("no rule for this").unwrap(), "fallback text");
        assert_eq!(backend.consult("xyz please").unwrap(), "specific");
    }

    #[test]
    fn unmatched_errors_without_default() {
        let (_dir, path) = write_script(&[r#"{"match": "a", "reply": "b"}"#]);
        let backend = mock_from_script(&path).unwrap();
        assert!(matches!(
            backend.consult("zzz"),
            Err(LlmError::NoScriptedReply { .. })
        ));
    }

    #[test]
    fn header_policies_are_validated() {
        let (_dir, path) = write_script(&[r#"{"on_unmatched": "default"}"#]);
        assert!(matches!(
            mock_from_script(&path),
            Err(LlmError::Script(_))
        ));

        let (_dir2, path2) = write_script(&[r#"{"on_unmatched": "shrug"}"#]);
        assert!(matches!(
            mock_from_script(&path2),
            Err(LlmError::Script(_))
        ));
    }

    #[test]
    fn missing_file_is_an_error() {
        assert!(matches!(
            mock_from_script(Path::new("/nonexistent/script.jsonl")),
            Err(LlmError::Io(_))
        ));
    }

    #[test]
    fn bad_rule_line_is_reported_with_its_number() {
        let (_dir, path) = write_script(&[
            r#"{"match": "a", "reply": "b"}"#,
            r#"{"not_a_rule": true}"#,
        ]);
        let err = match mock_from_script(&path) {
            Err(e) => e,
            Ok(_) => panic!("bad rule line should be rejected"),
        };
        assert!(err.to_string().contains("line 2"));
    }
}
