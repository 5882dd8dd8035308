//! Chat-completion client with pluggable backends.
//!
//! All nondeterminism in the toolkit funnels through this module: the HTTP
//! backend talks to a real endpoint, the mock backend replays a script, and
//! everything downstream sees the same [`ChatResponse`] shape either way.

mod http;
mod mock;

pub use http::HttpBackend;
pub use mock::{mock_from_script, MockBackend};

use std::sync::{Arc, Condvar, Mutex};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub const ENV_BASE_URL: &str = "GIRFORGE_LLM_BASE_URL";
pub const ENV_API_KEY: &str = "GIRFORGE_LLM_API_KEY";
pub const ENV_MODEL: &str = "GIRFORGE_LLM_MODEL";

pub const DEFAULT_CONCURRENT_REQUESTS: usize = 4;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct GenerationConfig {
    pub model_name: String,
    pub temperature: f64,
    pub max_tokens: u64,
    pub n_samples: usize,
    pub timeout_ms: u64,
    pub max_retries: u32,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        GenerationConfig {
            model_name: "default".to_string(),
            temperature: 0.0,
            max_tokens: 4096,
            n_samples: 1,
            timeout_ms: 30_000,
            max_retries: 2,
        }
    }
}

impl GenerationConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.model_name.is_empty() {
            return Err("model_name is empty".to_string());
        }
        if !(self.temperature >= 0.0) {
            return Err(format!("temperature {} is negative", self.temperature));
        }
        if self.max_tokens == 0 {
            return Err("max_tokens must be positive".to_string());
        }
        if self.n_samples < 1 {
            return Err("n_samples must be at least 1".to_string());
        }
        if self.timeout_ms < 1000 {
            return Err(format!("timeout_ms {} is below 1000", self.timeout_ms));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct ChatRequest {
    pub system_text: String,
    pub user_text: String,
    pub config: GenerationConfig,
}

impl ChatRequest {
    /// The flattened prompt used for hashing and mock-script matching.
    pub fn prompt_text(&self) -> String {
        format!("{}\n\n{}", self.system_text, self.user_text)
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
pub struct Usage {
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
}

#[derive(Debug, Clone)]
pub struct ChatResponse {
    pub samples: Vec<String>,
    pub usage: Usage,
    pub latency_ms: u64,
}

#[derive(Debug, Error)]
pub enum LlmError {
    #[error("authentication rejected: {0}")]
    Auth(String),
    #[error("rate limited after {retries} retries: {message}")]
    RateLimited { retries: u32, message: String },
    #[error("request timed out after {retries} retries")]
    Timeout { retries: u32 },
    #[error("endpoint error after {retries} retries: {message}")]
    Endpoint { retries: u32, message: String },
    #[error("malformed response: {0}")]
    MalformedResponse(String),
    #[error("invalid generation config: {0}")]
    InvalidConfig(String),
    #[error("no scripted reply matches prompt (sha256 {prompt_sha256})")]
    NoScriptedReply { prompt_sha256: String },
    #[error("script error: {0}")]
    Script(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// What one backend call produced. `retries` counts transparent retries the
/// backend performed before succeeding.
#[derive(Debug, Clone)]
pub struct BackendReply {
    pub samples: Vec<String>,
    pub usage: Usage,
    pub retries: u32,
}

pub trait ChatBackend: Send + Sync {
    fn name(&self) -> String;

    /// True when one call can return several samples; otherwise the client
    /// issues sequential single-sample calls.
    fn supports_native_sampling(&self) -> bool;

    fn complete_once(&self, req: &ChatRequest, n: usize) -> Result<BackendReply, LlmError>;
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    hex::encode(hasher.finalize())
}

#[derive(Serialize)]
struct TranscriptRecord<'a> {
    timestamp_ms: u128,
    backend: String,
    sampling: &'static str,
    prompt_sha256: String,
    config: &'a GenerationConfig,
    samples_sha256: Vec<String>,
    latency_ms: u64,
    retries: u32,
}

struct Semaphore {
    available: Mutex<usize>,
    signal: Condvar,
}

impl Semaphore {
    fn new(permits: usize) -> Self {
        Semaphore {
            available: Mutex::new(permits),
            signal: Condvar::new(),
        }
    }

    fn acquire(&self) {
        let mut available = self.available.lock().unwrap();
        while *available == 0 {
            available = self.signal.wait(available).unwrap();
        }
        *available -= 1;
    }

    fn release(&self) {
        *self.available.lock().unwrap() += 1;
        self.signal.notify_one();
    }
}

/// Backend wrapper that enforces the request limit, splits sequential
/// sampling, and appends transcript records.
pub struct LlmClient {
    backend: Box<dyn ChatBackend>,
    limiter: Arc<Semaphore>,
    transcript: Option<Mutex<std::fs::File>>,
}

impl LlmClient {
    pub fn new(backend: Box<dyn ChatBackend>) -> Self {
        LlmClient {
            backend,
            limiter: Arc::new(Semaphore::new(DEFAULT_CONCURRENT_REQUESTS)),
            transcript: None,
        }
    }

    pub fn with_concurrency_limit(mut self, permits: usize) -> Self {
        assert!(permits >= 1, "at least one concurrent request is required");
        self.limiter = Arc::new(Semaphore::new(permits));
        self
    }

    /// Appends one JSON line per completed request to `path`.
    pub fn with_transcript(mut self, path: &std::path::Path) -> std::io::Result<Self> {
        let file = std::fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)?;
        self.transcript = Some(Mutex::new(file));
        Ok(self)
    }

    pub fn backend_name(&self) -> String {
        self.backend.name()
    }

    pub fn complete(&self, req: &ChatRequest) -> Result<ChatResponse, LlmError> {
        req.config.validate().map_err(LlmError::InvalidConfig)?;

        self.limiter.acquire();
        let outcome = self.complete_inner(req);
        self.limiter.release();
        outcome
    }

    fn complete_inner(&self, req: &ChatRequest) -> Result<ChatResponse, LlmError> {
        let n = req.config.n_samples;
        let started = Instant::now();

        let (reply, sampling) = if self.backend.supports_native_sampling() {
            (self.backend.complete_once(req, n)?, "native")
        } else {
            let mut samples = Vec::with_capacity(n);
            let mut usage = Usage::default();
            let mut retries = 0;
            for _ in 0..n {
                let one = self.backend.complete_once(req, 1)?;
                usage.prompt_tokens += one.usage.prompt_tokens;
                usage.completion_tokens += one.usage.completion_tokens;
                retries += one.retries;
                samples.extend(one.samples);
            }
            (
                BackendReply {
                    samples,
                    usage,
                    retries,
                },
                "sequential",
            )
        };

        if reply.samples.len() != n {
            return Err(LlmError::MalformedResponse(format!(
                "asked for {} samples, got {}",
                n,
                reply.samples.len()
            )));
        }
        let latency_ms = started.elapsed().as_millis() as u64;

        if let Some(transcript) = &self.transcript {
            use std::io::Write;
            let record = TranscriptRecord {
                timestamp_ms: std::time::SystemTime::now()
                    .duration_since(std::time::UNIX_EPOCH)
                    .map(|d| d.as_millis())
                    .unwrap_or(0),
                backend: self.backend.name(),
                sampling,
                prompt_sha256: sha256_hex(req.prompt_text().as_bytes()),
                config: &req.config,
                samples_sha256: reply
                    .samples
                    .iter()
                    .map(|s| sha256_hex(s.as_bytes()))
                    .collect(),
                latency_ms,
                retries: reply.retries,
            };
            let mut file = transcript.lock().unwrap();
            writeln!(file, "{}", serde_json::to_string(&record).unwrap())?;
        }

        Ok(ChatResponse {
            samples: reply.samples,
            usage: reply.usage,
            latency_ms,
        })
    }
}

#[cfg(test)]
mod tests {
    use std::sync::atomic::{AtomicUsize, Ordering};

    use super::*;

    fn request(user: &str, n: usize) -> ChatRequest {
        ChatRequest {
            system_text: "system".to_string(),
            user_text: user.to_string(),
            config: GenerationConfig {
                n_samples: n,
                ..GenerationConfig::default()
            },
        }
    }

    struct EchoBackend;
    impl ChatBackend for EchoBackend {
        fn name(&self) -> String {
            "echo".to_string()
        }
        fn supports_native_sampling(&self) -> bool {
            false
        }
        fn complete_once(&self, req: &ChatRequest, n: usize) -> Result<BackendReply, LlmError> {
            Ok(BackendReply {
                samples: vec![req.user_text.clone(); n],
                usage: Usage {
                    prompt_tokens: 1,
                    completion_tokens: 1,
                },
                retries: 0,
            })
        }
    }

    #[test]
    fn config_invariants_are_enforced() {
        let mut bad = request("x", 1);
        bad.config.timeout_ms = 999;
        let client = LlmClient::new(Box::new(EchoBackend));
        assert!(matches!(
            client.complete(&bad),
            Err(LlmError::InvalidConfig(_))
        ));

        let mut bad = request("x", 1);
        bad.config.n_samples = 0;
        assert!(matches!(
            client.complete(&bad),
            Err(LlmError::InvalidConfig(_))
        ));

        let mut bad = request("x", 1);
        bad.config.temperature = -0.5;
        assert!(matches!(
            client.complete(&bad),
            Err(LlmError::InvalidConfig(_))
        ));
    }

    #[test]
    fn sequential_sampling_fills_every_slot() {
        let client = LlmClient::new(Box::new(EchoBackend));
        let response = client.complete(&request("hello", 5)).unwrap();
        assert_eq!(response.samples.len(), 5);
        assert!(response.samples.iter().all(|s| s == "hello"));
        assert_eq!(response.usage.prompt_tokens, 5);
    }

    #[test]
    fn transcript_records_one_line_per_request() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("transcript.jsonl");
        let client = LlmClient::new(Box::new(EchoBackend))
            .with_transcript(&path)
            .unwrap();
        client.complete(&request("a", 2)).unwrap();
        client.complete(&request("b", 1)).unwrap();

        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        let first: serde_json::Value = serde_json::from_str(lines[0]).unwrap();
        assert_eq!(first["sampling"], "sequential");
        assert_eq!(first["backend"], "echo");
        assert_eq!(first["samples_sha256"].as_array().unwrap().len(), 2);
        assert_eq!(first["retries"], 0);
        assert_eq!(
            first["prompt_sha256"].as_str().unwrap(),
            sha256_hex(b"system\n\na")
        );
    }

    #[test]
    fn concurrency_limit_bounds_in_flight_requests() {
        struct CountingBackend {
            current: Arc<AtomicUsize>,
            peak: Arc<AtomicUsize>,
        }
        impl ChatBackend for CountingBackend {
            fn name(&self) -> String {
                "counting".to_string()
            }
            fn supports_native_sampling(&self) -> bool {
                true
            }
            fn complete_once(&self, _: &ChatRequest, n: usize) -> Result<BackendReply, LlmError> {
                let now = self.current.fetch_add(1, Ordering::SeqCst) + 1;
                self.peak.fetch_max(now, Ordering::SeqCst);
                std::thread::sleep(std::time::Duration::from_millis(20));
                self.current.fetch_sub(1, Ordering::SeqCst);
                Ok(BackendReply {
                    samples: vec![String::new(); n],
                    usage: Usage::default(),
                    retries: 0,
                })
            }
        }

        let current = Arc::new(AtomicUsize::new(0));
        let peak = Arc::new(AtomicUsize::new(0));
        let client = Arc::new(
            LlmClient::new(Box::new(CountingBackend {
                current: current.clone(),
                peak: peak.clone(),
            }))
            .with_concurrency_limit(2),
        );
        let mut handles = Vec::new();
        for _ in 0..8 {
            let client = client.clone();
            handles.push(std::thread::spawn(move || {
                client.complete(&request("x", 1)).unwrap();
            }));
        }
        for handle in handles {
            handle.join().unwrap();
        }
        assert_eq!(current.load(Ordering::SeqCst), 0);
        let observed = peak.load(Ordering::SeqCst);
        assert!(observed <= 2, "saw {observed} concurrent requests");
    }
}
