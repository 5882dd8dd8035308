//! HTTP-backed embedder and pair scorer.
//!
//! Both adapters speak a minimal JSON protocol: the embedder endpoint takes
//! `{"texts": [..]}` and returns `{"vectors": [[..]]}`; the scorer endpoint
//! takes `{"pairs": [{"query", "document"}]}` and returns `{"scores": [..]}`.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::embed::EmbedError;
use super::rerank::{PairScorer, ScorerError, ScorerInput};
use super::{Embedder, SemanticVector};

#[derive(Debug, Clone)]
pub struct RemoteConfig {
    pub endpoint: String,
    pub timeout_ms: u64,
    pub max_retries: u32,
    pub backoff_ms: u64,
}

impl RemoteConfig {
    pub fn new(endpoint: &str) -> Self {
        RemoteConfig {
            endpoint: endpoint.to_string(),
            timeout_ms: 30_000,
            max_retries: 2,
            backoff_ms: 250,
        }
    }
}

/// Sends `body` with retries on transport errors, timeouts, 429, and 5xx.
/// Returns the response body text.
fn post_with_retries(config: &RemoteConfig, body: String) -> Result<String, String> {
    let client = reqwest::blocking::Client::builder()
        .timeout(Duration::from_millis(config.timeout_ms))
        .build()
        .map_err(|e| e.to_string())?;

    let mut last_error = String::new();
    for attempt in 0..=config.max_retries {
        if attempt > 0 {
            std::thread::sleep(Duration::from_millis(
                config.backoff_ms.saturating_mul(1 << (attempt - 1)),
            ));
        }
        let sent = client
            .post(&config.endpoint)
            .header("content-type", "application/json")
            .body(body.clone())
            .send();
        match sent {
            Ok(response) => {
                let status = response.status();
                if status.is_success() {
                    return response.text().map_err(|e| e.to_string());
                }
                last_error = format!("{} from {}", status, config.endpoint);
                if !(status.is_server_error() || status.as_u16() == 429) {
                    break;
                }
            }
            Err(e) => last_error = e.to_string(),
        }
    }
    Err(last_error)
}

#[derive(Serialize)]
struct EmbedRequest<'a> {
    texts: &'a [String],
}

#[derive(Deserialize)]
struct EmbedResponse {
    vectors: Vec<Vec<f64>>,
}

/// Embedder that delegates to a remote vectorization service.
pub struct HttpEmbedder {
    pub config: RemoteConfig,
    id: String,
    dimension: usize,
}

impl HttpEmbedder {
    pub fn new(config: RemoteConfig, id: &str, dimension: usize) -> Self {
        HttpEmbedder {
            config,
            id: id.to_string(),
            dimension,
        }
    }
}

impl Embedder for HttpEmbedder {
    fn id(&self) -> String {
        self.id.clone()
    }

    fn dimension(&self) -> usize {
        self.dimension
    }

    fn embed(&self, texts: &[String]) -> Result<Vec<SemanticVector>, EmbedError> {
        let body = serde_json::to_string(&EmbedRequest { texts }).unwrap();
        let raw = post_with_retries(&self.config, body).map_err(EmbedError::Remote)?;
        let parsed: EmbedResponse =
            serde_json::from_str(&raw).map_err(|e| EmbedError::Remote(format!("bad response: {e}")))?;
        if parsed.vectors.len() != texts.len() {
            return Err(EmbedError::Remote(format!(
                "asked for {} vectors, got {}",
                texts.len(),
                parsed.vectors.len()
            )));
        }
        parsed
            .vectors
            .into_iter()
            .map(|values| {
                if values.len() != self.dimension {
                    return Err(EmbedError::Remote(format!(
                        "vector has dimension {} (expected {})",
                        values.len(),
                        self.dimension
                    )));
                }
                Ok(SemanticVector { values })
            })
            .collect()
    }
}

#[derive(Serialize)]
struct ScorePair<'a> {
    query: &'a str,
    document: &'a str,
}

#[derive(Serialize)]
struct ScoreRequest<'a> {
    pairs: Vec<ScorePair<'a>>,
}

#[derive(Deserialize)]
struct ScoreResponse {
    scores: Vec<f64>,
}

/// Pair scorer that delegates to a remote cross-encoder service.
pub struct HttpScorer {
    pub config: RemoteConfig,
    id: String,
}

impl HttpScorer {
    pub fn new(config: RemoteConfig, id: &str) -> Self {
        HttpScorer {
            config,
            id: id.to_string(),
        }
    }
}

impl PairScorer for HttpScorer {
    fn id(&self) -> String {
        self.id.clone()
    }

    fn score(&self, inputs: &[ScorerInput]) -> Result<Vec<f64>, ScorerError> {
        let request = ScoreRequest {
            pairs: inputs
                .iter()
                .map(|i| ScorePair {
                    query: &i.query,
                    document: &i.document,
                })
                .collect(),
        };
        let body = serde_json::to_string(&request).unwrap();
        let raw = post_with_retries(&self.config, body).map_err(ScorerError::Unavailable)?;
        let parsed: ScoreResponse = serde_json::from_str(&raw)
            .map_err(|e| ScorerError::Unavailable(format!("bad response: {e}")))?;
        Ok(parsed.scores)
    }
}
