//! Chat-completion backend over JSON HTTP.
//!
//! Speaks the widely adopted `/chat/completions` wire shape: request
//! `{model, messages, temperature, max_tokens, n}`, response
//! `{choices: [{message: {content}}], usage}`. Base URL, credential, and
//! default model come from environment variables so no vendor is named in
//! code.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{
    BackendReply, ChatBackend, ChatRequest, LlmError, Usage, ENV_API_KEY, ENV_BASE_URL, ENV_MODEL,
};

pub struct HttpBackend {
    pub base_url: String,
    pub api_key: Option<String>,
    /// First retry waits this long; later retries double it.
    pub backoff_ms: u64,
}

impl HttpBackend {
    pub fn new(base_url: &str, api_key: Option<String>) -> Self {
        HttpBackend {
            base_url: base_url.trim_end_matches('/').to_string(),
            api_key,
            backoff_ms: 250,
        }
    }

    /// Builds from `GIRFORGE_LLM_BASE_URL` and `GIRFORGE_LLM_API_KEY`.
    pub fn from_env() -> Result<Self, LlmError> {
        let base_url = std::env::var(ENV_BASE_URL).map_err(|_| {
            LlmError::Auth(format!("{ENV_BASE_URL} is not set; no endpoint configured"))
        })?;
        Ok(HttpBackend::new(
            &base_url,
            std::env::var(ENV_API_KEY).ok(),
        ))
    }

    /// Model name from `GIRFORGE_LLM_MODEL`, if set.
    pub fn env_model() -> Option<String> {
        std::env::var(ENV_MODEL).ok()
    }
}

#[derive(Serialize)]
struct WireMessage<'a> {
    role: &'static str,
    content: &'a str,
}

#[derive(Serialize)]
struct WireRequest<'a> {
    model: &'a str,
    messages: Vec<WireMessage<'a>>,
    temperature: f64,
    max_tokens: u64,
    n: usize,
}

#[derive(Deserialize)]
struct WireChoice {
    message: WireChoiceMessage,
}

#[derive(Deserialize)]
struct WireChoiceMessage {
    content: String,
}

#[derive(Deserialize, Default)]
struct WireUsage {
    #[serde(default)]
    prompt_tokens: u64,
    #[serde(default)]
    completion_tokens: u64,
}

#[derive(Deserialize)]
struct WireResponse {
    choices: Vec<WireChoice>,
    #[serde(default)]
    usage: WireUsage,
}

impl ChatBackend for HttpBackend {
    fn name(&self) -> String {
        "http".to_string()
    }

    fn supports_native_sampling(&self) -> bool {
        true
    }

    fn complete_once(&self, req: &ChatRequest, n: usize) -> Result<BackendReply, LlmError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_millis(req.config.timeout_ms))
            .build()
            .map_err(|e| LlmError::Endpoint {
                retries: 0,
                message: e.to_string(),
            })?;
        let url = format!("{}/chat/completions", self.base_url);
        let body = serde_json::to_string(&WireRequest {
            model: &req.config.model_name,
            messages: vec![
                WireMessage {
                    role: "system",
                    content: &req.system_text,
                },
                WireMessage {
                    role: "user",
                    content: &req.user_text,
                },
            ],
            temperature: req.config.temperature,
            max_tokens: req.config.max_tokens,
            n,
        })
        .unwrap();

        let mut retries = 0;
        loop {
            let mut builder = client
                .post(&url)
                .header("content-type", "application/json")
                .body(body.clone());
            if let Some(key) = &self.api_key {
                builder = builder.bearer_auth(key);
            }

            enum Transient {
                Timeout,
                RateLimit(String),
                Server(String),
            }

            let failure = match builder.send() {
                Ok(response) => {
                    let status = response.status().as_u16();
                    match status {
                        200..=299 => {
                            let text = response
                                .text()
                                .map_err(|e| LlmError::MalformedResponse(e.to_string()))?;
                            return parse_reply(&text, retries);
                        }
                        401 | 403 => {
                            return Err(LlmError::Auth(format!(
                                "{status}: {}",
                                response.text().unwrap_or_default()
                            )))
                        }
                        429 => Transient::RateLimit(response.text().unwrap_or_default()),
                        500..=599 => Transient::Server(format!(
                            "{status}: {}",
                            response.text().unwrap_or_default()
                        )),
                        other => {
                            return Err(LlmError::Endpoint {
                                retries,
                                message: format!(
                                    "{other}: {}",
                                    response.text().unwrap_or_default()
                                ),
                            })
                        }
                    }
                }
                Err(e) if e.is_timeout() => Transient::Timeout,
                Err(e) => Transient::Server(e.to_string()),
            };

            if retries >= req.config.max_retries {
                return Err(match failure {
                    Transient::Timeout => LlmError::Timeout { retries },
                    Transient::RateLimit(message) => LlmError::RateLimited { retries, message },
                    Transient::Server(message) => LlmError::Endpoint { retries, message },
                });
            }
            std::thread::sleep(Duration::from_millis(
                self.backoff_ms.saturating_mul(1 << retries),
            ));
            retries += 1;
        }
    }
}

fn parse_reply(text: &str, retries: u32) -> Result<BackendReply, LlmError> {
    let parsed: WireResponse = serde_json::from_str(text)
        .map_err(|e| LlmError::MalformedResponse(format!("{e}; body: {text:.200}")))?;
    if parsed.choices.is_empty() {
        return Err(LlmError::MalformedResponse("no choices".to_string()));
    }
    Ok(BackendReply {
        samples: parsed
            .choices
            .into_iter()
            .map(|c| c.message.content)
            .collect(),
        usage: Usage {
            prompt_tokens: parsed.usage.prompt_tokens,
            completion_tokens: parsed.usage.completion_tokens,
        },
        retries,
    })
}
