//! LLM backend abstraction with deterministic record/replay.
//!
//! Every stage call goes through the [`Backend`] trait. Three modes exist:
//! scripted (ordered canned responses, for tests), replay (a cassette file
//! keyed by request hash, errors on cache miss rather than calling out), and
//! live (an OpenAI-compatible chat-completions endpoint over HTTP, optionally
//! recording to a cassette).

mod cassette;
mod parse;
mod template;

pub use cassette::{CassetteRecord, CassetteWriter, ReplayBackend};
pub use parse::{
    parse_faithfulness, parse_fallacy, parse_formalization, parse_pairwise_judgment,
    parse_reconstruction, parse_streamline, render_reconstruction_sections, CriterionOutcome,
    PairwiseJudgment, Side,
};
pub use template::{render_prompt, PromptTemplate};

use std::collections::BTreeMap;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// A parse failure names the section (or field) that was missing or
/// malformed, so a format-reminder reprompt can point at it.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("could not parse model output: {section}: {detail}")]
pub struct ParseError {
    pub section: String,
    pub detail: String,
}

impl ParseError {
    pub fn new(section: impl Into<String>, detail: impl Into<String>) -> Self {
        ParseError {
            section: section.into(),
            detail: detail.into(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum LlmError {
    #[error("missing placeholder binding [[{0}]]")]
    MissingPlaceholder(String),
    #[error("transport error: {0}")]
    Transport(String),
    #[error("rate limited after {attempts} attempts")]
    RateLimited { attempts: u32 },
    #[error("replay cache miss for request key {key} (template '{template}')")]
    CacheMiss { key: String, template: String },
    #[error("scripted backend exhausted after {served} responses")]
    ScriptExhausted { served: usize },
    #[error("cassette io: {0}")]
    CassetteIo(String),
}

/// Decoding parameters. The engine runs every stage at temperature 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecodingParams {
    pub temperature: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_tokens: Option<u32>,
}

impl Default for DecodingParams {
    fn default() -> Self {
        DecodingParams {
            temperature: 0.0,
            max_tokens: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionRequest {
    /// Template name; part of the cache key so template edits invalidate
    /// recorded responses intentionally.
    pub template: String,
    pub bindings: BTreeMap<String, String>,
    /// The rendered prompt actually sent to the model.
    pub prompt: String,
    pub model: String,
    pub params: DecodingParams,
}

impl CompletionRequest {
    /// Cache key: hash of (template name, bindings, decoding params) — not
    /// the raw prompt text.
    pub fn cache_key(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.template.as_bytes());
        hasher.update([0]);
        for (k, v) in &self.bindings {
            hasher.update(k.as_bytes());
            hasher.update([1]);
            hasher.update(v.as_bytes());
            hasher.update([2]);
        }
        hasher.update(format!("{:.6}", self.params.temperature).as_bytes());
        if let Some(mt) = self.params.max_tokens {
            hasher.update(mt.to_le_bytes());
        }
        hex_digest(hasher)
    }
}

pub(crate) fn hex_digest(hasher: Sha256) -> String {
    hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

pub(crate) fn sha256_hex(data: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(data.as_bytes());
    hex_digest(hasher)
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Usage {
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompletionResponse {
    pub text: String,
    pub usage: Usage,
    pub latency_ms: u64,
}

/// A completion backend. Implementations are shareable across threads.
pub trait Backend: Send + Sync {
    fn complete(&self, req: &CompletionRequest) -> Result<CompletionResponse, LlmError>;

    fn mode(&self) -> &'static str;
}

impl<B: Backend + ?Sized> Backend for &B {
    fn complete(&self, req: &CompletionRequest) -> Result<CompletionResponse, LlmError> {
        (**self).complete(req)
    }

    fn mode(&self) -> &'static str {
        (**self).mode()
    }
}

/// Returns canned responses in order; errors on exhaustion.
pub struct ScriptedBackend {
    responses: Vec<String>,
    cursor: Mutex<usize>,
}

impl ScriptedBackend {
    pub fn new(responses: Vec<String>) -> Self {
        ScriptedBackend {
            responses,
            cursor: Mutex::new(0),
        }
    }

    pub fn served(&self) -> usize {
        *self.cursor.lock().unwrap()
    }
}

impl Backend for ScriptedBackend {
    fn complete(&self, req: &CompletionRequest) -> Result<CompletionResponse, LlmError> {
        let mut cursor = self.cursor.lock().unwrap();
        let Some(text) = self.responses.get(*cursor) else {
            return Err(LlmError::ScriptExhausted { served: *cursor });
        };
        *cursor += 1;
        Ok(CompletionResponse {
            text: text.clone(),
            usage: Usage {
                prompt_tokens: req.prompt.split_whitespace().count() as u64,
                completion_tokens: text.split_whitespace().count() as u64,
            },
            latency_ms: 0,
        })
    }

    fn mode(&self) -> &'static str {
        "scripted"
    }
}

/// Wraps any backend and appends every (request, response) pair to a
/// cassette, so a scripted or live run can be replayed deterministically.
pub struct RecordingBackend<B> {
    inner: B,
    writer: Mutex<CassetteWriter>,
}

impl<B: Backend> RecordingBackend<B> {
    pub fn new(inner: B, writer: CassetteWriter) -> Self {
        RecordingBackend {
            inner,
            writer: Mutex::new(writer),
        }
    }
}

impl<B: Backend> Backend for RecordingBackend<B> {
    fn complete(&self, req: &CompletionRequest) -> Result<CompletionResponse, LlmError> {
        let resp = self.inner.complete(req)?;
        self.writer.lock().unwrap().append(req, &resp)?;
        Ok(resp)
    }

    fn mode(&self) -> &'static str {
        self.inner.mode()
    }
}

/// Bounded retry policy for transient transport failures.
#[derive(Debug, Clone)]
pub struct RetryPolicy {
    pub max_retries: u32,
    pub base_delay: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            max_retries: 3,
            base_delay: Duration::from_millis(250),
        }
    }
}

/// HTTP client for an OpenAI-compatible chat-completions endpoint. The
/// credential is read from the named environment variable at construction and
/// never written to traces or cassettes.
pub struct LiveBackend {
    endpoint: String,
    api_key: String,
    retry: RetryPolicy,
    client: reqwest::blocking::Client,
}

impl LiveBackend {
    pub fn new(
        endpoint: impl Into<String>,
        credential_env: &str,
        retry: RetryPolicy,
    ) -> Result<Self, LlmError> {
        let api_key = std::env::var(credential_env).map_err(|_| {
            LlmError::Transport(format!(
                "credential environment variable '{credential_env}' is not set"
            ))
        })?;
        Ok(LiveBackend {
            endpoint: endpoint.into(),
            api_key,
            retry,
            client: reqwest::blocking::Client::new(),
        })
    }

    /// The configured credential, for scrub filters.
    pub fn credential(&self) -> &str {
        &self.api_key
    }
}

impl Backend for LiveBackend {
    fn complete(&self, req: &CompletionRequest) -> Result<CompletionResponse, LlmError> {
        let body = serde_json::json!({
            "model": req.model,
            "messages": [{"role": "user", "content": req.prompt}],
            "temperature": req.params.temperature,
            "max_tokens": req.params.max_tokens,
        });
        let mut attempt = 0;
        loop {
            let started = Instant::now();
            let result = self
                .client
                .post(&self.endpoint)
                .bearer_auth(&self.api_key)
                .json(&body)
                .send();
            match result {
                Ok(resp) if resp.status().as_u16() == 429 || resp.status().is_server_error() => {
                    attempt += 1;
                    if attempt > self.retry.max_retries {
                        return Err(LlmError::RateLimited { attempts: attempt });
                    }
                    std::thread::sleep(self.retry.base_delay * 2u32.pow(attempt - 1));
                }
                Ok(resp) if !resp.status().is_success() => {
                    return Err(LlmError::Transport(format!(
                        "endpoint returned status {}",
                        resp.status()
                    )));
                }
                Ok(resp) => {
                    let latency_ms = started.elapsed().as_millis() as u64;
                    let value: serde_json::Value = resp
                        .json()
                        .map_err(|e| LlmError::Transport(format!("malformed response: {e}")))?;
                    let text = value["choices"][0]["message"]["content"]
                        .as_str()
                        .ok_or_else(|| {
                            LlmError::Transport("response missing message content".into())
                        })?
                        .to_string();
                    let usage = Usage {
                        prompt_tokens: value["usage"]["prompt_tokens"].as_u64().unwrap_or(0),
                        completion_tokens: value["usage"]["completion_tokens"]
                            .as_u64()
                            .unwrap_or(0),
                    };
                    return Ok(CompletionResponse {
                        text,
                        usage,
                        latency_ms,
                    });
                }
                Err(e) if e.is_timeout() || e.is_connect() => {
                    attempt += 1;
                    if attempt > self.retry.max_retries {
                        return Err(LlmError::Transport(e.to_string()));
                    }
                    std::thread::sleep(self.retry.base_delay * 2u32.pow(attempt - 1));
                }
                Err(e) => return Err(LlmError::Transport(e.to_string())),
            }
        }
    }

    fn mode(&self) -> &'static str {
        "live"
    }
}
