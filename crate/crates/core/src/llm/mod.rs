//! Text-completion plumbing shared by the generation and QA backends: a
//! remote chat-completion client and a recorded-response cassette.

use std::collections::HashMap;
use std::path::Path;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::digest::sha256_hex;
use crate::http::{HttpClient, HttpError, RetryPolicy};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DecodingParams {
    pub model: String,
    pub temperature: f64,
    pub max_tokens: u32,
}

impl Default for DecodingParams {
    fn default() -> Self {
        DecodingParams {
            model: "gpt-4o".into(),
            temperature: 0.7,
            max_tokens: 800,
        }
    }
}

#[derive(Debug, Clone, thiserror::Error)]
pub enum BackendError {
    #[error(transparent)]
    Http(#[from] HttpError),
    #[error("no recorded response for request {fingerprint}")]
    NotRecorded { fingerprint: String },
    #[error("backend misconfigured: {0}")]
    Config(String),
    #[error("malformed backend response: {0}")]
    Malformed(String),
}

impl BackendError {
    pub fn is_retryable(&self) -> bool {
        matches!(self, BackendError::Http(e) if e.is_retryable())
    }
}

/// Anything that turns a prompt into text.
pub trait CompletionBackend: Sync {
    fn id(&self) -> String;
    fn complete(&self, prompt: &str, params: &DecodingParams) -> Result<String, BackendError>;
}

/// OpenAI-compatible `/chat/completions` client.
pub struct ChatClient {
    base_url: String,
    client: HttpClient,
}

impl ChatClient {
    pub fn new(base_url: impl Into<String>, api_key: String, policy: RetryPolicy) -> Self {
        ChatClient {
            base_url: base_url.into().trim_end_matches('/').to_string(),
            client: HttpClient::new(
                format!("implicit-ie/{}", env!("CARGO_PKG_VERSION")),
                Some(api_key),
                policy,
            ),
        }
    }

    /// Build from `GEN_API_KEY` and optionally `GEN_API_BASE`.
    pub fn from_env() -> Result<Self, BackendError> {
        let key = std::env::var("GEN_API_KEY")
            .ok()
            .filter(|k| !k.is_empty())
            .ok_or_else(|| BackendError::Config("GEN_API_KEY is not set; use the mock or replay backend".into()))?;
        let base = std::env::var("GEN_API_BASE").unwrap_or_else(|_| "https://api.openai.com/v1".into());
        Ok(ChatClient::new(base, key, RetryPolicy::default()))
    }
}

impl CompletionBackend for ChatClient {
    fn id(&self) -> String {
        format!("remote:{}", self.base_url)
    }

    fn complete(&self, prompt: &str, params: &DecodingParams) -> Result<String, BackendError> {
        let body = json!({
            "model": params.model,
            "temperature": params.temperature,
            "max_tokens": params.max_tokens,
            "messages": [{"role": "user", "content": prompt}],
        });
        let resp = self
            .client
            .post_json(&format!("{}/chat/completions", self.base_url), &body)?;
        resp.pointer("/choices/0/message/content")
            .and_then(|c| c.as_str())
            .map(str::to_string)
            .ok_or_else(|| BackendError::Malformed(resp.to_string()))
    }
}

/// Stable key of a request in a cassette.
pub fn fingerprint(request: &str) -> String {
    sha256_hex(request.as_bytes())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CassetteEntry {
    pub fingerprint: String,
    #[serde(default)]
    pub request_summary: String,
    pub response: String,
}

impl CassetteEntry {
    pub fn record(request: &str, response: impl Into<String>) -> Self {
        CassetteEntry {
            fingerprint: fingerprint(request),
            request_summary: request.lines().rev().find(|l| !l.trim().is_empty()).unwrap_or("").chars().take(120).collect(),
            response: response.into(),
        }
    }
}

/// Replays recorded responses keyed by request fingerprint. Repeated
/// identical requests consume the recordings in order and then keep
/// returning the last one.
#[derive(Debug, Default)]
pub struct Cassette {
    entries: HashMap<String, Vec<String>>,
    cursor: Mutex<HashMap<String, usize>>,
}

impl Cassette {
    pub fn from_entries(entries: impl IntoIterator<Item = CassetteEntry>) -> Self {
        let mut map: HashMap<String, Vec<String>> = HashMap::new();
        for e in entries {
            map.entry(e.fingerprint).or_default().push(e.response);
        }
        Cassette {
            entries: map,
            cursor: Mutex::new(HashMap::new()),
        }
    }

    pub fn load(path: &Path) -> Result<Self, BackendError> {
        let entries: Vec<CassetteEntry> =
            crate::jsonl::read(path).map_err(|e| BackendError::Config(e.to_string()))?;
        Ok(Self::from_entries(entries))
    }

    pub fn replay(&self, request: &str) -> Result<String, BackendError> {
        let fp = fingerprint(request);
        let responses = self
            .entries
            .get(&fp)
            .ok_or(BackendError::NotRecorded { fingerprint: fp.clone() })?;
        let mut cursor = self.cursor.lock().expect("cassette cursor");
        let i = cursor.entry(fp).or_insert(0);
        let out = responses[(*i).min(responses.len() - 1)].clone();
        *i += 1;
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::http::testing::serve;
    use std::time::Duration;

    #[test]
    fn cassette_replays_in_order_then_sticks() {
        let c = Cassette::from_entries(vec![
            CassetteEntry::record("q", "first"),
            CassetteEntry::record("q", "second"),
        ]);
        assert_eq!(c.replay("q").unwrap(), "first");
        assert_eq!(c.replay("q").unwrap(), "second");
        assert_eq!(c.replay("q").unwrap(), "second");
        assert!(matches!(c.replay("other"), Err(BackendError::NotRecorded { .. })));
    }

    #[test]
    fn chat_client_posts_prompt_and_reads_content() {
        let (addr, seen, handle) = serve(vec![(
            200,
            r#"{"choices":[{"message":{"role":"assistant","content":"Explicit: a\nImplicit: b"}}]}"#.into(),
        )]);
        let policy = RetryPolicy {
            max_attempts: 1,
            base_backoff: Duration::from_millis(1),
            min_interval: Duration::ZERO,
            timeout: Duration::from_secs(5),
        };
        let client = ChatClient::new(addr, "k".into(), policy);
        let out = client.complete("hello", &DecodingParams::default()).unwrap();
        assert_eq!(out, "Explicit: a\nImplicit: b");
        handle.join().unwrap();
        let req = &seen.lock().unwrap()[0];
        assert!(req.starts_with("POST /chat/completions"));
        let (_, body) = req.split_once('\n').unwrap();
        let body: serde_json::Value = serde_json::from_str(body).unwrap();
        assert_eq!(body["messages"][0]["content"], "hello");
        assert_eq!(body["model"], "gpt-4o");
    }
}
