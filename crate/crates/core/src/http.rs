//! Blocking JSON-over-HTTP client with bounded retries and a client-side
//! rate limit. Shared by the Wikidata source and the remote LLM backends.

use std::sync::Mutex;
use std::thread;
use std::time::{Duration, Instant};

use serde_json::Value;

#[derive(Debug, Clone, thiserror::Error)]
pub enum HttpError {
    #[error("transport failure after {attempts} attempt(s): {message}")]
    Transport { attempts: u32, message: String },
    #[error("HTTP {code}: {body}")]
    Status { code: u16, body: String },
    #[error("could not decode response: {0}")]
    Decode(String),
}

impl HttpError {
    /// Whether retrying the same request later may succeed.
    pub fn is_retryable(&self) -> bool {
        match self {
            HttpError::Transport { .. } => true,
            HttpError::Status { code, .. } => *code == 429 || *code >= 500,
            HttpError::Decode(_) => false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RetryPolicy {
    pub max_attempts: u32,
    pub base_backoff: Duration,
    /// Minimum spacing between two requests from this client.
    pub min_interval: Duration,
    pub timeout: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            max_attempts: 3,
            base_backoff: Duration::from_millis(500),
            min_interval: Duration::from_millis(100),
            timeout: Duration::from_secs(60),
        }
    }
}

pub struct HttpClient {
    agent: ureq::Agent,
    user_agent: String,
    bearer: Option<String>,
    policy: RetryPolicy,
    last_request: Mutex<Option<Instant>>,
}

impl HttpClient {
    pub fn new(user_agent: impl Into<String>, bearer: Option<String>, policy: RetryPolicy) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(policy.timeout))
            .http_status_as_error(false)
            .build()
            .into();
        HttpClient {
            agent,
            user_agent: user_agent.into(),
            bearer,
            policy,
            last_request: Mutex::new(None),
        }
    }

    fn throttle(&self) {
        let mut last = self.last_request.lock().expect("rate limiter poisoned");
        if let Some(prev) = *last {
            let elapsed = prev.elapsed();
            if elapsed < self.policy.min_interval {
                thread::sleep(self.policy.min_interval - elapsed);
            }
        }
        *last = Some(Instant::now());
    }

    pub fn get_json(&self, url: &str, query: &[(&str, &str)]) -> Result<Value, HttpError> {
        self.with_retries(|| {
            let mut req = self
                .agent
                .get(url)
                .header("User-Agent", &self.user_agent)
                .header("Accept", "application/json");
            for (k, v) in query {
                req = req.query(*k, *v);
            }
            if let Some(token) = &self.bearer {
                req = req.header("Authorization", &format!("Bearer {token}"));
            }
            req.call()
        })
    }

    pub fn post_json(&self, url: &str, body: &Value) -> Result<Value, HttpError> {
        self.with_retries(|| {
            let mut req = self
                .agent
                .post(url)
                .header("User-Agent", &self.user_agent)
                .header("Accept", "application/json");
            if let Some(token) = &self.bearer {
                req = req.header("Authorization", &format!("Bearer {token}"));
            }
            req.send_json(body)
        })
    }

    fn with_retries<F>(&self, send: F) -> Result<Value, HttpError>
    where
        F: Fn() -> Result<ureq::http::Response<ureq::Body>, ureq::Error>,
    {
        let mut last_err = None;
        for attempt in 1..=self.policy.max_attempts.max(1) {
            if attempt > 1 {
                thread::sleep(self.policy.base_backoff * 2u32.pow(attempt - 2));
            }
            self.throttle();
            let err = match send() {
                Ok(mut resp) => {
                    let code = resp.status().as_u16();
                    if (200..300).contains(&code) {
                        return resp
                            .body_mut()
                            .read_json::<Value>()
                            .map_err(|e| HttpError::Decode(e.to_string()));
                    }
                    let body = resp.body_mut().read_to_string().unwrap_or_default();
                    HttpError::Status { code, body }
                }
                Err(e) => HttpError::Transport {
                    attempts: attempt,
                    message: e.to_string(),
                },
            };
            if !err.is_retryable() {
                return Err(err);
            }
            log::warn!("request attempt {attempt} failed: {err}");
            last_err = Some(err);
        }
        Err(match last_err {
            Some(HttpError::Transport { message, .. }) => HttpError::Transport {
                attempts: self.policy.max_attempts,
                message,
            },
            Some(other) => other,
            None => HttpError::Transport {
                attempts: 0,
                message: "no attempt made".into(),
            },
        })
    }
}

#[cfg(test)]
pub(crate) mod testing {
    //! One-shot local HTTP server for exercising clients without network.

    use std::io::{BufRead, BufReader, Read, Write};
    use std::net::TcpListener;
    use std::sync::{Arc, Mutex};
    use std::thread::JoinHandle;

    /// Serve the given `(status, body)` responses in order, one per
    /// connection, and record the request bodies.
    pub fn serve(responses: Vec<(u16, String)>) -> (String, Arc<Mutex<Vec<String>>>, JoinHandle<()>) {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = format!("http://{}", listener.local_addr().unwrap());
        let seen = Arc::new(Mutex::new(Vec::new()));
        let seen2 = seen.clone();
        let handle = std::thread::spawn(move || {
            for (status, body) in responses {
                let (mut stream, _) = listener.accept().unwrap();
                let mut reader = BufReader::new(stream.try_clone().unwrap());
                let mut content_length = 0usize;
                let mut request_line = String::new();
                reader.read_line(&mut request_line).unwrap();
                loop {
                    let mut line = String::new();
                    reader.read_line(&mut line).unwrap();
                    if line == "\r\n" || line.is_empty() {
                        break;
                    }
                    if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                        content_length = v.trim().parse().unwrap();
                    }
                }
                let mut buf = vec![0u8; content_length];
                reader.read_exact(&mut buf).unwrap();
                seen2
                    .lock()
                    .unwrap()
                    .push(format!("{}{}", request_line, String::from_utf8_lossy(&buf)));
                let reply = format!(
                    "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                    body.len()
                );
                stream.write_all(reply.as_bytes()).unwrap();
            }
        });
        (addr, seen, handle)
    }
}
