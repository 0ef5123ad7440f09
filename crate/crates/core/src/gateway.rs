//! Client for chat-completions style HTTP endpoints, and extraction of the
//! fenced code block from a model reply.

use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tokio::sync::Semaphore;
use tokio::task::JoinSet;

use crate::lang::LanguageId;

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum GatewayError {
    #[error("authentication failed: {0}")]
    Auth(String),
    #[error("rate limited after {attempts} attempts")]
    RateLimited { attempts: u32 },
    #[error("transport error: {0}")]
    Transport(String),
    #[error("malformed response: {0}")]
    MalformedResponse(String),
    #[error("no fenced code block in response")]
    NoCodeBlock,
    #[error("invalid gateway configuration: {0}")]
    Config(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GatewayConfig {
    /// Full URL of the chat-completions endpoint.
    pub endpoint: String,
    pub model: String,
    /// Name of the environment variable holding the bearer token.
    pub token_env: Option<String>,
    pub max_retries: u32,
    pub timeout_secs: f64,
    pub max_in_flight: usize,
    pub temperature: f64,
    pub max_tokens: Option<u32>,
    /// First retry delay; doubles on every further attempt.
    pub backoff_ms: u64,
    /// JSON-lines audit log of every request and response.
    pub audit_log: Option<PathBuf>,
}

impl Default for GatewayConfig {
    fn default() -> Self {
        GatewayConfig {
            endpoint: "http://127.0.0.1:8000/v1/chat/completions".into(),
            model: "default".into(),
            token_env: None,
            max_retries: 3,
            timeout_secs: 120.0,
            max_in_flight: 4,
            temperature: 0.0,
            max_tokens: None,
            backoff_ms: 500,
            audit_log: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranslationRequest {
    pub sample_id: String,
    pub prompt: String,
    pub target: LanguageId,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranslationResponse {
    pub sample_id: String,
    pub raw_text: String,
    pub extracted_code: Option<String>,
    pub usage: Option<Value>,
    pub attempts: u32,
}

impl TranslationResponse {
    pub fn code(&self) -> Result<&str, GatewayError> {
        self.extracted_code.as_deref().ok_or(GatewayError::NoCodeBlock)
    }
}

fn tag_matches(tag: &str, lang: LanguageId) -> bool {
    let tag = tag.trim().to_ascii_lowercase();
    let tag = tag.split_whitespace().next().unwrap_or("");
    match lang {
        LanguageId::Python => matches!(tag, "python" | "py" | "python3"),
        LanguageId::Cpp => matches!(tag, "cpp" | "c++" | "cc" | "cxx"),
        LanguageId::Java => tag == "java",
    }
}

/// Content of the first fenced block tagged with `lang`, else of the first
/// fenced block. Interior whitespace is kept as is. An unterminated final
/// fence runs to the end of the text.
pub fn extract_code_block(raw: &str, lang: LanguageId) -> Result<String, GatewayError> {
    let mut blocks: Vec<(String, String)> = Vec::new();
    let mut open: Option<(String, Vec<&str>)> = None;
    for line in raw.split('\n') {
        let line_nocr = line.strip_suffix('\r').unwrap_or(line);
        let trimmed = line_nocr.trim_start();
        match &mut open {
            None => {
                if let Some(rest) = trimmed.strip_prefix("```") {
                    open = Some((rest.trim().to_string(), Vec::new()));
                }
            }
            Some((tag, body)) => {
                if trimmed.trim_end() == "```" {
                    blocks.push((std::mem::take(tag), body.join("\n")));
                    open = None;
                } else {
                    body.push(line_nocr);
                }
            }
        }
    }
    // A reply cut off before its closing fence still carries the code.
    if let Some((tag, body)) = open {
        blocks.push((tag, body.join("\n")));
    }
    blocks
        .iter()
        .find(|(t, _)| tag_matches(t, lang))
        .or_else(|| blocks.first())
        .map(|(_, b)| b.clone())
        .ok_or(GatewayError::NoCodeBlock)
}

pub struct Gateway {
    cfg: GatewayConfig,
    client: reqwest::Client,
    token: Option<String>,
    limit: Arc<Semaphore>,
    audit: Option<Mutex<File>>,
}

enum Attempt {
    Done(Value),
    Retry(GatewayError),
    Fail(GatewayError),
}

impl Gateway {
    pub fn new(cfg: GatewayConfig) -> Result<Self, GatewayError> {
        if !(cfg.timeout_secs > 0.0) {
            return Err(GatewayError::Config("timeout must be positive".into()));
        }
        if cfg.max_in_flight == 0 {
            return Err(GatewayError::Config("max_in_flight must be at least 1".into()));
        }
        let token = match &cfg.token_env {
            Some(var) => Some(std::env::var(var).map_err(|_| {
                GatewayError::Auth(format!("environment variable {var} is not set"))
            })?),
            None => None,
        };
        let client = reqwest::Client::builder()
            .timeout(Duration::from_secs_f64(cfg.timeout_secs))
            .build()
            .map_err(|e| GatewayError::Transport(e.to_string()))?;
        let audit = match &cfg.audit_log {
            Some(p) => Some(Mutex::new(
                OpenOptions::new()
                    .create(true)
                    .append(true)
                    .open(p)
                    .map_err(|e| GatewayError::Config(format!("{}: {e}", p.display())))?,
            )),
            None => None,
        };
        Ok(Gateway {
            limit: Arc::new(Semaphore::new(cfg.max_in_flight)),
            cfg,
            client,
            token,
            audit,
        })
    }

    pub fn config(&self) -> &GatewayConfig {
        &self.cfg
    }

    fn redact(&self, s: &str) -> String {
        match &self.token {
            Some(t) if !t.is_empty() => s.replace(t.as_str(), "[REDACTED]"),
            _ => s.to_string(),
        }
    }

    fn log(&self, entry: Value) {
        if let Some(f) = &self.audit {
            let line = self.redact(&entry.to_string());
            if let Ok(mut f) = f.lock() {
                let _ = writeln!(f, "{line}");
            }
        }
    }

    fn body(&self, prompt: &str) -> Value {
        let mut body = json!({
            "model": self.cfg.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": self.cfg.temperature,
        });
        if let Some(m) = self.cfg.max_tokens {
            body["max_tokens"] = json!(m);
        }
        body
    }

    async fn attempt(&self, body: &Value, sample_id: &str, n: u32) -> Attempt {
        let mut req = self.client.post(&self.cfg.endpoint).json(body);
        if let Some(t) = &self.token {
            req = req.bearer_auth(t);
        }
        let resp = match req.send().await {
            Ok(r) => r,
            Err(e) => {
                self.log(json!({"sample_id": sample_id, "attempt": n, "request": body, "error": e.to_string()}));
                return Attempt::Retry(GatewayError::Transport(e.to_string()));
            }
        };
        let status = resp.status();
        let text = match resp.text().await {
            Ok(t) => t,
            Err(e) => return Attempt::Retry(GatewayError::Transport(e.to_string())),
        };
        self.log(json!({"sample_id": sample_id, "attempt": n, "request": body, "status": status.as_u16(), "response": text}));
        match status.as_u16() {
            200..=299 => match serde_json::from_str(&text) {
                Ok(v) => Attempt::Done(v),
                Err(e) => Attempt::Fail(GatewayError::MalformedResponse(e.to_string())),
            },
            401 | 403 => Attempt::Fail(GatewayError::Auth(format!("HTTP {status}"))),
            429 => Attempt::Retry(GatewayError::RateLimited { attempts: n }),
            500..=599 => Attempt::Retry(GatewayError::Transport(format!("HTTP {status}"))),
            _ => Attempt::Fail(GatewayError::Transport(format!("HTTP {status}: {}", self.redact(&text)))),
        }
    }

    /// Send one single-turn request, retrying rate limits, server errors
    /// and transport failures with exponential backoff.
    pub async fn request_translation(&self, req: &TranslationRequest) -> Result<TranslationResponse, GatewayError> {
        let _permit = self.limit.acquire().await.expect("semaphore never closed");
        let body = self.body(&req.prompt);
        let mut attempt = 0;
        let value = loop {
            attempt += 1;
            match self.attempt(&body, &req.sample_id, attempt).await {
                Attempt::Done(v) => break v,
                Attempt::Fail(e) => return Err(e),
                Attempt::Retry(e) => {
                    if attempt > self.cfg.max_retries {
                        return Err(match e {
                            GatewayError::RateLimited { .. } => GatewayError::RateLimited { attempts: attempt },
                            other => other,
                        });
                    }
                    let delay = self.cfg.backoff_ms.saturating_mul(1 << (attempt - 1).min(16));
                    tokio::time::sleep(Duration::from_millis(delay)).await;
                }
            }
        };
        let raw_text = value["choices"][0]["message"]["content"]
            .as_str()
            .ok_or_else(|| GatewayError::MalformedResponse("missing choices[0].message.content".into()))?
            .to_string();
        Ok(TranslationResponse {
            sample_id: req.sample_id.clone(),
            extracted_code: extract_code_block(&raw_text, req.target).ok(),
            raw_text,
            usage: value.get("usage").cloned(),
            attempts: attempt,
        })
    }

    /// Run all requests concurrently (bounded by `max_in_flight`), calling
    /// `on_result` in completion order.
    pub async fn translate_all<F>(self: &Arc<Self>, reqs: Vec<TranslationRequest>, mut on_result: F)
    where
        F: FnMut(String, Result<TranslationResponse, GatewayError>),
    {
        let mut set = JoinSet::new();
        for r in reqs {
            let gw = Arc::clone(self);
            set.spawn(async move {
                let res = gw.request_translation(&r).await;
                (r.sample_id, res)
            });
        }
        while let Some(joined) = set.join_next().await {
            match joined {
                Ok((id, res)) => on_result(id, res),
                Err(e) => log::error!("translation task failed: {e}"),
            }
        }
    }
}
