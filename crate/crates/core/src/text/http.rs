//! Blocking HTTP clients for chat-completion and embedding endpoints.

use std::sync::{Condvar, Mutex};
use std::time::Duration;

use serde::Deserialize;
use serde_json::{json, Value};

use super::{Embedder, LlmProvider, LlmRequest};
use crate::error::ProviderError;
use crate::metric::DEFAULT_EMBED_DIM;

pub const ENV_LLM_API_KEY: &str = "MEDIATOR_LLM_API_KEY";
pub const ENV_LLM_ENDPOINT: &str = "MEDIATOR_LLM_ENDPOINT";
pub const ENV_LLM_MODEL: &str = "MEDIATOR_LLM_MODEL";
pub const ENV_EMBED_ENDPOINT: &str = "MEDIATOR_EMBED_ENDPOINT";
pub const ENV_EMBED_MODEL: &str = "MEDIATOR_EMBED_MODEL";
pub const ENV_EMBED_DIM: &str = "MEDIATOR_EMBED_DIM";

const DEFAULT_LLM_MODEL: &str = "gpt-3.5-turbo-1106";
const DEFAULT_EMBED_MODEL: &str = "universal-sentence-encoder";
const BASE_BACKOFF: Duration = Duration::from_millis(500);

/// Bounds the number of requests in flight across threads.
#[derive(Debug)]
pub struct InFlightLimiter {
    max: usize,
    active: Mutex<usize>,
    freed: Condvar,
}

pub struct Permit<'a> {
    limiter: &'a InFlightLimiter,
}

impl InFlightLimiter {
    pub fn new(max: usize) -> Self {
        InFlightLimiter {
            max: max.max(1),
            active: Mutex::new(0),
            freed: Condvar::new(),
        }
    }

    pub fn acquire(&self) -> Permit<'_> {
        let mut active = self.active.lock().unwrap();
        while *active >= self.max {
            active = self.freed.wait(active).unwrap();
        }
        *active += 1;
        Permit { limiter: self }
    }

    pub fn active(&self) -> usize {
        *self.active.lock().unwrap()
    }
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        *self.limiter.active.lock().unwrap() -= 1;
        self.limiter.freed.notify_one();
    }
}

/// Endpoint settings, normally read from the environment.
#[derive(Debug, Clone, PartialEq)]
pub struct HttpConfig {
    pub llm_endpoint: String,
    pub llm_model: String,
    pub api_key: Option<String>,
    pub embed_endpoint: String,
    pub embed_model: String,
    pub embed_dimension: usize,
    pub max_in_flight: usize,
    pub timeout: Duration,
}

impl HttpConfig {
    pub fn from_env() -> Result<Self, ProviderError> {
        Self::from_lookup(|k| std::env::var(k).ok())
    }

    pub fn from_lookup(get: impl Fn(&str) -> Option<String>) -> Result<Self, ProviderError> {
        let required = |k: &str| get(k).filter(|v| !v.is_empty()).ok_or_else(|| ProviderError::Config(format!("{k} is not set")));
        let embed_dimension = match get(ENV_EMBED_DIM) {
            Some(raw) => raw
                .parse::<usize>()
                .ok()
                .filter(|d| *d > 0)
                .ok_or_else(|| ProviderError::Config(format!("{ENV_EMBED_DIM}=`{raw}` is not a positive integer")))?,
            None => DEFAULT_EMBED_DIM,
        };
        Ok(HttpConfig {
            llm_endpoint: required(ENV_LLM_ENDPOINT)?,
            llm_model: get(ENV_LLM_MODEL).unwrap_or_else(|| DEFAULT_LLM_MODEL.into()),
            api_key: get(ENV_LLM_API_KEY).filter(|v| !v.is_empty()),
            embed_endpoint: required(ENV_EMBED_ENDPOINT)?,
            embed_model: get(ENV_EMBED_MODEL).unwrap_or_else(|| DEFAULT_EMBED_MODEL.into()),
            embed_dimension,
            max_in_flight: 4,
            timeout: Duration::from_secs(60),
        })
    }

    fn client(&self) -> Result<reqwest::blocking::Client, ProviderError> {
        reqwest::blocking::Client::builder()
            .timeout(self.timeout)
            .build()
            .map_err(|e| ProviderError::Config(e.to_string()))
    }
}

fn post_json(
    client: &reqwest::blocking::Client,
    url: &str,
    api_key: Option<&str>,
    body: &Value,
) -> Result<Value, ProviderError> {
    let mut req = client.post(url).json(body);
    if let Some(key) = api_key {
        req = req.bearer_auth(key);
    }
    let resp = req.send().map_err(|e| ProviderError::Transport(e.to_string()))?;
    let status = resp.status();
    let text = resp.text().map_err(|e| ProviderError::Transport(e.to_string()))?;
    if !status.is_success() {
        return Err(ProviderError::Status {
            status: status.as_u16(),
            body: text,
        });
    }
    serde_json::from_str(&text).map_err(|e| ProviderError::Malformed(e.to_string()))
}

/// Chat-completion client.
pub struct HttpLlm {
    config: HttpConfig,
    client: reqwest::blocking::Client,
    limiter: InFlightLimiter,
}

impl HttpLlm {
    pub fn new(config: HttpConfig) -> Result<Self, ProviderError> {
        Ok(HttpLlm {
            client: config.client()?,
            limiter: InFlightLimiter::new(config.max_in_flight),
            config,
        })
    }

    pub fn request_body(&self, request: &LlmRequest) -> Value {
        let mut body = json!({
            "model": self.config.llm_model,
            "temperature": request.temperature,
            "messages": [
                {"role": "system", "content": request.system_message},
                {"role": "user", "content": request.user_prompt},
            ],
        });
        if let Some(seed) = request.seed {
            body["seed"] = json!(seed);
        }
        body
    }
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<ChatChoice>,
}

#[derive(Deserialize)]
struct ChatChoice {
    message: ChatMessage,
}

#[derive(Deserialize)]
struct ChatMessage {
    content: Option<String>,
}

impl LlmProvider for HttpLlm {
    fn name(&self) -> &str {
        "http"
    }

    fn complete(&self, request: &LlmRequest) -> Result<String, ProviderError> {
        let _permit = self.limiter.acquire();
        let body = self.request_body(request);
        let value = post_json(&self.client, &self.config.llm_endpoint, self.config.api_key.as_deref(), &body)?;
        let parsed: ChatResponse =
            serde_json::from_value(value).map_err(|e| ProviderError::Malformed(e.to_string()))?;
        let content = parsed
            .choices
            .into_iter()
            .next()
            .and_then(|c| c.message.content)
            .unwrap_or_default();
        if content.trim().is_empty() {
            return Err(ProviderError::EmptyReply);
        }
        Ok(content)
    }

    fn backoff(&self, attempt: u32) -> Duration {
        BASE_BACKOFF * 2u32.saturating_pow(attempt)
    }
}

/// Embedding client. Accepts a bare JSON array, `{"embedding": [...]}`, or
/// `{"data": [{"embedding": [...]}]}`.
pub struct HttpEmbedder {
    config: HttpConfig,
    client: reqwest::blocking::Client,
    limiter: InFlightLimiter,
}

impl HttpEmbedder {
    pub fn new(config: HttpConfig) -> Result<Self, ProviderError> {
        Ok(HttpEmbedder {
            client: config.client()?,
            limiter: InFlightLimiter::new(config.max_in_flight),
            config,
        })
    }
}

pub fn parse_embedding(value: Value) -> Result<Vec<f64>, ProviderError> {
    let array = match value {
        Value::Array(_) => value,
        Value::Object(mut obj) => match obj.remove("embedding") {
            Some(v) => v,
            None => obj
                .remove("data")
                .and_then(|d| d.get(0).and_then(|first| first.get("embedding")).cloned())
                .ok_or_else(|| ProviderError::Malformed("no embedding field in response".into()))?,
        },
        _ => return Err(ProviderError::Malformed("embedding response is not an array".into())),
    };
    serde_json::from_value(array).map_err(|e| ProviderError::Malformed(e.to_string()))
}

impl Embedder for HttpEmbedder {
    fn name(&self) -> &str {
        "http"
    }

    fn dimension(&self) -> usize {
        self.config.embed_dimension
    }

    fn embed_raw(&self, text: &str) -> Result<Vec<f64>, ProviderError> {
        let _permit = self.limiter.acquire();
        let body = json!({"model": self.config.embed_model, "input": text});
        let key = self.config.api_key.as_deref();
        let mut last = ProviderError::EmptyReply;
        for attempt in 0..=super::DEFAULT_MAX_RETRIES {
            if attempt > 0 {
                std::thread::sleep(BASE_BACKOFF * 2u32.saturating_pow(attempt - 1));
            }
            match post_json(&self.client, &self.config.embed_endpoint, key, &body) {
                Ok(v) => return parse_embedding(v),
                Err(e) if e.is_transient() => last = e,
                Err(e) => return Err(e),
            }
        }
        Err(last)
    }
}
