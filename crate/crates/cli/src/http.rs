use anyhow::{bail, Context};
use instinct_core::decision::{CompletionClient, LlmError};
use serde_json::{json, Value};
use std::env;
use std::time::Duration;

/// Full URL of an OpenAI-compatible chat completions endpoint.
pub const ENV_ENDPOINT: &str = "INSTINCT_LLM_ENDPOINT";
/// Bearer token sent with every request. Optional for local servers.
pub const ENV_API_KEY: &str = "INSTINCT_LLM_API_KEY";
/// Model name passed through in the request body.
pub const ENV_MODEL: &str = "INSTINCT_LLM_MODEL";

const REQUEST_TIMEOUT: Duration = Duration::from_secs(10);
/// Extra attempts after a transport failure or a 5xx response.
const RETRIES: usize = 1;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HttpConfig {
    pub endpoint: String,
    pub api_key: Option<String>,
    pub model: String,
}

impl HttpConfig {
    pub fn from_env() -> anyhow::Result<Self> {
        Self::from_lookup(|k| env::var(k).ok())
    }

    pub fn from_lookup(get: impl Fn(&str) -> Option<String>) -> anyhow::Result<Self> {
        let nonempty = |k: &str| get(k).filter(|v| !v.trim().is_empty());
        let endpoint = nonempty(ENV_ENDPOINT).with_context(|| format!("the LLM backend needs {ENV_ENDPOINT}"))?;
        if !(endpoint.starts_with("http://") || endpoint.starts_with("https://")) {
            bail!("{ENV_ENDPOINT}: expected an http(s) URL, got {endpoint:?}");
        }
        let model = nonempty(ENV_MODEL).with_context(|| format!("the LLM backend needs {ENV_MODEL}"))?;
        Ok(Self { endpoint, api_key: nonempty(ENV_API_KEY), model })
    }
}

/// Blocking chat-completions client. Deterministic sampling is requested
/// (`temperature: 0`) but whether the server honours it is up to the server.
pub struct HttpCompletionClient {
    config: HttpConfig,
    agent: ureq::Agent,
}

impl HttpCompletionClient {
    pub fn new(config: HttpConfig) -> Self {
        let agent = ureq::Agent::config_builder().timeout_global(Some(REQUEST_TIMEOUT)).build().into();
        Self { config, agent }
    }

    fn request(&self, body: &Value) -> Result<Value, Attempt> {
        let mut req = self.agent.post(&self.config.endpoint);
        if let Some(key) = &self.config.api_key {
            req = req.header("authorization", format!("Bearer {key}"));
        }
        let mut resp = req.send_json(body).map_err(|e| match e {
            ureq::Error::StatusCode(code) if code >= 500 => Attempt::Retry(format!("HTTP {code}")),
            ureq::Error::StatusCode(code) => Attempt::Fatal(format!("HTTP {code}")),
            other => Attempt::Retry(other.to_string()),
        })?;
        resp.body_mut().read_json::<Value>().map_err(|e| Attempt::Fatal(format!("response body: {e}")))
    }
}

enum Attempt {
    Retry(String),
    Fatal(String),
}

/// Pulls the assistant text out of a chat-completions response.
pub(crate) fn reply_text(response: &Value) -> Result<String, LlmError> {
    response
        .pointer("/choices/0/message/content")
        .and_then(Value::as_str)
        .map(str::to_owned)
        .ok_or_else(|| LlmError::Malformed("response has no choices[0].message.content".into()))
}

impl CompletionClient for HttpCompletionClient {
    fn complete(&mut self, system: &str, user: &str) -> Result<String, LlmError> {
        let body = json!({
            "model": self.config.model,
            "temperature": 0,
            "messages": [
                {"role": "system", "content": system},
                {"role": "user", "content": user},
            ],
        });
        let mut last = String::new();
        for _ in 0..=RETRIES {
            match self.request(&body) {
                Ok(response) => return reply_text(&response),
                Err(Attempt::Fatal(msg)) => return Err(LlmError::Transport(msg)),
                Err(Attempt::Retry(msg)) => last = msg,
            }
        }
        Err(LlmError::Transport(last))
    }
}
