use std::time::Duration;

use serde::Deserialize;
use serde_json::json;

use super::{Policy, PolicyError, PolicyRequest};
use crate::error::{Error, Result};

/// Endpoint settings for an OpenAI-compatible chat-completions server.
#[derive(Debug, Clone, PartialEq)]
pub struct RemoteConfig {
    pub base_url: String,
    pub model: String,
    pub api_key: Option<String>,
    pub max_tokens: u32,
    pub attempts: u32,
    pub backoff: Duration,
    pub timeout: Duration,
}

impl RemoteConfig {
    pub fn new(base_url: impl Into<String>, model: impl Into<String>) -> Self {
        Self {
            base_url: base_url.into(),
            model: model.into(),
            api_key: None,
            max_tokens: 128,
            attempts: 3,
            backoff: Duration::from_millis(500),
            timeout: Duration::from_secs(60),
        }
    }

    /// Reads `REACTREE_BASE_URL`, `REACTREE_MODEL` and optionally
    /// `REACTREE_API_KEY`.
    pub fn from_env() -> Result<Self> {
        let var = |name: &str| std::env::var(name).ok().filter(|v| !v.trim().is_empty());
        let base = var("REACTREE_BASE_URL")
            .ok_or_else(|| Error::Config("REACTREE_BASE_URL is not set".into()))?;
        let model = var("REACTREE_MODEL")
            .ok_or_else(|| Error::Config("REACTREE_MODEL is not set".into()))?;
        let mut cfg = Self::new(base, model);
        cfg.api_key = var("REACTREE_API_KEY");
        Ok(cfg)
    }
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: Message,
}

#[derive(Deserialize)]
struct Message {
    content: Option<String>,
}

enum Attempt {
    Retry(String),
    Fail(String),
}

/// Greedy, single-line completions from a remote model.
pub struct RemotePolicy {
    config: RemoteConfig,
    agent: ureq::Agent,
}

impl RemotePolicy {
    pub fn new(config: RemoteConfig) -> Self {
        let agent = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(config.timeout))
            .build()
            .into();
        Self { config, agent }
    }

    fn url(&self) -> String {
        format!(
            "{}/chat/completions",
            self.config.base_url.trim_end_matches('/')
        )
    }

    fn attempt(&self, request: &PolicyRequest<'_>) -> Result<String, Attempt> {
        let body = json!({
            "model": self.config.model,
            "messages": [
                {"role": "system", "content": request.system},
                {"role": "user", "content": request.user},
            ],
            "temperature": 0,
            "max_tokens": self.config.max_tokens,
            "stop": ["\n"],
        });
        let mut call = self.agent.post(self.url());
        if let Some(key) = &self.config.api_key {
            call = call.header("Authorization", format!("Bearer {key}"));
        }
        let mut response = call
            .send_json(&body)
            .map_err(|e| Attempt::Retry(e.to_string()))?;
        let status = response.status().as_u16();
        if status == 429 || status >= 500 {
            return Err(Attempt::Retry(format!("HTTP {status}")));
        }
        if status >= 400 {
            return Err(Attempt::Fail(format!("HTTP {status}")));
        }
        let parsed: ChatResponse = response
            .body_mut()
            .read_json()
            .map_err(|e| Attempt::Fail(format!("bad response body: {e}")))?;
        parsed
            .choices
            .into_iter()
            .next()
            .and_then(|c| c.message.content)
            .ok_or_else(|| Attempt::Fail("response has no content".into()))
    }
}

impl Policy for RemotePolicy {
    fn complete(&self, request: &PolicyRequest<'_>) -> Result<String, PolicyError> {
        let mut last = String::new();
        for n in 0..self.config.attempts.max(1) {
            if n > 0 {
                std::thread::sleep(self.config.backoff * 2u32.pow(n - 1));
            }
            match self.attempt(request) {
                Ok(text) => return Ok(text),
                Err(Attempt::Retry(e)) => last = e,
                Err(Attempt::Fail(e)) => return Err(PolicyError::Transport(e)),
            }
        }
        Err(PolicyError::Transport(format!(
            "gave up after {} attempts: {last}",
            self.config.attempts.max(1)
        )))
    }
}
