use std::fmt;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{LlmBackend, LlmError};

pub const DEFAULT_API_KEY_VAR: &str = "SKILLFIX_API_KEY";

/// Settings of an OpenAI-compatible chat-completions endpoint.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HttpConfig {
    /// Full URL of the chat-completions route.
    pub endpoint: String,
    pub model: String,
    /// Name of the environment variable holding the API key.
    pub api_key_var: String,
    pub timeout_secs: u64,
    pub max_retries: u32,
    pub temperature: Option<f64>,
    pub seed: Option<u64>,
}

impl Default for HttpConfig {
    fn default() -> Self {
        Self {
            endpoint: "https://api.openai.com/v1/chat/completions".into(),
            model: "o1-preview".into(),
            api_key_var: DEFAULT_API_KEY_VAR.into(),
            timeout_secs: 300,
            max_retries: 2,
            temperature: None,
            seed: None,
        }
    }
}

pub struct HttpBackend {
    config: HttpConfig,
    api_key: Option<String>,
    client: reqwest::blocking::Client,
}

impl fmt::Debug for HttpBackend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HttpBackend")
            .field("config", &self.config)
            .field("api_key", &self.api_key.as_ref().map(|_| "<redacted>"))
            .finish()
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
    Retry(LlmError),
    Fail(LlmError),
}

impl HttpBackend {
    /// Reads the key from the configured variable; a missing key is an error.
    pub fn from_env(config: HttpConfig) -> Result<Self, LlmError> {
        let key = std::env::var(&config.api_key_var)
            .map_err(|_| LlmError::MissingApiKey(config.api_key_var.clone()))?;
        Self::new(config, Some(key))
    }

    pub fn new(config: HttpConfig, api_key: Option<String>) -> Result<Self, LlmError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(config.timeout_secs))
            .build()
            .map_err(|e| LlmError::Transport(e.to_string()))?;
        Ok(Self {
            config,
            api_key,
            client,
        })
    }

    pub fn config(&self) -> &HttpConfig {
        &self.config
    }

    fn body(&self, prompt: &str) -> serde_json::Value {
        let mut body = json!({
            "model": self.config.model,
            "messages": [{"role": "user", "content": prompt}],
        });
        if let Some(t) = self.config.temperature {
            body["temperature"] = json!(t);
        }
        if let Some(s) = self.config.seed {
            body["seed"] = json!(s);
        }
        body
    }

    fn attempt(&self, prompt: &str) -> Result<String, Attempt> {
        let mut req = self.client.post(&self.config.endpoint).json(&self.body(prompt));
        if let Some(k) = &self.api_key {
            req = req.bearer_auth(k);
        }
        let resp = req.send().map_err(|e| {
            if e.is_timeout() {
                Attempt::Retry(LlmError::Timeout(self.config.timeout_secs))
            } else {
                Attempt::Retry(LlmError::Transport(e.without_url().to_string()))
            }
        })?;
        let status = resp.status();
        if status.is_server_error() || status.as_u16() == 429 {
            return Err(Attempt::Retry(LlmError::Transport(format!("HTTP {status}"))));
        }
        if !status.is_success() {
            return Err(Attempt::Fail(LlmError::Transport(format!("HTTP {status}"))));
        }
        let parsed: ChatResponse = resp.json().map_err(|e| {
            if e.is_timeout() {
                Attempt::Retry(LlmError::Timeout(self.config.timeout_secs))
            } else {
                Attempt::Fail(LlmError::BadResponse(e.without_url().to_string()))
            }
        })?;
        parsed
            .choices
            .into_iter()
            .next()
            .and_then(|c| c.message.content)
            .ok_or_else(|| Attempt::Fail(LlmError::BadResponse("no message content".into())))
    }
}

impl LlmBackend for HttpBackend {
    fn complete(&mut self, prompt: &str) -> Result<String, LlmError> {
        let mut tries = 0;
        loop {
            match self.attempt(prompt) {
                Ok(text) => return Ok(text),
                Err(Attempt::Fail(e)) => return Err(e),
                Err(Attempt::Retry(e)) if tries >= self.config.max_retries => return Err(e),
                Err(Attempt::Retry(e)) => {
                    tries += 1;
                    log::warn!("retrying chat request ({tries}/{}): {e}", self.config.max_retries);
                }
            }
        }
    }

    fn label(&self) -> String {
        format!("http:{}", self.config.model)
    }
}
