//! Prompt construction, LLM backends and response bookkeeping.

mod cache;
mod http;
mod prompt;
mod transcript;

use std::collections::VecDeque;
use std::path::Path;

use serde::Deserialize;
use thiserror::Error;

use crate::abstraction::AbstractionError;

pub use cache::InformalCache;
pub use http::{HttpBackend, HttpConfig, DEFAULT_API_KEY_VAR};
pub use prompt::{
    build_abstraction_inform_prompt, build_repair_prompt, build_strategy_inform_prompt,
    InformalizationExample, PriorFeedback, PromptTemplate, RepairContext, TemplateId,
};
pub use transcript::{Exchange, Transcript};

#[derive(Debug, Error)]
pub enum LlmError {
    #[error("request timed out after {0} s")]
    Timeout(u64),
    #[error("transport error: {0}")]
    Transport(String),
    #[error("replay script exhausted after {served} responses")]
    ReplayExhausted { served: usize },
    #[error("environment variable {0} holding the API key is not set")]
    MissingApiKey(String),
    #[error("unexpected response: {0}")]
    BadResponse(String),
    #[error("template {template} has no value for slot '{slot}'")]
    MissingSlot { template: TemplateId, slot: String },
    #[error("template {template} has no slot '{slot}'")]
    UnknownSlot { template: TemplateId, slot: String },
    #[error("the repair prompt needs at least one violated assumption")]
    NothingViolated,
    #[error("invalid informalization example: {0}")]
    Example(String),
    #[error("invalid replay script: {0}")]
    Script(String),
    #[error(transparent)]
    Abstraction(#[from] AbstractionError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Something that answers prompts.
pub trait LlmBackend {
    fn complete(&mut self, prompt: &str) -> Result<String, LlmError>;

    /// Short label for transcripts, e.g. `replay` or `http:gpt-4o`.
    fn label(&self) -> String;
}

impl<B: LlmBackend + ?Sized> LlmBackend for Box<B> {
    fn complete(&mut self, prompt: &str) -> Result<String, LlmError> {
        (**self).complete(prompt)
    }

    fn label(&self) -> String {
        (**self).label()
    }
}

pub fn complete(backend: &mut dyn LlmBackend, prompt: &str) -> Result<String, LlmError> {
    backend.complete(prompt)
}

/// Canned responses served in order.
#[derive(Clone, Debug, Default)]
pub struct ReplayBackend {
    responses: VecDeque<String>,
    served: usize,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Script {
    List(Vec<String>),
    Object { responses: Vec<String> },
}

impl ReplayBackend {
    pub fn new<S: Into<String>>(responses: impl IntoIterator<Item = S>) -> Self {
        Self {
            responses: responses.into_iter().map(Into::into).collect(),
            served: 0,
        }
    }

    /// Reads `["r1", ...]` or `{"responses": ["r1", ...]}`.
    pub fn from_json(text: &str) -> Result<Self, LlmError> {
        let script: Script = serde_json::from_str(text).map_err(|e| LlmError::Script(e.to_string()))?;
        Ok(match script {
            Script::List(r) | Script::Object { responses: r } => Self::new(r),
        })
    }

    pub fn from_file(path: &Path) -> Result<Self, LlmError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn served(&self) -> usize {
        self.served
    }

    pub fn remaining(&self) -> usize {
        self.responses.len()
    }
}

impl LlmBackend for ReplayBackend {
    fn complete(&mut self, _prompt: &str) -> Result<String, LlmError> {
        let r = self
            .responses
            .pop_front()
            .ok_or(LlmError::ReplayExhausted {
                served: self.served,
            })?;
        self.served += 1;
        Ok(r)
    }

    fn label(&self) -> String {
        "replay".into()
    }
}
