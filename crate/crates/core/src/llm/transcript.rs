use std::fs::OpenOptions;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{LlmBackend, LlmError, TemplateId};

/// One prompt and its response.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exchange {
    pub iteration: usize,
    pub template: TemplateId,
    pub backend: String,
    pub prompt: String,
    pub response: String,
    pub prompt_bytes: usize,
    pub response_bytes: usize,
    pub millis: u128,
}

/// Every prompt dispatched in a session.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    pub exchanges: Vec<Exchange>,
}

impl Transcript {
    pub fn new() -> Self {
        Self::default()
    }

    /// Sends `prompt` and records the exchange.
    pub fn dispatch(
        &mut self,
        backend: &mut dyn LlmBackend,
        iteration: usize,
        template: TemplateId,
        prompt: &str,
    ) -> Result<String, LlmError> {
        let start = std::time::Instant::now();
        let response = backend.complete(prompt)?;
        log::debug!("{template} prompt answered ({} bytes)", response.len());
        self.exchanges.push(Exchange {
            iteration,
            template,
            backend: backend.label(),
            prompt: prompt.to_string(),
            response: response.clone(),
            prompt_bytes: prompt.len(),
            response_bytes: response.len(),
            millis: start.elapsed().as_millis(),
        });
        Ok(response)
    }

    pub fn len(&self) -> usize {
        self.exchanges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exchanges.is_empty()
    }

    /// Appends one JSON line per exchange.
    pub fn append_jsonl(&self, path: &Path) -> Result<(), LlmError> {
        let mut f = OpenOptions::new().create(true).append(true).open(path)?;
        for e in &self.exchanges {
            writeln!(f, "{}", serde_json::to_string(e).expect("exchange serializes"))?;
        }
        Ok(())
    }
}
