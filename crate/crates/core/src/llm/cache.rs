use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::{Mutex, RwLock};

use sha2::{Digest, Sha256};

use super::{LlmError, TemplateId};

/// Informalization responses keyed by the hash of their prompt.
///
/// Reads take a shared lock; writes are serialized. With a directory the
/// entries also persist as `<sha256>.txt` files.
#[derive(Debug, Default)]
pub struct InformalCache {
    dir: Option<PathBuf>,
    entries: RwLock<HashMap<String, String>>,
    write: Mutex<()>,
}

impl InformalCache {
    pub fn in_memory() -> Self {
        Self::default()
    }

    pub fn on_disk(dir: impl Into<PathBuf>) -> Result<Self, LlmError> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir)?;
        Ok(Self {
            dir: Some(dir),
            ..Self::default()
        })
    }

    pub fn key(template: TemplateId, prompt: &str) -> String {
        let mut h = Sha256::new();
        h.update(template.to_string().as_bytes());
        h.update([0]);
        h.update(prompt.as_bytes());
        hex::encode(h.finalize())
    }

    pub fn get(&self, template: TemplateId, prompt: &str) -> Option<String> {
        let key = Self::key(template, prompt);
        if let Some(v) = self.entries.read().expect("cache lock").get(&key) {
            return Some(v.clone());
        }
        let path = self.dir.as_ref()?.join(format!("{key}.txt"));
        let text = std::fs::read_to_string(path).ok()?;
        self.entries
            .write()
            .expect("cache lock")
            .insert(key, text.clone());
        Some(text)
    }

    pub fn put(&self, template: TemplateId, prompt: &str, response: &str) -> Result<(), LlmError> {
        let key = Self::key(template, prompt);
        let _guard = self.write.lock().expect("cache lock");
        if let Some(dir) = &self.dir {
            let tmp = dir.join(format!("{key}.tmp"));
            std::fs::write(&tmp, response)?;
            std::fs::rename(tmp, dir.join(format!("{key}.txt")))?;
        }
        self.entries
            .write()
            .expect("cache lock")
            .insert(key, response.to_string());
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.entries.read().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
