//! Deterministic scripted backend for tests and replayable runs.
//!
//! A script file is line-delimited JSON. Each entry carries (role, stage,
//! prompt_digest, content, usage). An entry whose digest is "*" is a
//! wildcard: wildcards form a strict FIFO queue per (role, stage), and
//! each NEW distinct prompt digest consumes the next one. The assignment
//! is memoized, so repeating a prompt replays its response instead of
//! consuming another entry. Exact digests always win over wildcards.
//! A prompt with no entry is a loud error, never a silent fallback.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::backends::chat::{
    BackendError, ChatBackend, ChatRequest, ChatResponse, Usage, prompt_digest,
};
use crate::core::Stage;

pub const WILDCARD_DIGEST: &str = "*";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScriptEntry {
    pub role: String,
    pub stage: Stage,
    pub prompt_digest: String,
    pub content: String,
    #[serde(default)]
    pub prompt_tokens: u64,
    #[serde(default)]
    pub completion_tokens: u64,
}

impl ScriptEntry {
    fn response(&self) -> ChatResponse {
        ChatResponse {
            content: self.content.clone(),
            usage: Usage {
                prompt_tokens: self.prompt_tokens,
                completion_tokens: self.completion_tokens,
            },
        }
    }
}

#[derive(Debug, Error)]
pub enum ScriptError {
    #[error("cannot read script {path}: {detail}")]
    Io { path: String, detail: String },
    #[error("script line {line}: {detail}")]
    Malformed { line: usize, detail: String },
    #[error("script line {line}: duplicate entry for ({role}, {stage}, {digest})")]
    DuplicateKey {
        line: usize,
        role: String,
        stage: Stage,
        digest: String,
    },
    #[error("script line {line}: content must not be empty")]
    EmptyContent { line: usize },
}

#[derive(Debug, Clone, Default)]
pub struct Script {
    pub entries: Vec<ScriptEntry>,
}

impl Script {
    pub fn parse(text: &str) -> Result<Self, ScriptError> {
        let mut entries = Vec::new();
        let mut seen_exact = BTreeMap::new();
        for (index, line) in text.lines().enumerate() {
            let line_no = index + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let entry: ScriptEntry =
                serde_json::from_str(trimmed).map_err(|e| ScriptError::Malformed {
                    line: line_no,
                    detail: e.to_string(),
                })?;
            if entry.content.is_empty() {
                return Err(ScriptError::EmptyContent { line: line_no });
            }
            if entry.prompt_digest != WILDCARD_DIGEST {
                let key = (entry.role.clone(), entry.stage, entry.prompt_digest.clone());
                if seen_exact.insert(key, line_no).is_some() {
                    return Err(ScriptError::DuplicateKey {
                        line: line_no,
                        role: entry.role.clone(),
                        stage: entry.stage,
                        digest: entry.prompt_digest.clone(),
                    });
                }
            }
            entries.push(entry);
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path) -> Result<Self, ScriptError> {
        let text = std::fs::read_to_string(path).map_err(|e| ScriptError::Io {
            path: path.display().to_string(),
            detail: e.to_string(),
        })?;
        Self::parse(&text)
    }
}

type Key = (String, Stage, String);

#[derive(Debug, Default)]
struct WildcardState {
    // Prompt key -> index into the matching wildcard queue.
    assigned: BTreeMap<Key, usize>,
    // (role, stage) -> next unconsumed queue position.
    cursor: BTreeMap<(String, Stage), usize>,
}

#[derive(Debug)]
pub struct ScriptedBackend {
    exact: BTreeMap<Key, ScriptEntry>,
    wildcards: BTreeMap<(String, Stage), Vec<ScriptEntry>>,
    state: Mutex<WildcardState>,
}

impl ScriptedBackend {
    pub fn new(script: Script) -> Self {
        let mut exact = BTreeMap::new();
        let mut wildcards: BTreeMap<(String, Stage), Vec<ScriptEntry>> = BTreeMap::new();
        for entry in script.entries {
            if entry.prompt_digest == WILDCARD_DIGEST {
                wildcards
                    .entry((entry.role.clone(), entry.stage))
                    .or_default()
                    .push(entry);
            } else {
                exact.insert(
                    (entry.role.clone(), entry.stage, entry.prompt_digest.clone()),
                    entry,
                );
            }
        }
        Self {
            exact,
            wildcards,
            state: Mutex::new(WildcardState::default()),
        }
    }

    pub fn from_text(text: &str) -> Result<Self, ScriptError> {
        Ok(Self::new(Script::parse(text)?))
    }
}

impl ChatBackend for ScriptedBackend {
    fn complete(
        &self,
        role: &str,
        stage: Stage,
        request: &ChatRequest,
    ) -> Result<ChatResponse, BackendError> {
        request.validate()?;
        let digest = prompt_digest(&request.messages);
        let key: Key = (role.to_owned(), stage, digest.clone());
        if let Some(entry) = self.exact.get(&key) {
            return Ok(entry.response());
        }
        let queue_key = (role.to_owned(), stage);
        if let Some(queue) = self.wildcards.get(&queue_key) {
            let mut state = self.state.lock().expect("scripted state poisoned");
            if let Some(&index) = state.assigned.get(&key) {
                return Ok(queue[index].response());
            }
            let cursor = state.cursor.entry(queue_key).or_insert(0);
            if *cursor < queue.len() {
                let index = *cursor;
                *cursor += 1;
                state.assigned.insert(key, index);
                return Ok(queue[index].response());
            }
        }
        Err(BackendError::UnscriptedPrompt {
            role: role.to_owned(),
            stage,
            digest,
        })
    }
}
