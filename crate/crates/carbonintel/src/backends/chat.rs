//! Backend-agnostic chat-completion contract.
//!
//! Every backend (live HTTP, scripted) satisfies `ChatBackend::complete`.
//! Prompt identity is the digest of the canonicalized message list, so
//! insignificant whitespace differences never change which scripted
//! response a prompt selects.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::core::Stage;
use crate::encoding::digest_value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChatRole {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: ChatRole,
    pub content: String,
}

impl ChatMessage {
    pub fn system(content: impl Into<String>) -> Self {
        Self { role: ChatRole::System, content: content.into() }
    }

    pub fn user(content: impl Into<String>) -> Self {
        Self { role: ChatRole::User, content: content.into() }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        Self { role: ChatRole::Assistant, content: content.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub model_id: String,
    pub messages: Vec<ChatMessage>,
    pub max_tokens: u32,
    pub temperature: f64,
}

impl ChatRequest {
    pub fn validate(&self) -> Result<(), BackendError> {
        if self.messages.is_empty() {
            return Err(BackendError::InvalidRequest(
                "messages must not be empty".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Usage {
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatResponse {
    pub content: String,
    pub usage: Usage,
}

/// Error classes drive the retry policy: only `Transport` is transient;
/// everything else propagates immediately.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum BackendError {
    #[error("transport failure talking to {endpoint}: {detail}")]
    Transport { endpoint: String, detail: String },
    #[error("authentication failed for {endpoint}: {detail}")]
    Auth { endpoint: String, detail: String },
    #[error("provider error: {detail}")]
    Provider { detail: String },
    #[error("unscripted prompt for {role}/{stage} (digest {digest}); add a script entry")]
    UnscriptedPrompt { role: String, stage: Stage, digest: String },
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("{attempts} attempts exhausted; last error: {last}")]
    Exhausted {
        attempts: u32,
        history: Vec<String>,
        last: Box<BackendError>,
    },
}

impl BackendError {
    pub fn is_transient(&self) -> bool {
        matches!(self, BackendError::Transport { .. })
    }
}

/// One chat completion. `role` names the calling agent and `stage` the
/// pipeline stage; the scripted backend keys on both, the HTTP backend
/// ignores them.
pub trait ChatBackend: Send + Sync {
    fn complete(
        &self,
        role: &str,
        stage: Stage,
        request: &ChatRequest,
    ) -> Result<ChatResponse, BackendError>;
}

/// Trailing whitespace per line is trimmed and CRLF collapses to LF
/// before digesting, so editors and platforms cannot change a prompt's
/// identity.
pub fn canonicalize_text(text: &str) -> String {
    let normalized = text.replace("\r\n", "\n");
    let mut lines: Vec<&str> = normalized.split('\n').map(str::trim_end).collect();
    // A single trailing newline is insignificant too.
    if lines.last() == Some(&"") {
        lines.pop();
    }
    lines.join("\n")
}

pub fn canonicalize_prompt(messages: &[ChatMessage]) -> Vec<ChatMessage> {
    messages
        .iter()
        .map(|m| ChatMessage {
            role: m.role,
            content: canonicalize_text(&m.content),
        })
        .collect()
}

/// Digest identifying a prompt: sha-256 of the canonicalized message
/// list in canonical encoding.
pub fn prompt_digest(messages: &[ChatMessage]) -> String {
    digest_value(&canonicalize_prompt(messages)).expect("messages always encode")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_message_list_is_invalid() {
        let req = ChatRequest {
            model_id: "m".into(),
            messages: Vec::new(),
            max_tokens: 16,
            temperature: 0.0,
        };
        assert!(matches!(
            req.validate(),
            Err(BackendError::InvalidRequest(_))
        ));
    }

    #[test]
    fn whitespace_variants_share_a_digest() {
        let a = vec![ChatMessage::user("line one  \r\nline two\n")];
        let b = vec![ChatMessage::user("line one\nline two")];
        assert_eq!(prompt_digest(&a), prompt_digest(&b));
    }

    #[test]
    fn meaningful_differences_change_the_digest() {
        let a = vec![ChatMessage::user("  indented")];
        let b = vec![ChatMessage::user("indented")];
        assert_ne!(prompt_digest(&a), prompt_digest(&b));
        let c = vec![ChatMessage::system("indented")];
        assert_ne!(prompt_digest(&b), prompt_digest(&c));
    }

    #[test]
    fn only_transport_errors_are_transient() {
        let transport = BackendError::Transport {
            endpoint: "http://x".into(),
            detail: "refused".into(),
        };
        assert!(transport.is_transient());
        let auth = BackendError::Auth {
            endpoint: "http://x".into(),
            detail: "401".into(),
        };
        assert!(!auth.is_transient());
        let provider = BackendError::Provider { detail: "bad".into() };
        assert!(!provider.is_transient());
    }
}
