//! Shared stage plumbing: the pipeline error type, the services handle
//! every stage receives, the metered model-call helper, and the fenced
//! block grammar used by all agent responses.

use crate::backends::{
    ChatBackend, ChatMessage, ChatRequest, ModelBinding, RetryPolicy, UsageMeter, with_retry,
};
use crate::clock::Clock;
use crate::core::{EnvelopeError, Stage, StateError};
use crate::encoding::EncodingError;
use crate::provenance::ProvenanceError;
use thiserror::Error;

pub const DEFAULT_MAX_TOKENS: u32 = 2048;
pub const DEFAULT_TEMPERATURE: f64 = 0.0;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("stage {stage} failed: {detail}")]
    Stage { stage: Stage, detail: String },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("cannot write {}: {detail}", path.display())]
    Io {
        path: std::path::PathBuf,
        detail: String,
    },
    #[error(transparent)]
    Envelope(#[from] EnvelopeError),
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Provenance(#[from] ProvenanceError),
    #[error(transparent)]
    Encoding(#[from] EncodingError),
}

impl PipelineError {
    pub fn stage(stage: Stage, detail: impl Into<String>) -> Self {
        PipelineError::Stage {
            stage,
            detail: detail.into(),
        }
    }
}

/// Cross-cutting run services handed to every stage.
pub struct StageServices<'a> {
    pub backend: &'a dyn ChatBackend,
    pub clock: &'a dyn Clock,
    pub meter: &'a UsageMeter,
    pub retry: RetryPolicy,
}

/// The caller name a stage presents to the backend.
pub(crate) fn agent_role(stage: Stage) -> &'static str {
    match stage {
        Stage::Research => "researcher",
        Stage::Draft => "drafter",
        Stage::Review => "reviewer",
        Stage::Visualise => "visualiser",
        Stage::Translate => "translator",
    }
}

/// One metered, retried model call.
pub(crate) fn call_model(
    services: &StageServices,
    binding: &ModelBinding,
    stage: Stage,
    messages: Vec<ChatMessage>,
) -> Result<String, PipelineError> {
    let request = ChatRequest {
        model_id: binding.model_id.clone(),
        messages,
        max_tokens: DEFAULT_MAX_TOKENS,
        temperature: DEFAULT_TEMPERATURE,
    };
    let (response, _attempts) = with_retry(&services.retry, |_| {
        services.backend.complete(agent_role(stage), stage, &request)
    })
    .map_err(|e| PipelineError::stage(stage, e.to_string()))?;
    services.meter.accrue(stage, &response.usage, binding);
    Ok(response.content)
}

/// Ask once; on a response-format violation ask once more with the
/// violation quoted back, then fail the stage. One re-ask total.
pub(crate) fn ask_with_one_reask<T>(
    services: &StageServices,
    binding: &ModelBinding,
    stage: Stage,
    mut messages: Vec<ChatMessage>,
    parse: impl Fn(&str) -> Result<T, String>,
) -> Result<T, PipelineError> {
    let first = call_model(services, binding, stage, messages.clone())?;
    match parse(&first) {
        Ok(value) => Ok(value),
        Err(violation) => {
            messages.push(ChatMessage::assistant(&first));
            messages.push(ChatMessage::user(format!(
                "The previous response violated the documented response format: {violation}. \
                 Reply again using only that format."
            )));
            let second = call_model(services, binding, stage, messages)?;
            parse(&second).map_err(|v| {
                PipelineError::stage(stage, format!("response format violation after one re-ask: {v}"))
            })
        }
    }
}

/// One fenced block of an agent response: `OPENER [header]` up to `END`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Block {
    pub header: String,
    pub lines: Vec<String>,
}

/// Scan a response for `opener`-fenced blocks. Text outside blocks is
/// ignored so models may add prose; nesting and unterminated blocks are
/// format violations.
pub(crate) fn fenced_blocks(text: &str, opener: &str) -> Result<Vec<Block>, String> {
    const TERMINATOR: &str = "END";
    let opens = |line: &str| -> Option<String> {
        if line == opener {
            return Some(String::new());
        }
        line.strip_prefix(opener)
            .and_then(|rest| rest.strip_prefix(' '))
            .map(|header| header.trim().to_owned())
    };
    let mut blocks = Vec::new();
    let mut current: Option<Block> = None;
    for raw in text.lines() {
        let line = raw.trim();
        match &mut current {
            None => {
                if let Some(header) = opens(line) {
                    current = Some(Block {
                        header,
                        lines: Vec::new(),
                    });
                }
            }
            Some(block) => {
                if line == TERMINATOR {
                    blocks.push(current.take().unwrap());
                } else if opens(line).is_some() {
                    return Err(format!("{opener} opened before the previous block's END"));
                } else if !line.is_empty() {
                    block.lines.push(line.to_owned());
                }
            }
        }
    }
    if current.is_some() {
        return Err(format!("unterminated {opener} block"));
    }
    Ok(blocks)
}

/// First `key: value` line in a block, if any.
pub(crate) fn block_field<'a>(lines: &'a [String], key: &str) -> Option<&'a str> {
    lines.iter().find_map(|line| {
        let (k, v) = line.split_once(':')?;
        (k.trim() == key).then(|| v.trim())
    })
}

/// Shortest-round-trip float text, matching the canonical encoding.
pub(crate) fn fmt_f64(x: f64) -> String {
    serde_json::Number::from_f64(x).map_or_else(|| x.to_string(), |n| n.to_string())
}
