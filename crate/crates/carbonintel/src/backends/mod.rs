//! Chat model backends: a shared trait, a scripted replay backend for
//! deterministic runs, a live HTTP backend, retry with exponential
//! backoff, and exact integer usage metering.

pub mod chat;
pub mod http;
pub mod meter;
pub mod retry;
pub mod scripted;

pub use chat::{
    BackendError, ChatBackend, ChatMessage, ChatRequest, ChatResponse, ChatRole, Usage,
    canonicalize_prompt, canonicalize_text, prompt_digest,
};
pub use http::{DEFAULT_HTTP_TIMEOUT, HttpBackend};
pub use meter::{
    MeterSnapshot, ModelBinding, NANO_PER_USD, PriceError, StageUsage, UsageMeter,
    format_nano_usd, parse_usd_to_micro,
};
pub use retry::{RetryPolicy, with_retry};
pub use scripted::{Script, ScriptEntry, ScriptError, ScriptedBackend, WILDCARD_DIGEST};
