//! Deterministic engine for multi-agent carbon-market research reports.
//!
//! The crate is organized around a five-stage pipeline (research, draft,
//! review, visualise, translate) whose model calls go through a pluggable
//! backend so that entire runs can be scripted and replayed byte for byte.

pub mod backends;
pub mod clock;
pub mod core;
pub mod encoding;
pub mod evaluation;
pub mod ingestion;
pub mod pipeline;
pub mod provenance;
pub mod semantic;
pub mod viz;
