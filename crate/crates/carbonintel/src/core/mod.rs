//! Shared domain types, query validation, the pipeline state machine and
//! the inter-agent envelope protocol.

mod artifact;
mod envelope;
mod query;
mod state;
mod types;

pub use artifact::{ClaimRef, ReportArtifact, Section};
pub use envelope::{AgentEnvelope, EnvelopeError, PayloadKind, RunLog};
pub use query::{Audience, QueryViolation, RawQuery, ResearchQuery, validate_query};
pub use state::{Phase, PipelineEvent, PipelineState, Stage, StateError, advance_state};
pub use types::{
    Cell, Citation, Claim, ClaimId, CoreError, ParsedDocument, RunId, SourceId, SourceRecord,
    SourceType, Table, Timestamp, VerificationState,
};
