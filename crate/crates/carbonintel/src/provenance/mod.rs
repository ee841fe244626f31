//! Provenance tracking: an append-only, hash-chained event log per run,
//! citation verification protocols per source type, numeric-conflict
//! detection with a deterministic resolution cascade, coverage auditing
//! and bibliography formatting.

mod cite;
mod conflicts;
mod events;
mod graph;
mod verify;

pub use cite::{first_citation_order, format_citation};
pub use conflicts::{
    Conflict, ConflictKey, ConflictStatus, DEFAULT_CONFLICT_THRESHOLD, QuantifiedClaim,
    detect_conflicts, relative_difference, resolve_conflict,
};
pub use events::{EventKind, ProvenanceEvent};
pub use graph::{ProvenanceError, ProvenanceGraph, coverage};
pub use verify::{
    Locator, TABLE_MATCH_TOLERANCE, VerificationOutcome, VerifyError, parse_locator, protocol_id,
    verify_citation,
};
