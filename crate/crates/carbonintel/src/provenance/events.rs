//! Append-only provenance events.
//!
//! Every state change in a run's provenance graph is an event. Events are
//! immutable once appended and carry their full payload in `details`, so
//! replaying a log rebuilds the graph exactly (no out-of-band state).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::core::{Citation, Claim, ClaimId, SourceRecord, Timestamp, VerificationState};
use crate::provenance::conflicts::{Conflict, ConflictStatus};
use crate::provenance::verify::VerificationOutcome;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    SourceRegistered,
    ClaimCreated,
    CitationAttached,
    CitationVerified,
    ClaimRewritten,
    ConflictDetected,
    ConflictResolved,
}

impl EventKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EventKind::SourceRegistered => "source_registered",
            EventKind::ClaimCreated => "claim_created",
            EventKind::CitationAttached => "citation_attached",
            EventKind::CitationVerified => "citation_verified",
            EventKind::ClaimRewritten => "claim_rewritten",
            EventKind::ConflictDetected => "conflict_detected",
            EventKind::ConflictResolved => "conflict_resolved",
        }
    }
}

/// One entry in a run's provenance log.
///
/// `sequence` is contiguous from 1 within a graph. `subjects` lists the
/// ids the event is about (order is fixed per kind, see the constructors).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProvenanceEvent {
    pub sequence: u64,
    pub kind: EventKind,
    pub subjects: Vec<String>,
    pub timestamp: Timestamp,
    pub details: BTreeMap<String, Value>,
}

fn object_details<T: Serialize>(value: &T) -> BTreeMap<String, Value> {
    match serde_json::to_value(value) {
        Ok(Value::Object(map)) => map.into_iter().collect(),
        _ => BTreeMap::new(),
    }
}

impl ProvenanceEvent {
    /// Subjects: `[source_id]`. Details: the full source record.
    pub fn source_registered(sequence: u64, at: Timestamp, record: &SourceRecord) -> Self {
        Self {
            sequence,
            kind: EventKind::SourceRegistered,
            subjects: vec![record.id.to_string()],
            timestamp: at,
            details: object_details(record),
        }
    }

    /// Subjects: `[claim_id]`. Details: text, section_ref, confidence.
    pub fn claim_created(sequence: u64, at: Timestamp, claim: &Claim) -> Self {
        Self {
            sequence,
            kind: EventKind::ClaimCreated,
            subjects: vec![claim.id.to_string()],
            timestamp: at,
            details: object_details(claim),
        }
    }

    /// Subjects: `[claim_id, source_id]`. Details: locator.
    pub fn citation_attached(sequence: u64, at: Timestamp, citation: &Citation) -> Self {
        let mut details = BTreeMap::new();
        details.insert("locator".to_owned(), Value::from(citation.locator.clone()));
        Self {
            sequence,
            kind: EventKind::CitationAttached,
            subjects: vec![citation.claim_id.to_string(), citation.source_id.to_string()],
            timestamp: at,
            details,
        }
    }

    /// Subjects: `[claim_id, source_id]`. Details: locator, protocol_id,
    /// verified (never `unverified`), reason.
    pub fn citation_verified(
        sequence: u64,
        at: Timestamp,
        citation: &Citation,
        outcome: &VerificationOutcome,
    ) -> Self {
        let mut details = BTreeMap::new();
        details.insert("locator".to_owned(), Value::from(citation.locator.clone()));
        details.insert(
            "protocol_id".to_owned(),
            Value::from(outcome.protocol_id.clone()),
        );
        details.insert(
            "verified".to_owned(),
            Value::from(match outcome.verified {
                VerificationState::Verified => "verified",
                _ => "failed",
            }),
        );
        details.insert("reason".to_owned(), Value::from(outcome.reason.clone()));
        Self {
            sequence,
            kind: EventKind::CitationVerified,
            subjects: vec![citation.claim_id.to_string(), citation.source_id.to_string()],
            timestamp: at,
            details,
        }
    }

    /// Subjects: `[claim_id]`. Details: the replacement text.
    pub fn claim_rewritten(sequence: u64, at: Timestamp, claim_id: &ClaimId, text: &str) -> Self {
        let mut details = BTreeMap::new();
        details.insert("text".to_owned(), Value::from(text));
        Self {
            sequence,
            kind: EventKind::ClaimRewritten,
            subjects: vec![claim_id.to_string()],
            timestamp: at,
            details,
        }
    }

    /// Subjects: `[claim_a, claim_b]`. Details: the shared key, both
    /// values and the relative difference.
    pub fn conflict_detected(sequence: u64, at: Timestamp, conflict: &Conflict) -> Self {
        let mut details = BTreeMap::new();
        details.insert("entity".to_owned(), Value::from(conflict.key.entity.clone()));
        details.insert("metric".to_owned(), Value::from(conflict.key.metric.clone()));
        details.insert("period".to_owned(), Value::from(conflict.key.period.clone()));
        details.insert("value_a".to_owned(), Value::from(conflict.values.0));
        details.insert("value_b".to_owned(), Value::from(conflict.values.1));
        details.insert(
            "relative_difference".to_owned(),
            Value::from(conflict.relative_difference),
        );
        Self {
            sequence,
            kind: EventKind::ConflictDetected,
            subjects: vec![conflict.claims.0.to_string(), conflict.claims.1.to_string()],
            timestamp: at,
            details,
        }
    }

    /// Subjects: `[claim_a, claim_b]`. Details: the shared key plus
    /// `winner` (claim id, or null when the cascade ends unresolved).
    pub fn conflict_resolved(
        sequence: u64,
        at: Timestamp,
        conflict: &Conflict,
        resolution: &ConflictStatus,
    ) -> Self {
        let winner = match resolution {
            ConflictStatus::Resolved(id) => Value::from(id.to_string()),
            _ => Value::Null,
        };
        let mut details = BTreeMap::new();
        details.insert("entity".to_owned(), Value::from(conflict.key.entity.clone()));
        details.insert("metric".to_owned(), Value::from(conflict.key.metric.clone()));
        details.insert("period".to_owned(), Value::from(conflict.key.period.clone()));
        details.insert("winner".to_owned(), winner);
        Self {
            sequence,
            kind: EventKind::ConflictResolved,
            subjects: vec![conflict.claims.0.to_string(), conflict.claims.1.to_string()],
            timestamp: at,
            details,
        }
    }

    pub fn detail_str(&self, field: &str) -> Option<&str> {
        self.details.get(field).and_then(Value::as_str)
    }

    pub fn detail_f64(&self, field: &str) -> Option<f64> {
        self.details.get(field).and_then(Value::as_f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::SourceType;
    use chrono::NaiveDate;

    fn record() -> SourceRecord {
        SourceRecord {
            id: SourceId::new("src-1"),
            origin: "https://example.org/a".into(),
            source_type: SourceType::Regulatory,
            publisher: "ICAP".into(),
            published_date: NaiveDate::from_ymd_opt(2024, 3, 1),
            retrieved_at: Timestamp::parse("2025-01-01T00:00:00Z").unwrap(),
            credibility: 0.95,
            content_hash: "deadbeef".into(),
        }
    }

    use crate::core::SourceId;

    #[test]
    fn kinds_encode_snake_case() {
        let json = serde_json::to_string(&EventKind::CitationVerified).unwrap();
        assert_eq!(json, "\"citation_verified\"");
    }

    #[test]
    fn source_event_round_trips_the_record() {
        let at = Timestamp::parse("2025-01-01T00:00:00Z").unwrap();
        let e = ProvenanceEvent::source_registered(1, at, &record());
        assert_eq!(e.subjects, vec!["src-1".to_owned()]);
        let back: SourceRecord = serde_json::from_value(serde_json::Value::Object(
            e.details.clone().into_iter().collect(),
        ))
        .unwrap();
        assert_eq!(back, record());
    }

    #[test]
    fn event_serde_round_trip_is_stable() {
        let at = Timestamp::parse("2025-01-01T00:00:05Z").unwrap();
        let e = ProvenanceEvent::claim_rewritten(4, at, &ClaimId::new("clm-9"), "new text");
        let json = crate::encoding::canonical_json(&e).unwrap();
        let back: ProvenanceEvent = serde_json::from_str(&json).unwrap();
        assert_eq!(back, e);
        assert_eq!(crate::encoding::canonical_json(&back).unwrap(), json);
    }
}
