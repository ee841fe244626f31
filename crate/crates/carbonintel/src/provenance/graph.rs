//! The provenance graph: a fold over an append-only event log.
//!
//! Derived state (sources, claims, citation edges, conflicts) is computed
//! only by applying events, so replaying an exported log rebuilds a graph
//! whose state digest equals the incrementally built one. Each appended
//! event extends a hash chain: digest(n) = sha256(digest(n-1) ||
//! canonical(event n)). Mutating any logged event breaks the chain at
//! that line or the next, which import detects. The chain does not
//! authenticate a wholesale rewrite of the file; compare the head digest
//! recorded in the run metrics for that.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::core::{
    Citation, Claim, ClaimId, ReportArtifact, SourceId, SourceRecord, Timestamp,
    VerificationState,
};
use crate::encoding::{EncodingError, canonical_json, chained_digest, digest_value, from_canonical};
use crate::provenance::conflicts::{Conflict, ConflictKey, ConflictStatus};
use crate::provenance::events::{EventKind, ProvenanceEvent};
use crate::provenance::verify::VerificationOutcome;

#[derive(Debug, Error)]
pub enum ProvenanceError {
    #[error("event sequence gap: expected {expected}, got {got}")]
    SequenceGap { expected: u64, got: u64 },
    #[error("{kind} {id} is not in the graph")]
    DanglingReference { kind: &'static str, id: String },
    #[error("{kind} {id} already recorded")]
    Duplicate { kind: &'static str, id: String },
    #[error("event {sequence} is malformed: {detail}")]
    MalformedEvent { sequence: u64, detail: String },
    #[error("provenance log line {line}: {detail}")]
    MalformedLog { line: usize, detail: String },
    #[error("hash chain mismatch at sequence {sequence}")]
    ChainMismatch { sequence: u64 },
    #[error(transparent)]
    Encoding(#[from] EncodingError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct CitationEdge {
    verified: VerificationState,
    protocol_id: Option<String>,
}

/// One line of an exported provenance log: the event plus its position
/// in the hash chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct LogRecord {
    digest: String,
    event: ProvenanceEvent,
}

#[derive(Debug, Default)]
pub struct ProvenanceGraph {
    events: Vec<ProvenanceEvent>,
    // chain[i] authenticates events[..=i].
    chain: Vec<String>,
    sources: BTreeMap<SourceId, SourceRecord>,
    // Claim id -> current text (rewrites overwrite).
    claims: BTreeMap<ClaimId, String>,
    citations: BTreeMap<(ClaimId, SourceId, String), CitationEdge>,
    conflicts: BTreeMap<String, Conflict>,
}

fn conflict_state_key(a: &ClaimId, b: &ClaimId, key: &ConflictKey) -> String {
    canonical_json(&(a, b, &key.entity, &key.metric, &key.period))
        .expect("string tuples always encode")
}

impl ProvenanceGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn next_sequence(&self) -> u64 {
        self.events.len() as u64 + 1
    }

    /// Validate and append one event, then fold it into derived state.
    /// On error nothing changes (validation happens before any mutation).
    pub fn record(&mut self, event: ProvenanceEvent) -> Result<(), ProvenanceError> {
        let expected = self.next_sequence();
        if event.sequence != expected {
            return Err(ProvenanceError::SequenceGap {
                expected,
                got: event.sequence,
            });
        }
        self.validate(&event)?;
        let payload = canonical_json(&event)?;
        let prev = self.chain.last().map(String::as_str).unwrap_or("");
        self.chain.push(chained_digest(prev, &payload));
        self.apply(&event);
        self.events.push(event);
        Ok(())
    }

    fn subject<'e>(&self, event: &'e ProvenanceEvent, index: usize) -> Result<&'e str, ProvenanceError> {
        event
            .subjects
            .get(index)
            .map(String::as_str)
            .ok_or_else(|| ProvenanceError::MalformedEvent {
                sequence: event.sequence,
                detail: format!(
                    "{} requires at least {} subject ids",
                    event.kind.as_str(),
                    index + 1
                ),
            })
    }

    fn required_str<'e>(
        &self,
        event: &'e ProvenanceEvent,
        field: &str,
    ) -> Result<&'e str, ProvenanceError> {
        event
            .detail_str(field)
            .ok_or_else(|| ProvenanceError::MalformedEvent {
                sequence: event.sequence,
                detail: format!("missing string detail {field:?}"),
            })
    }

    fn citation_key(
        &self,
        event: &ProvenanceEvent,
    ) -> Result<(ClaimId, SourceId, String), ProvenanceError> {
        let claim = ClaimId::new(self.subject(event, 0)?);
        let source = SourceId::new(self.subject(event, 1)?);
        let locator = self.required_str(event, "locator")?.to_owned();
        Ok((claim, source, locator))
    }

    fn conflict_event_key(&self, event: &ProvenanceEvent) -> Result<String, ProvenanceError> {
        let a = ClaimId::new(self.subject(event, 0)?);
        let b = ClaimId::new(self.subject(event, 1)?);
        let key = ConflictKey::new(
            self.required_str(event, "entity")?,
            self.required_str(event, "metric")?,
            self.required_str(event, "period")?,
        );
        Ok(conflict_state_key(&a, &b, &key))
    }

    fn validate(&self, event: &ProvenanceEvent) -> Result<(), ProvenanceError> {
        match event.kind {
            EventKind::SourceRegistered => {
                let id = self.subject(event, 0)?;
                let record: SourceRecord =
                    serde_json::from_value(serde_json::Value::Object(
                        event.details.clone().into_iter().collect(),
                    ))
                    .map_err(|e| ProvenanceError::MalformedEvent {
                        sequence: event.sequence,
                        detail: format!("details do not form a source record: {e}"),
                    })?;
                if record.id.as_str() != id {
                    return Err(ProvenanceError::MalformedEvent {
                        sequence: event.sequence,
                        detail: "subject id differs from record id".into(),
                    });
                }
                if self.sources.contains_key(&record.id) {
                    return Err(ProvenanceError::Duplicate {
                        kind: "source",
                        id: id.to_owned(),
                    });
                }
            }
            EventKind::ClaimCreated => {
                let id = ClaimId::new(self.subject(event, 0)?);
                self.required_str(event, "text")?;
                if self.claims.contains_key(&id) {
                    return Err(ProvenanceError::Duplicate {
                        kind: "claim",
                        id: id.to_string(),
                    });
                }
            }
            EventKind::CitationAttached => {
                let key = self.citation_key(event)?;
                if !self.claims.contains_key(&key.0) {
                    return Err(ProvenanceError::DanglingReference {
                        kind: "claim",
                        id: key.0.to_string(),
                    });
                }
                if !self.sources.contains_key(&key.1) {
                    return Err(ProvenanceError::DanglingReference {
                        kind: "source",
                        id: key.1.to_string(),
                    });
                }
                if self.citations.contains_key(&key) {
                    return Err(ProvenanceError::Duplicate {
                        kind: "citation",
                        id: format!("{} -> {} ({})", key.0, key.1, key.2),
                    });
                }
            }
            EventKind::CitationVerified => {
                let key = self.citation_key(event)?;
                self.required_str(event, "protocol_id")?;
                self.required_str(event, "reason")?;
                match self.required_str(event, "verified")? {
                    "verified" | "failed" => {}
                    other => {
                        return Err(ProvenanceError::MalformedEvent {
                            sequence: event.sequence,
                            detail: format!(
                                "verification outcome must be verified or failed, got {other:?}"
                            ),
                        });
                    }
                }
                if !self.citations.contains_key(&key) {
                    return Err(ProvenanceError::DanglingReference {
                        kind: "citation",
                        id: format!("{} -> {} ({})", key.0, key.1, key.2),
                    });
                }
            }
            EventKind::ClaimRewritten => {
                let id = ClaimId::new(self.subject(event, 0)?);
                self.required_str(event, "text")?;
                if !self.claims.contains_key(&id) {
                    return Err(ProvenanceError::DanglingReference {
                        kind: "claim",
                        id: id.to_string(),
                    });
                }
            }
            EventKind::ConflictDetected => {
                for index in [0, 1] {
                    let id = ClaimId::new(self.subject(event, index)?);
                    if !self.claims.contains_key(&id) {
                        return Err(ProvenanceError::DanglingReference {
                            kind: "claim",
                            id: id.to_string(),
                        });
                    }
                }
                for field in ["value_a", "value_b", "relative_difference"] {
                    event.detail_f64(field).ok_or_else(|| {
                        ProvenanceError::MalformedEvent {
                            sequence: event.sequence,
                            detail: format!("missing numeric detail {field:?}"),
                        }
                    })?;
                }
                let key = self.conflict_event_key(event)?;
                if self.conflicts.contains_key(&key) {
                    return Err(ProvenanceError::Duplicate {
                        kind: "conflict",
                        id: key,
                    });
                }
            }
            EventKind::ConflictResolved => {
                let key = self.conflict_event_key(event)?;
                match self.conflicts.get(&key) {
                    Some(c) if c.status == ConflictStatus::Open => {}
                    Some(_) => {
                        return Err(ProvenanceError::Duplicate {
                            kind: "conflict resolution",
                            id: key,
                        });
                    }
                    None => {
                        return Err(ProvenanceError::DanglingReference {
                            kind: "open conflict",
                            id: key,
                        });
                    }
                }
                if let Some(winner) = event.detail_str("winner") {
                    let (a, b) = (self.subject(event, 0)?, self.subject(event, 1)?);
                    if winner != a && winner != b {
                        return Err(ProvenanceError::MalformedEvent {
                            sequence: event.sequence,
                            detail: format!("winner {winner:?} is not one of the paired claims"),
                        });
                    }
                }
            }
        }
        Ok(())
    }

    // Precondition: `validate` passed, so unwraps here cannot fire.
    fn apply(&mut self, event: &ProvenanceEvent) {
        match event.kind {
            EventKind::SourceRegistered => {
                let record: SourceRecord = serde_json::from_value(serde_json::Value::Object(
                    event.details.clone().into_iter().collect(),
                ))
                .expect("validated");
                self.sources.insert(record.id.clone(), record);
            }
            EventKind::ClaimCreated => {
                let id = ClaimId::new(event.subjects[0].as_str());
                let text = event.detail_str("text").expect("validated").to_owned();
                self.claims.insert(id, text);
            }
            EventKind::CitationAttached => {
                let key = self.citation_key(event).expect("validated");
                self.citations.insert(
                    key,
                    CitationEdge {
                        verified: VerificationState::Unverified,
                        protocol_id: None,
                    },
                );
            }
            EventKind::CitationVerified => {
                let key = self.citation_key(event).expect("validated");
                let verified = match event.detail_str("verified").expect("validated") {
                    "verified" => VerificationState::Verified,
                    _ => VerificationState::Failed,
                };
                let protocol_id = event
                    .detail_str("protocol_id")
                    .expect("validated")
                    .to_owned();
                let edge = self.citations.get_mut(&key).expect("validated");
                edge.verified = verified;
                edge.protocol_id = Some(protocol_id);
            }
            EventKind::ClaimRewritten => {
                let id = ClaimId::new(event.subjects[0].as_str());
                let text = event.detail_str("text").expect("validated").to_owned();
                self.claims.insert(id, text);
            }
            EventKind::ConflictDetected => {
                let a = ClaimId::new(event.subjects[0].as_str());
                let b = ClaimId::new(event.subjects[1].as_str());
                let key = ConflictKey::new(
                    event.detail_str("entity").expect("validated"),
                    event.detail_str("metric").expect("validated"),
                    event.detail_str("period").expect("validated"),
                );
                let state_key = conflict_state_key(&a, &b, &key);
                self.conflicts.insert(
                    state_key,
                    Conflict {
                        claims: (a, b),
                        key,
                        values: (
                            event.detail_f64("value_a").expect("validated"),
                            event.detail_f64("value_b").expect("validated"),
                        ),
                        relative_difference: event
                            .detail_f64("relative_difference")
                            .expect("validated"),
                        status: ConflictStatus::Open,
                    },
                );
            }
            EventKind::ConflictResolved => {
                let key = self.conflict_event_key(event).expect("validated");
                let status = match event.detail_str("winner") {
                    Some(winner) => ConflictStatus::Resolved(ClaimId::new(winner)),
                    None => ConflictStatus::Unresolved,
                };
                self.conflicts.get_mut(&key).expect("validated").status = status;
            }
        }
    }

    // Convenience recorders used by the pipeline stages.

    pub fn record_source(
        &mut self,
        record: &SourceRecord,
        at: Timestamp,
    ) -> Result<(), ProvenanceError> {
        self.record(ProvenanceEvent::source_registered(
            self.next_sequence(),
            at,
            record,
        ))
    }

    pub fn record_claim(&mut self, claim: &Claim, at: Timestamp) -> Result<(), ProvenanceError> {
        self.record(ProvenanceEvent::claim_created(self.next_sequence(), at, claim))
    }

    pub fn attach_citation(
        &mut self,
        citation: &Citation,
        at: Timestamp,
    ) -> Result<(), ProvenanceError> {
        self.record(ProvenanceEvent::citation_attached(
            self.next_sequence(),
            at,
            citation,
        ))
    }

    pub fn record_verification(
        &mut self,
        citation: &Citation,
        outcome: &VerificationOutcome,
        at: Timestamp,
    ) -> Result<(), ProvenanceError> {
        self.record(ProvenanceEvent::citation_verified(
            self.next_sequence(),
            at,
            citation,
            outcome,
        ))
    }

    pub fn rewrite_claim(
        &mut self,
        claim_id: &ClaimId,
        text: &str,
        at: Timestamp,
    ) -> Result<(), ProvenanceError> {
        self.record(ProvenanceEvent::claim_rewritten(
            self.next_sequence(),
            at,
            claim_id,
            text,
        ))
    }

    pub fn record_conflict(
        &mut self,
        conflict: &Conflict,
        at: Timestamp,
    ) -> Result<(), ProvenanceError> {
        self.record(ProvenanceEvent::conflict_detected(
            self.next_sequence(),
            at,
            conflict,
        ))
    }

    pub fn record_resolution(
        &mut self,
        conflict: &Conflict,
        resolution: &ConflictStatus,
        at: Timestamp,
    ) -> Result<(), ProvenanceError> {
        if *resolution == ConflictStatus::Open {
            return Err(ProvenanceError::MalformedEvent {
                sequence: self.next_sequence(),
                detail: "a resolution cannot leave the conflict open".into(),
            });
        }
        self.record(ProvenanceEvent::conflict_resolved(
            self.next_sequence(),
            at,
            conflict,
            resolution,
        ))
    }

    // Read-side accessors. All iteration orders are BTreeMap orders, so
    // snapshots and digests are deterministic.

    pub fn events(&self) -> &[ProvenanceEvent] {
        &self.events
    }

    pub fn head_digest(&self) -> &str {
        self.chain.last().map(String::as_str).unwrap_or("")
    }

    pub fn sources(&self) -> impl Iterator<Item = &SourceRecord> {
        self.sources.values()
    }

    pub fn source(&self, id: &SourceId) -> Option<&SourceRecord> {
        self.sources.get(id)
    }

    pub fn source_count(&self) -> usize {
        self.sources.len()
    }

    pub fn contains_claim(&self, id: &ClaimId) -> bool {
        self.claims.contains_key(id)
    }

    pub fn claim_text(&self, id: &ClaimId) -> Option<&str> {
        self.claims.get(id).map(String::as_str)
    }

    pub fn claim_count(&self) -> usize {
        self.claims.len()
    }

    pub fn citations(&self) -> Vec<Citation> {
        self.citations
            .iter()
            .map(|((claim, source, locator), edge)| Citation {
                claim_id: claim.clone(),
                source_id: source.clone(),
                locator: locator.clone(),
                verified: edge.verified,
                protocol_id: edge.protocol_id.clone(),
            })
            .collect()
    }

    pub fn citations_for(&self, claim: &ClaimId) -> Vec<Citation> {
        self.citations()
            .into_iter()
            .filter(|c| c.claim_id == *claim)
            .collect()
    }

    pub fn has_verified_citation(&self, claim: &ClaimId) -> bool {
        self.citations
            .iter()
            .any(|((c, _, _), edge)| c == claim && edge.verified == VerificationState::Verified)
    }

    pub fn conflicts(&self) -> impl Iterator<Item = &Conflict> {
        self.conflicts.values()
    }

    pub fn unresolved_conflicts(&self) -> Vec<&Conflict> {
        self.conflicts
            .values()
            .filter(|c| c.status == ConflictStatus::Unresolved)
            .collect()
    }

    /// Digest of derived state only (not the log). Two graphs with equal
    /// state digests answer every read-side query identically.
    pub fn state_digest(&self) -> String {
        #[derive(Serialize)]
        struct Snapshot<'a> {
            sources: Vec<&'a SourceRecord>,
            claims: Vec<(&'a ClaimId, &'a str)>,
            citations: Vec<Citation>,
            conflicts: Vec<&'a Conflict>,
        }
        let snapshot = Snapshot {
            sources: self.sources.values().collect(),
            claims: self.claims.iter().map(|(k, v)| (k, v.as_str())).collect(),
            citations: self.citations(),
            conflicts: self.conflicts.values().collect(),
        };
        digest_value(&snapshot).expect("snapshot always encodes")
    }

    /// Line-delimited canonical log: one `{digest, event}` record per
    /// line, chained in order.
    pub fn export_log(&self) -> Result<String, ProvenanceError> {
        let mut out = String::new();
        for (event, digest) in self.events.iter().zip(&self.chain) {
            out.push_str(&canonical_json(&LogRecord {
                digest: digest.clone(),
                event: event.clone(),
            })?);
            out.push('\n');
        }
        Ok(out)
    }

    /// Rebuild a graph from an exported log, re-validating every event
    /// and re-deriving the hash chain. Any mutated line surfaces as a
    /// chain mismatch (or a malformed/invalid event).
    pub fn import_log(text: &str) -> Result<Self, ProvenanceError> {
        let mut graph = Self::new();
        for (index, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let record: LogRecord =
                from_canonical(line).map_err(|e| ProvenanceError::MalformedLog {
                    line: index + 1,
                    detail: e.to_string(),
                })?;
            let sequence = record.event.sequence;
            graph.record(record.event)?;
            if graph.head_digest() != record.digest {
                return Err(ProvenanceError::ChainMismatch { sequence });
            }
        }
        Ok(graph)
    }
}

/// Uncited claim ids (report order) and the verified-citation coverage
/// ratio. An empty report has coverage 1.0 by convention, keeping the
/// quality gate well-defined.
pub fn coverage(report: &ReportArtifact, graph: &ProvenanceGraph) -> (Vec<ClaimId>, f64) {
    let total = report.claim_count();
    if total == 0 {
        return (Vec::new(), 1.0);
    }
    let mut uncited = Vec::new();
    let mut verified = 0usize;
    for claim_ref in report.claims() {
        if graph.has_verified_citation(&claim_ref.claim.id) {
            verified += 1;
        } else {
            uncited.push(claim_ref.claim.id.clone());
        }
    }
    (uncited, verified as f64 / total as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::SourceType;
    use crate::core::{ClaimRef, Section};
    use crate::provenance::conflicts::{QuantifiedClaim, detect_conflicts};
    use crate::provenance::verify::verify_citation;
    use crate::core::ParsedDocument;

    fn ts(offset: i64) -> Timestamp {
        Timestamp::parse("2025-01-01T00:00:00Z")
            .unwrap()
            .plus_seconds(offset)
    }

    fn source(id: &str, credibility: f64) -> SourceRecord {
        SourceRecord {
            id: SourceId::new(id),
            origin: format!("https://example.org/{id}"),
            source_type: SourceType::News,
            publisher: "Example Desk".into(),
            published_date: chrono::NaiveDate::from_ymd_opt(2024, 6, 1),
            retrieved_at: ts(0),
            credibility,
            content_hash: format!("hash-{id}"),
        }
    }

    fn claim(id: &str, text: &str) -> Claim {
        Claim {
            id: ClaimId::new(id),
            text: text.into(),
            section_ref: None,
            confidence: 0.0,
        }
    }

    fn populated_graph() -> ProvenanceGraph {
        let mut g = ProvenanceGraph::new();
        g.record_source(&source("src-1", 0.55), ts(1)).unwrap();
        g.record_source(&source("src-2", 0.75), ts(2)).unwrap();
        g.record_claim(&claim("clm-1", "Allowances settled at 83.5."), ts(3))
            .unwrap();
        g.record_claim(&claim("clm-2", "Allowances settled at 91.0."), ts(4))
            .unwrap();
        let cit = Citation::new(ClaimId::new("clm-1"), SourceId::new("src-1"), "paragraph 1");
        g.attach_citation(&cit, ts(5)).unwrap();
        let doc = ParsedDocument {
            source_id: SourceId::new("src-1"),
            title: "Market wrap".into(),
            body: vec!["Allowances settled at 83.5 on Friday.".into()],
            tables: Vec::new(),
            jurisdiction_tags: Vec::new(),
            language: "en".into(),
        };
        let outcome = verify_citation(&cit, &claim("clm-1", "Allowances settled at 83.5."), &doc, &source("src-1", 0.55)).unwrap();
        assert!(outcome.passed());
        g.record_verification(&cit, &outcome, ts(6)).unwrap();
        g.rewrite_claim(&ClaimId::new("clm-2"), "Allowances settled near 91.0.", ts(7))
            .unwrap();
        let quantified = [
            QuantifiedClaim {
                claim_id: ClaimId::new("clm-1"),
                key: ConflictKey::new("EUA", "settlement", "2024-06"),
                value: 83.5,
            },
            QuantifiedClaim {
                claim_id: ClaimId::new("clm-2"),
                key: ConflictKey::new("EUA", "settlement", "2024-06"),
                value: 91.0,
            },
        ];
        let found = detect_conflicts(&quantified, 0.05);
        assert_eq!(found.len(), 1);
        g.record_conflict(&found[0], ts(8)).unwrap();
        let resolution = crate::provenance::conflicts::resolve_conflict(
            &found[0],
            &source("src-1", 0.55),
            &source("src-2", 0.75),
        );
        assert_eq!(resolution, ConflictStatus::Resolved(ClaimId::new("clm-2")));
        g.record_resolution(&found[0], &resolution, ts(9)).unwrap();
        g
    }

    #[test]
    fn attach_after_create_leaves_edge_present() {
        let g = populated_graph();
        let edges = g.citations_for(&ClaimId::new("clm-1"));
        assert_eq!(edges.len(), 1);
        assert_eq!(edges[0].locator, "paragraph 1");
        assert_eq!(edges[0].verified, VerificationState::Verified);
        assert_eq!(edges[0].protocol_id.as_deref(), Some("news.v1"));
    }

    #[test]
    fn dangling_citation_is_rejected() {
        let mut g = ProvenanceGraph::new();
        g.record_source(&source("src-1", 0.5), ts(1)).unwrap();
        let cit = Citation::new(ClaimId::new("clm-9"), SourceId::new("src-1"), "paragraph 1");
        let err = g.attach_citation(&cit, ts(2)).unwrap_err();
        assert!(matches!(
            err,
            ProvenanceError::DanglingReference { kind: "claim", .. }
        ));
        // Failed records must not advance the log.
        assert_eq!(g.next_sequence(), 2);
    }

    #[test]
    fn sequence_gaps_are_rejected() {
        let mut g = ProvenanceGraph::new();
        let event = ProvenanceEvent::source_registered(3, ts(0), &source("src-1", 0.5));
        let err = g.record(event).unwrap_err();
        assert!(matches!(
            err,
            ProvenanceError::SequenceGap { expected: 1, got: 3 }
        ));
    }

    #[test]
    fn verified_status_requires_verification_event() {
        let mut g = ProvenanceGraph::new();
        g.record_source(&source("src-1", 0.5), ts(1)).unwrap();
        g.record_claim(&claim("clm-1", "text"), ts(2)).unwrap();
        let cit = Citation::new(ClaimId::new("clm-1"), SourceId::new("src-1"), "paragraph 1");
        g.attach_citation(&cit, ts(3)).unwrap();
        assert!(!g.has_verified_citation(&ClaimId::new("clm-1")));
        let outcome = VerificationOutcome {
            protocol_id: "news.v1".into(),
            verified: VerificationState::Failed,
            reason: "locator unresolved".into(),
        };
        g.record_verification(&cit, &outcome, ts(4)).unwrap();
        assert!(!g.has_verified_citation(&ClaimId::new("clm-1")));
        // Re-verification after a rewrite may flip the edge.
        let pass = VerificationOutcome {
            protocol_id: "news.v1".into(),
            verified: VerificationState::Verified,
            reason: "paragraph 1 shares quantity 83.5 with the claim".into(),
        };
        g.record_verification(&cit, &pass, ts(5)).unwrap();
        assert!(g.has_verified_citation(&ClaimId::new("clm-1")));
    }

    #[test]
    fn replayed_log_rebuilds_identical_state() {
        let g = populated_graph();
        let log = g.export_log().unwrap();
        let replayed = ProvenanceGraph::import_log(&log).unwrap();
        assert_eq!(replayed.state_digest(), g.state_digest());
        assert_eq!(replayed.head_digest(), g.head_digest());
        assert_eq!(replayed.events(), g.events());
        assert_eq!(replayed.export_log().unwrap(), log);
    }

    #[test]
    fn single_event_mutation_breaks_the_chain() {
        let g = populated_graph();
        let log = g.export_log().unwrap();
        // Tamper with the recorded value inside the conflict event.
        let tampered = log.replace("\"value_b\":91.0", "\"value_b\":84.0");
        assert_ne!(tampered, log);
        let err = ProvenanceGraph::import_log(&tampered).unwrap_err();
        assert!(matches!(err, ProvenanceError::ChainMismatch { .. }), "{err}");

        // Tampering with a digest field alone is equally detectable.
        let first_digest_start = log.find("{\"digest\":\"").unwrap() + "{\"digest\":\"".len();
        let mut chars: Vec<char> = log.chars().collect();
        chars[first_digest_start] = if chars[first_digest_start] == '0' { '1' } else { '0' };
        let tampered: String = chars.into_iter().collect();
        let err = ProvenanceGraph::import_log(&tampered).unwrap_err();
        assert!(matches!(err, ProvenanceError::ChainMismatch { .. }), "{err}");
    }

    #[test]
    fn resolution_updates_status_and_requires_open_conflict() {
        let g = populated_graph();
        let conflicts: Vec<_> = g.conflicts().collect();
        assert_eq!(conflicts.len(), 1);
        assert_eq!(
            conflicts[0].status,
            ConflictStatus::Resolved(ClaimId::new("clm-2"))
        );
        assert!(g.unresolved_conflicts().is_empty());

        let mut g = populated_graph();
        let conflict = g.conflicts().next().unwrap().clone();
        let err = g
            .record_resolution(&conflict, &ConflictStatus::Unresolved, ts(20))
            .unwrap_err();
        assert!(matches!(err, ProvenanceError::Duplicate { .. }));
    }

    #[test]
    fn duplicate_creations_are_rejected() {
        let mut g = ProvenanceGraph::new();
        g.record_source(&source("src-1", 0.5), ts(1)).unwrap();
        let err = g.record_source(&source("src-1", 0.5), ts(2)).unwrap_err();
        assert!(matches!(err, ProvenanceError::Duplicate { kind: "source", .. }));
        g.record_claim(&claim("clm-1", "text"), ts(3)).unwrap();
        let err = g.record_claim(&claim("clm-1", "text"), ts(4)).unwrap_err();
        assert!(matches!(err, ProvenanceError::Duplicate { kind: "claim", .. }));
    }

    fn report_with_claims(ids: &[&str]) -> ReportArtifact {
        ReportArtifact {
            title: "Report".into(),
            audience: crate::core::Audience::General,
            language: "en".into(),
            sections: vec![Section {
                heading: "Findings".into(),
                body: "Body.".into(),
                claims: ids
                    .iter()
                    .map(|id| ClaimRef {
                        claim: claim(id, "text"),
                        sources: vec![SourceId::new("src-1")],
                    })
                    .collect(),
                chart_refs: Vec::new(),
            }],
            bibliography: Vec::new(),
        }
    }

    #[test]
    fn coverage_counts_verified_citations_only() {
        let mut g = ProvenanceGraph::new();
        g.record_source(&source("src-1", 0.5), ts(1)).unwrap();
        for (i, id) in ["c1", "c2", "c3", "c4"].iter().enumerate() {
            g.record_claim(&claim(id, "text 5"), ts(2 + i as i64)).unwrap();
        }
        for (i, id) in ["c1", "c2", "c3"].iter().enumerate() {
            let cit = Citation::new(ClaimId::new(*id), SourceId::new("src-1"), "paragraph 1");
            g.attach_citation(&cit, ts(10 + i as i64)).unwrap();
            let outcome = VerificationOutcome {
                protocol_id: "news.v1".into(),
                verified: VerificationState::Verified,
                reason: "ok".into(),
            };
            g.record_verification(&cit, &outcome, ts(20 + i as i64)).unwrap();
        }
        let report = report_with_claims(&["c1", "c2", "c3", "c4"]);
        let (uncited, ratio) = coverage(&report, &g);
        assert_eq!(uncited, vec![ClaimId::new("c4")]);
        assert!((ratio - 0.75).abs() < 1e-12);

        let empty = report_with_claims(&[]);
        let (uncited, ratio) = coverage(&empty, &g);
        assert!(uncited.is_empty());
        assert_eq!(ratio, 1.0);
    }
}
