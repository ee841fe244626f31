//! Review stage: verify every citation, score per-claim confidence, detect
//! and resolve numeric conflicts, inject caveats for unresolved ones, and
//! apply the quality gate.
//!
//! The reviewer is pure local logic over the provenance graph and parsed
//! documents; it makes no model calls. Re-running it is safe: verification
//! events append (latest wins), already-recorded conflicts are skipped, and
//! caveat injection checks for the sentence before appending it.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::core::{ClaimId, ParsedDocument, ReportArtifact, SourceId, Stage};
use crate::pipeline::stage::{PipelineError, StageServices, fmt_f64};
use crate::pipeline::thresholds::{GateMetrics, QualityThresholds, quality_gate};
use crate::provenance::{
    Conflict, ConflictKey, ConflictStatus, ProvenanceGraph, QuantifiedClaim, VerificationOutcome,
    coverage, detect_conflicts, protocol_id, resolve_conflict, verify_citation,
};
use crate::semantic::text::extract_numbers;

/// What the review concluded, independent of how the pipeline reacts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReviewOutcome {
    pub passed: bool,
    /// Human-readable gate gaps; empty when passed.
    pub gaps: Vec<String>,
    pub metrics: GateMetrics,
    pub verified_citations: usize,
    pub failed_citations: usize,
    /// Caveat sentences injected for unresolved conflicts.
    pub caveats: Vec<String>,
}

/// Per-claim confidence: the best credibility among sources whose citation
/// verified, zero when nothing verified or nothing is cited.
fn claim_confidence(verified_credibilities: &[f64]) -> f64 {
    verified_credibilities.iter().copied().fold(0.0, f64::max)
}

fn first_source_record(
    graph: &ProvenanceGraph,
    claim: &ClaimId,
) -> Option<crate::core::SourceRecord> {
    let citation = graph.citations_for(claim).into_iter().next()?;
    graph.source(&citation.source_id).cloned()
}

/// Reviews the draft in place: sets claim confidences, injects caveat
/// sentences, and returns the gate verdict with its metrics.
pub fn run_reviewer(
    draft: &mut ReportArtifact,
    conflict_keys: &BTreeMap<ClaimId, ConflictKey>,
    docs: &BTreeMap<SourceId, ParsedDocument>,
    graph: &mut ProvenanceGraph,
    thresholds: &QualityThresholds,
    conflict_threshold: f64,
    services: &StageServices,
) -> Result<ReviewOutcome, PipelineError> {
    const STAGE: Stage = Stage::Review;
    thresholds
        .validate()
        .map_err(|detail| PipelineError::stage(STAGE, detail))?;

    let mut verified_citations = 0usize;
    let mut failed_citations = 0usize;
    let mut uncited_ids: Vec<ClaimId> = Vec::new();
    let claim_ids: Vec<ClaimId> = draft.claims().map(|c| c.claim.id.clone()).collect();
    for id in &claim_ids {
        let claim = draft
            .find_claim(id)
            .expect("id came from this artifact")
            .claim
            .clone();
        let citations = graph.citations_for(id);
        if citations.is_empty() {
            uncited_ids.push(id.clone());
            draft.set_confidence(id, 0.0);
            continue;
        }
        let mut credibilities = Vec::new();
        for citation in citations {
            let record = graph
                .source(&citation.source_id)
                .cloned()
                .ok_or_else(|| {
                    PipelineError::stage(
                        STAGE,
                        format!("citation references unregistered source {}", citation.source_id),
                    )
                })?;
            let outcome = match docs.get(&citation.source_id) {
                Some(doc) => verify_citation(&citation, &claim, doc, &record)
                    .map_err(|e| PipelineError::stage(STAGE, e.to_string()))?,
                None => VerificationOutcome {
                    protocol_id: protocol_id(record.source_type),
                    verified: crate::core::VerificationState::Failed,
                    reason: "no parsed document available for the cited source".into(),
                },
            };
            graph.record_verification(&citation, &outcome, services.clock.now())?;
            if outcome.passed() {
                verified_citations += 1;
                credibilities.push(record.credibility);
            } else {
                failed_citations += 1;
            }
        }
        draft.set_confidence(id, claim_confidence(&credibilities));
    }

    // Conflict detection over the claims that carry a quantity key, using the
    // graph's current (possibly reworded) text.
    let quantified: Vec<QuantifiedClaim> = conflict_keys
        .iter()
        .filter_map(|(id, key)| {
            let text = graph.claim_text(id)?;
            let value = extract_numbers(text).first().copied()?;
            Some(QuantifiedClaim {
                claim_id: id.clone(),
                key: key.clone(),
                value,
            })
        })
        .collect();
    let already: BTreeSet<((ClaimId, ClaimId), ConflictKey)> = graph
        .conflicts()
        .map(|c| (c.claims.clone(), c.key.clone()))
        .collect();
    for conflict in detect_conflicts(&quantified, conflict_threshold) {
        if already.contains(&(conflict.claims.clone(), conflict.key.clone())) {
            continue;
        }
        let record_a = first_source_record(graph, &conflict.claims.0);
        let record_b = first_source_record(graph, &conflict.claims.1);
        graph.record_conflict(&conflict, services.clock.now())?;
        let resolution = match (record_a, record_b) {
            (Some(a), Some(b)) => resolve_conflict(&conflict, &a, &b),
            _ => ConflictStatus::Unresolved,
        };
        graph.record_resolution(&conflict, &resolution, services.clock.now())?;
    }

    let unresolved: Vec<Conflict> = graph
        .unresolved_conflicts()
        .into_iter()
        .cloned()
        .collect();
    let mut caveats = Vec::new();
    for conflict in &unresolved {
        let sentence = format!(
            "Caveat: sources disagree on {} for {} ({}): {} vs {}.",
            conflict.key.metric,
            conflict.key.entity,
            conflict.key.period,
            fmt_f64(conflict.values.0),
            fmt_f64(conflict.values.1),
        );
        let target = draft
            .sections
            .iter()
            .position(|s| {
                s.claims
                    .iter()
                    .any(|c| c.claim.id == conflict.claims.0 || c.claim.id == conflict.claims.1)
            })
            .unwrap_or(0);
        if let Some(section) = draft.sections.get_mut(target)
            && !section.body.contains(&sentence)
        {
            if !section.body.is_empty() {
                section.body.push(' ');
            }
            section.body.push_str(&sentence);
        }
        caveats.push(sentence);
    }

    let (unverified_ids, coverage_ratio) = coverage(draft, graph);
    let mean_confidence = if claim_ids.is_empty() {
        1.0
    } else {
        draft.claims().map(|c| c.claim.confidence).sum::<f64>() / claim_ids.len() as f64
    };
    let metrics = GateMetrics {
        coverage: coverage_ratio,
        unresolved_conflicts: unresolved.len(),
        uncited_claims: uncited_ids.len(),
        mean_confidence,
    };
    let (passed, mut gaps) = match quality_gate(&metrics, thresholds) {
        Ok(()) => (true, Vec::new()),
        Err(gaps) => (false, gaps),
    };
    if !passed && !unverified_ids.is_empty() {
        let ids: Vec<&str> = unverified_ids.iter().map(|id| id.as_str()).collect();
        gaps.push(format!(
            "claims lacking a verified citation: {}",
            ids.join(", ")
        ));
    }
    if !passed && !uncited_ids.is_empty() {
        let ids: Vec<&str> = uncited_ids.iter().map(|id| id.as_str()).collect();
        gaps.push(format!("uncited claim ids: {}", ids.join(", ")));
    }
    Ok(ReviewOutcome {
        passed,
        gaps,
        metrics,
        verified_citations,
        failed_citations,
        caveats,
    })
}
