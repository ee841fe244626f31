//! Conflict detection and the resolution cascade.
//!
//! Two claims conflict when they quantify the same (entity, metric,
//! period) key and their values differ by more than a relative threshold.
//! Resolution is a total, deterministic cascade: source credibility, then
//! publication recency, then unresolved (both claims get flagged).

use serde::{Deserialize, Serialize};

use crate::core::{ClaimId, SourceRecord};

/// Default relative-difference threshold. Overridable through config.
pub const DEFAULT_CONFLICT_THRESHOLD: f64 = 0.05;

/// What two conflicting claims are both talking about.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ConflictKey {
    pub entity: String,
    pub metric: String,
    pub period: String,
}

impl ConflictKey {
    pub fn new(
        entity: impl Into<String>,
        metric: impl Into<String>,
        period: impl Into<String>,
    ) -> Self {
        Self {
            entity: entity.into(),
            metric: metric.into(),
            period: period.into(),
        }
    }
}

/// A claim reduced to the numeric assertion it makes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantifiedClaim {
    pub claim_id: ClaimId,
    pub key: ConflictKey,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "status", content = "winner")]
pub enum ConflictStatus {
    Open,
    Resolved(ClaimId),
    Unresolved,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Conflict {
    pub claims: (ClaimId, ClaimId),
    pub key: ConflictKey,
    pub values: (f64, f64),
    pub relative_difference: f64,
    pub status: ConflictStatus,
}

/// |a-b| / max(|a|, |b|); equal values (including both zero) are 0.
pub fn relative_difference(a: f64, b: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    (a - b).abs() / a.abs().max(b.abs())
}

/// Every pair sharing a key whose values differ by more than `threshold`,
/// in input-pair order.
pub fn detect_conflicts(claims: &[QuantifiedClaim], threshold: f64) -> Vec<Conflict> {
    let mut out = Vec::new();
    for (i, a) in claims.iter().enumerate() {
        for b in &claims[i + 1..] {
            if a.key != b.key {
                continue;
            }
            let rel = relative_difference(a.value, b.value);
            if rel > threshold {
                out.push(Conflict {
                    claims: (a.claim_id.clone(), b.claim_id.clone()),
                    key: a.key.clone(),
                    values: (a.value, b.value),
                    relative_difference: rel,
                    status: ConflictStatus::Open,
                });
            }
        }
    }
    out
}

/// Resolution cascade. `source_a` backs the first claim of the pair,
/// `source_b` the second. A dated source beats an undated one on the
/// recency tier; two undated or identically dated sources of equal
/// credibility stay unresolved.
pub fn resolve_conflict(
    conflict: &Conflict,
    source_a: &SourceRecord,
    source_b: &SourceRecord,
) -> ConflictStatus {
    let (a, b) = &conflict.claims;
    if source_a.credibility > source_b.credibility {
        return ConflictStatus::Resolved(a.clone());
    }
    if source_b.credibility > source_a.credibility {
        return ConflictStatus::Resolved(b.clone());
    }
    match (source_a.published_date, source_b.published_date) {
        (Some(da), Some(db)) if da > db => ConflictStatus::Resolved(a.clone()),
        (Some(da), Some(db)) if db > da => ConflictStatus::Resolved(b.clone()),
        (Some(_), None) => ConflictStatus::Resolved(a.clone()),
        (None, Some(_)) => ConflictStatus::Resolved(b.clone()),
        _ => ConflictStatus::Unresolved,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::{SourceId, SourceType, Timestamp};
    use chrono::NaiveDate;

    fn qc(id: &str, value: f64) -> QuantifiedClaim {
        QuantifiedClaim {
            claim_id: ClaimId::new(id),
            key: ConflictKey::new("EU ETS", "price", "2024"),
            value,
        }
    }

    fn source(id: &str, credibility: f64, published: Option<(i32, u32, u32)>) -> SourceRecord {
        SourceRecord {
            id: SourceId::new(id),
            origin: format!("https://example.org/{id}"),
            source_type: SourceType::News,
            publisher: String::new(),
            published_date: published.and_then(|(y, m, d)| NaiveDate::from_ymd_opt(y, m, d)),
            retrieved_at: Timestamp::parse("2025-01-01T00:00:00Z").unwrap(),
            credibility,
            content_hash: id.into(),
        }
    }

    #[test]
    fn equal_values_do_not_conflict() {
        assert!(detect_conflicts(&[qc("c1", 100.0), qc("c2", 100.0)], 0.05).is_empty());
    }

    #[test]
    fn ten_percent_apart_conflicts() {
        let found = detect_conflicts(&[qc("c1", 100.0), qc("c2", 110.0)], 0.05);
        assert_eq!(found.len(), 1);
        let rel = found[0].relative_difference;
        assert!((rel - 10.0 / 110.0).abs() < 1e-12, "rel {rel}");
        assert!(rel > 0.05);
        assert_eq!(found[0].status, ConflictStatus::Open);
    }

    #[test]
    fn four_percent_apart_does_not_conflict() {
        let found = detect_conflicts(&[qc("c1", 100.0), qc("c2", 104.0)], 0.05);
        assert!(found.is_empty(), "rel {} should be under threshold", 4.0 / 104.0);
    }

    #[test]
    fn different_keys_never_pair() {
        let mut other = qc("c2", 200.0);
        other.key.period = "2023".into();
        assert!(detect_conflicts(&[qc("c1", 100.0), other], 0.05).is_empty());
    }

    #[test]
    fn higher_credibility_wins() {
        let found = detect_conflicts(&[qc("c1", 100.0), qc("c2", 110.0)], 0.05);
        let status = resolve_conflict(
            &found[0],
            &source("s1", 0.90, None),
            &source("s2", 0.50, None),
        );
        assert_eq!(status, ConflictStatus::Resolved(ClaimId::new("c1")));
    }

    #[test]
    fn recency_breaks_credibility_ties() {
        let found = detect_conflicts(&[qc("c1", 100.0), qc("c2", 110.0)], 0.05);
        let status = resolve_conflict(
            &found[0],
            &source("s1", 0.75, Some((2023, 1, 1))),
            &source("s2", 0.75, Some((2024, 6, 1))),
        );
        assert_eq!(status, ConflictStatus::Resolved(ClaimId::new("c2")));
    }

    #[test]
    fn dated_source_beats_undated_on_recency_tier() {
        let found = detect_conflicts(&[qc("c1", 100.0), qc("c2", 110.0)], 0.05);
        let status = resolve_conflict(
            &found[0],
            &source("s1", 0.75, None),
            &source("s2", 0.75, Some((2020, 1, 1))),
        );
        assert_eq!(status, ConflictStatus::Resolved(ClaimId::new("c2")));
    }

    #[test]
    fn full_tie_stays_unresolved() {
        let found = detect_conflicts(&[qc("c1", 100.0), qc("c2", 110.0)], 0.05);
        let status = resolve_conflict(
            &found[0],
            &source("s1", 0.75, Some((2024, 6, 1))),
            &source("s2", 0.75, Some((2024, 6, 1))),
        );
        assert_eq!(status, ConflictStatus::Unresolved);
        let both_undated = resolve_conflict(
            &found[0],
            &source("s1", 0.75, None),
            &source("s2", 0.75, None),
        );
        assert_eq!(both_undated, ConflictStatus::Unresolved);
    }

    #[test]
    fn zero_values_have_zero_difference() {
        assert_eq!(relative_difference(0.0, 0.0), 0.0);
        assert_eq!(relative_difference(-3.0, -3.0), 0.0);
        assert!((relative_difference(0.0, 5.0) - 1.0).abs() < 1e-12);
    }
}
