//! Numeric-style bibliography formatting.
//!
//! Template: "[N] Publisher. Title. Date. Origin." Missing fields drop
//! out together with their trailing period; the origin is always present.
//! Indices follow first-citation order in the report.

use std::collections::BTreeSet;

use crate::core::{ReportArtifact, SourceId, SourceRecord};

/// Render one bibliography line. `title` comes from the parsed document
/// (source records identify bytes, not display titles); pass `None` for
/// sources whose documents have no usable title.
pub fn format_citation(record: &SourceRecord, title: Option<&str>, index: usize) -> String {
    let mut out = format!("[{index}]");
    let mut segment = |text: &str| {
        out.push(' ');
        out.push_str(text);
        out.push('.');
    };
    if !record.publisher.is_empty() {
        segment(&record.publisher);
    }
    if let Some(title) = title
        && !title.is_empty()
    {
        segment(title);
    }
    if let Some(date) = record.published_date {
        segment(&date.format("%Y-%m-%d").to_string());
    }
    segment(&record.origin);
    out
}

/// Source ids in the order their first citation appears when reading the
/// report top to bottom. This is the bibliography numbering order.
pub fn first_citation_order(report: &ReportArtifact) -> Vec<SourceId> {
    let mut seen = BTreeSet::new();
    let mut order = Vec::new();
    for claim_ref in report.claims() {
        for source in &claim_ref.sources {
            if seen.insert(source.clone()) {
                order.push(source.clone());
            }
        }
    }
    order
}
