use crate::core::{ParsedDocument, SourceRecord, SourceType};
use chrono::NaiveDate;

/// Keep (document, record) pairs whose published_date lies inside the
/// inclusive range; undated records are excluded. Input order preserved.
pub fn filter_by_date(
    docs: Vec<(ParsedDocument, SourceRecord)>,
    range: (NaiveDate, NaiveDate),
) -> Vec<(ParsedDocument, SourceRecord)> {
    let (start, end) = range;
    docs.into_iter()
        .filter(|(_, record)| match record.published_date {
            Some(date) => start <= date && date <= end,
            None => false,
        })
        .collect()
}

/// Credibility = base(source_type) + 0.05 recency bonus, capped at 1.0.
/// The bonus applies when published_date falls within the 365 days before
/// retrieved_at; undated or future-dated records get no bonus. Computed in
/// integer hundredths so equal scores compare exactly.
pub fn score_credibility(record: &SourceRecord) -> f64 {
    let base: u32 = match record.source_type {
        SourceType::Regulatory => 90,
        SourceType::Academic => 85,
        SourceType::MarketData => 75,
        SourceType::Industry => 70,
        SourceType::UserProvided => 60,
        SourceType::News => 50,
    };
    let bonus: u32 = match record.published_date {
        Some(published) => {
            let age_days = (record.retrieved_at.date() - published).num_days();
            if (0..=365).contains(&age_days) { 5 } else { 0 }
        }
        None => 0,
    };
    (base + bonus).min(100) as f64 / 100.0
}

/// Remove exact duplicates (same content hash, first wins) and collapse
/// near-duplicates (same case/whitespace-normalized title) to the member
/// with highest credibility, ties broken by earliest retrieved_at then by
/// input position. Survivor order is stable.
pub fn deduplicate(
    docs: Vec<(ParsedDocument, SourceRecord)>,
) -> Vec<(ParsedDocument, SourceRecord)> {
    let mut seen_hashes = std::collections::HashSet::new();
    let exact: Vec<(ParsedDocument, SourceRecord)> = docs
        .into_iter()
        .filter(|(_, record)| seen_hashes.insert(record.content_hash.clone()))
        .collect();

    // Pick one winner index per normalized title; untitled docs never collapse.
    let mut winner_for_title: std::collections::HashMap<String, usize> =
        std::collections::HashMap::new();
    for (idx, (doc, record)) in exact.iter().enumerate() {
        let key = normalize_title(&doc.title);
        if key.is_empty() {
            continue;
        }
        match winner_for_title.get(&key) {
            None => {
                winner_for_title.insert(key, idx);
            }
            Some(&prev) => {
                let (_, prev_record) = &exact[prev];
                let better = record.credibility > prev_record.credibility
                    || (record.credibility == prev_record.credibility
                        && record.retrieved_at < prev_record.retrieved_at);
                if better {
                    winner_for_title.insert(key, idx);
                }
            }
        }
    }

    exact
        .into_iter()
        .enumerate()
        .filter(|(idx, (doc, _))| {
            let key = normalize_title(&doc.title);
            key.is_empty() || winner_for_title.get(&key) == Some(idx)
        })
        .map(|(_, pair)| pair)
        .collect()
}

fn normalize_title(title: &str) -> String {
    title
        .split_whitespace()
        .map(|w| w.to_lowercase())
        .collect::<Vec<_>>()
        .join(" ")
}
