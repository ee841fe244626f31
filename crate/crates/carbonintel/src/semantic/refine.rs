use crate::core::ResearchQuery;
use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

pub const MAX_APPENDED_TERMS: usize = 5;

/// Coverage gaps reported by the researcher after a retrieval round.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CoverageGaps {
    pub missing_jurisdictions: Vec<String>,
    /// Uncovered topic terms with weights (corpus TF-IDF mass).
    pub uncovered_terms: Vec<(String, f64)>,
    pub empty_date_slices: Vec<(NaiveDate, NaiveDate)>,
}

impl CoverageGaps {
    pub fn is_empty(&self) -> bool {
        self.missing_jurisdictions.is_empty()
            && self.uncovered_terms.is_empty()
            && self.empty_date_slices.is_empty()
    }
}

/// Append missing jurisdictions and up to five highest-weight uncovered
/// terms (weight desc, term asc on ties) to the query. User constraints are
/// never removed; empty gaps return the query unchanged.
pub fn refine_query(query: &ResearchQuery, gaps: &CoverageGaps) -> ResearchQuery {
    let mut refined = query.clone();
    if gaps.is_empty() {
        return refined;
    }
    for jurisdiction in &gaps.missing_jurisdictions {
        if !refined.jurisdictions.contains(jurisdiction) {
            refined.jurisdictions.push(jurisdiction.clone());
        }
    }
    let mut terms = gaps.uncovered_terms.clone();
    terms.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(&b.0)));
    for (term, _) in terms.iter().take(MAX_APPENDED_TERMS) {
        let already = refined
            .topic
            .split_whitespace()
            .any(|w| w.eq_ignore_ascii_case(term));
        if !already {
            refined.topic.push(' ');
            refined.topic.push_str(term);
        }
    }
    refined
}
