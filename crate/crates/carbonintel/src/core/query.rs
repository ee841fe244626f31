use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Audience {
    Policymaker,
    Investor,
    SustainabilityAnalyst,
    General,
}

impl Audience {
    pub fn parse(text: &str) -> Option<Self> {
        match text {
            "policymaker" => Some(Audience::Policymaker),
            "investor" => Some(Audience::Investor),
            "sustainability_analyst" => Some(Audience::SustainabilityAnalyst),
            "general" => Some(Audience::General),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Audience::Policymaker => "policymaker",
            Audience::Investor => "investor",
            Audience::SustainabilityAnalyst => "sustainability_analyst",
            Audience::General => "general",
        }
    }
}

/// Raw, user-supplied query fields before validation.
#[derive(Debug, Clone, Default)]
pub struct RawQuery {
    pub topic: String,
    pub date_range: Option<(NaiveDate, NaiveDate)>,
    pub jurisdictions: Vec<String>,
    pub audience: Option<Audience>,
    pub target_languages: Vec<String>,
    pub user_corpus: Option<PathBuf>,
}

/// A validated, normalized research query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResearchQuery {
    pub topic: String,
    pub date_range: Option<(NaiveDate, NaiveDate)>,
    pub jurisdictions: Vec<String>,
    pub audience: Audience,
    pub target_languages: Vec<String>,
    pub user_corpus: Option<PathBuf>,
}

impl ResearchQuery {
    /// The report's primary language (first target language).
    pub fn primary_language(&self) -> &str {
        &self.target_languages[0]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QueryViolation {
    #[error("empty topic")]
    EmptyTopic,
    #[error("date range start {0} after end {1}")]
    StartAfterEnd(NaiveDate, NaiveDate),
    #[error("empty target language list")]
    EmptyLanguages,
}

/// Normalize and validate raw query fields, reporting every violation at
/// once rather than stopping at the first.
pub fn validate_query(raw: &RawQuery) -> Result<ResearchQuery, Vec<QueryViolation>> {
    let mut violations = Vec::new();

    let topic = raw.topic.trim().to_owned();
    if topic.is_empty() {
        violations.push(QueryViolation::EmptyTopic);
    }

    if let Some((start, end)) = raw.date_range {
        if start > end {
            violations.push(QueryViolation::StartAfterEnd(start, end));
        }
    }

    let languages = dedup_preserving_order(
        raw.target_languages
            .iter()
            .map(|l| l.trim().to_lowercase())
            .filter(|l| !l.is_empty()),
    );
    if languages.is_empty() {
        violations.push(QueryViolation::EmptyLanguages);
    }

    let jurisdictions = dedup_preserving_order(
        raw.jurisdictions
            .iter()
            .map(|j| j.trim().to_owned())
            .filter(|j| !j.is_empty()),
    );

    if !violations.is_empty() {
        return Err(violations);
    }

    Ok(ResearchQuery {
        topic,
        date_range: raw.date_range,
        jurisdictions,
        audience: raw.audience.unwrap_or(Audience::General),
        target_languages: languages,
        user_corpus: raw.user_corpus.clone(),
    })
}

fn dedup_preserving_order(items: impl Iterator<Item = String>) -> Vec<String> {
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    for item in items {
        if seen.insert(item.clone()) {
            out.push(item);
        }
    }
    out
}
