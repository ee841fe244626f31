use chrono::{DateTime, NaiveDate, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CoreError {
    #[error("credibility {0} outside [0,1]")]
    CredibilityOutOfRange(f64),
    #[error("confidence {0} outside [0,1]")]
    ConfidenceOutOfRange(f64),
    #[error("table not rectangular: row {row} has {got} cells, expected {expected}")]
    NonRectangularTable {
        row: usize,
        got: usize,
        expected: usize,
    },
    #[error("document body contains an empty paragraph at index {0}")]
    EmptyParagraph(usize),
    #[error("{0} must not be empty")]
    EmptyField(&'static str),
    #[error("claim {0} appears more than once")]
    DuplicateClaim(ClaimId),
}

/// Second-resolution UTC timestamp with a fixed RFC 3339 encoding
/// (`2025-01-01T00:00:00Z`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Timestamp(DateTime<Utc>);

impl Timestamp {
    pub fn from_datetime(dt: DateTime<Utc>) -> Self {
        Self(dt.with_nanosecond_zeroed())
    }

    pub fn parse(text: &str) -> Result<Self, chrono::ParseError> {
        Ok(Self::from_datetime(
            DateTime::parse_from_rfc3339(text)?.with_timezone(&Utc),
        ))
    }

    pub fn date(&self) -> NaiveDate {
        self.0.date_naive()
    }

    pub fn inner(&self) -> DateTime<Utc> {
        self.0
    }

    pub fn seconds_since(&self, earlier: &Timestamp) -> i64 {
        (self.0 - earlier.0).num_seconds()
    }

    pub fn plus_seconds(&self, seconds: i64) -> Self {
        Self(self.0 + chrono::Duration::seconds(seconds))
    }
}

trait ZeroNanos {
    fn with_nanosecond_zeroed(self) -> Self;
}

impl ZeroNanos for DateTime<Utc> {
    fn with_nanosecond_zeroed(self) -> Self {
        use chrono::Timelike;
        self.with_nanosecond(0).expect("0 ns is always valid")
    }
}

impl std::fmt::Display for Timestamp {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0.to_rfc3339_opts(SecondsFormat::Secs, true))
    }
}

impl Serialize for Timestamp {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Timestamp {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        Timestamp::parse(&text).map_err(serde::de::Error::custom)
    }
}

macro_rules! id_newtype {
    ($name:ident) => {
        #[derive(
            Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default,
        )]
        #[serde(transparent)]
        pub struct $name(pub String);

        impl $name {
            pub fn new(id: impl Into<String>) -> Self {
                Self(id.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl std::fmt::Display for $name {
            fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                Self(s.to_owned())
            }
        }
    };
}

id_newtype!(SourceId);
id_newtype!(ClaimId);
id_newtype!(RunId);

/// The six source classes. Closed set; every source record carries
/// exactly one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceType {
    Regulatory,
    Academic,
    Industry,
    MarketData,
    News,
    UserProvided,
}

impl SourceType {
    pub const ALL: [SourceType; 6] = [
        SourceType::Regulatory,
        SourceType::Academic,
        SourceType::Industry,
        SourceType::MarketData,
        SourceType::News,
        SourceType::UserProvided,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            SourceType::Regulatory => "regulatory",
            SourceType::Academic => "academic",
            SourceType::Industry => "industry",
            SourceType::MarketData => "market_data",
            SourceType::News => "news",
            SourceType::UserProvided => "user_provided",
        }
    }

    pub fn parse(text: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|t| t.as_str() == text)
    }
}

impl std::fmt::Display for SourceType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A validated, credibility-scored registration of one raw document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceRecord {
    pub id: SourceId,
    pub origin: String,
    pub source_type: SourceType,
    pub publisher: String,
    pub published_date: Option<NaiveDate>,
    pub retrieved_at: Timestamp,
    pub credibility: f64,
    pub content_hash: String,
}

impl SourceRecord {
    pub fn validate(&self) -> Result<(), CoreError> {
        if !(0.0..=1.0).contains(&self.credibility) {
            return Err(CoreError::CredibilityOutOfRange(self.credibility));
        }
        Ok(())
    }
}

/// One typed table cell. Numbers keep IEEE double identity through the
/// canonical encoding; dates are ISO calendar dates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Cell {
    Text(String),
    Number(f64),
    Date(NaiveDate),
}

impl Cell {
    pub fn as_number(&self) -> Option<f64> {
        match self {
            Cell::Number(n) => Some(*n),
            _ => None,
        }
    }

    pub fn display_text(&self) -> String {
        match self {
            Cell::Text(t) => t.clone(),
            Cell::Number(n) => {
                let mut s = String::new();
                // serde_json's shortest-round-trip formatting, minus the quotes
                s.push_str(&serde_json::Number::from_f64(*n).map_or_else(
                    || n.to_string(),
                    |x| x.to_string(),
                ));
                s
            }
            Cell::Date(d) => d.format("%Y-%m-%d").to_string(),
        }
    }
}

/// Rectangular table: one header row plus typed data rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn validate(&self) -> Result<(), CoreError> {
        let expected = self.headers.len();
        for (i, row) in self.rows.iter().enumerate() {
            if row.len() != expected {
                return Err(CoreError::NonRectangularTable {
                    row: i + 1,
                    got: row.len(),
                    expected,
                });
            }
        }
        Ok(())
    }

    /// 1-based lookup over data rows (the header row is not addressable).
    pub fn cell(&self, row: usize, col: usize) -> Option<&Cell> {
        if row == 0 || col == 0 {
            return None;
        }
        self.rows.get(row - 1).and_then(|r| r.get(col - 1))
    }
}

/// Output of a tailored parser for one registered source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParsedDocument {
    pub source_id: SourceId,
    pub title: String,
    pub body: Vec<String>,
    pub tables: Vec<Table>,
    pub jurisdiction_tags: Vec<String>,
    pub language: String,
}

impl ParsedDocument {
    pub fn validate(&self) -> Result<(), CoreError> {
        for (i, p) in self.body.iter().enumerate() {
            if p.trim().is_empty() {
                return Err(CoreError::EmptyParagraph(i));
            }
        }
        for t in &self.tables {
            t.validate()?;
        }
        Ok(())
    }
}

/// A single statement the pipeline asserts in a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Claim {
    pub id: ClaimId,
    pub text: String,
    pub section_ref: Option<String>,
    pub confidence: f64,
}

impl Claim {
    pub fn validate(&self) -> Result<(), CoreError> {
        if !(0.0..=1.0).contains(&self.confidence) {
            return Err(CoreError::ConfidenceOutOfRange(self.confidence));
        }
        Ok(())
    }
}

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default,
)]
#[serde(rename_all = "snake_case")]
pub enum VerificationState {
    #[default]
    Unverified,
    Verified,
    Failed,
}

/// Edge from a claim to a source at a specific locator. `verified` only
/// moves to `Verified` after a verification protocol ran and passed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Citation {
    pub claim_id: ClaimId,
    pub source_id: SourceId,
    pub locator: String,
    pub verified: VerificationState,
    pub protocol_id: Option<String>,
}

impl Citation {
    pub fn new(claim_id: ClaimId, source_id: SourceId, locator: impl Into<String>) -> Self {
        Self {
            claim_id,
            source_id,
            locator: locator.into(),
            verified: VerificationState::Unverified,
            protocol_id: None,
        }
    }

    /// Uniqueness key within a provenance graph.
    pub fn key(&self) -> (ClaimId, SourceId, String) {
        (
            self.claim_id.clone(),
            self.source_id.clone(),
            self.locator.clone(),
        )
    }
}
