//! Per-source-type citation verification.
//!
//! Text sources (regulatory, academic, industry, news) are verified
//! against the cited paragraph: the claim must share at least one
//! quantity or at least two non-stopword content terms with it. Tabular
//! sources (market_data, user_provided) are verified against the cited
//! cell: some claim quantity must match it within 0.5% relative
//! tolerance. A malformed locator is an error; a well-formed locator that
//! does not support the claim is a failed outcome.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::core::{Cell, Citation, Claim, ParsedDocument, SourceRecord, SourceType, VerificationState};
use crate::semantic::text::{content_terms, default_stopwords, extract_numbers};

/// Relative tolerance for matching a claim quantity to a table cell.
pub const TABLE_MATCH_TOLERANCE: f64 = 0.005;

/// Where in a document a citation points. All indices are 1-based.
///
/// Grammar (documented in docs/formats.md):
///   "paragraph N" | "table T cell R,C" | "page LABEL"
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Locator {
    Paragraph(usize),
    TableCell { table: usize, row: usize, col: usize },
    Page(String),
}

impl fmt::Display for Locator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Locator::Paragraph(n) => write!(f, "paragraph {n}"),
            Locator::TableCell { table, row, col } => {
                write!(f, "table {table} cell {row},{col}")
            }
            Locator::Page(label) => write!(f, "page {label}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerifyError {
    #[error("locator {locator:?} is syntactically invalid: {detail}")]
    BadLocator { locator: String, detail: String },
    #[error("citation names source {expected} but was checked against {got}")]
    SourceMismatch { expected: String, got: String },
    #[error("citation names claim {expected} but was checked against {got}")]
    ClaimMismatch { expected: String, got: String },
}

fn bad(locator: &str, detail: impl Into<String>) -> VerifyError {
    VerifyError::BadLocator {
        locator: locator.to_owned(),
        detail: detail.into(),
    }
}

fn parse_index(locator: &str, token: &str, what: &str) -> Result<usize, VerifyError> {
    match token.parse::<usize>() {
        Ok(n) if n >= 1 => Ok(n),
        _ => Err(bad(locator, format!("{what} must be a 1-based integer"))),
    }
}

pub fn parse_locator(text: &str) -> Result<Locator, VerifyError> {
    let trimmed = text.trim();
    if let Some(rest) = trimmed.strip_prefix("paragraph ") {
        return Ok(Locator::Paragraph(parse_index(
            trimmed,
            rest.trim(),
            "paragraph index",
        )?));
    }
    if let Some(rest) = trimmed.strip_prefix("table ") {
        let (table_tok, cell_part) = rest
            .trim()
            .split_once(" cell ")
            .ok_or_else(|| bad(trimmed, "expected \"table T cell R,C\""))?;
        let (row_tok, col_tok) = cell_part
            .trim()
            .split_once(',')
            .ok_or_else(|| bad(trimmed, "cell reference must be \"R,C\""))?;
        return Ok(Locator::TableCell {
            table: parse_index(trimmed, table_tok.trim(), "table index")?,
            row: parse_index(trimmed, row_tok.trim(), "row index")?,
            col: parse_index(trimmed, col_tok.trim(), "column index")?,
        });
    }
    if let Some(rest) = trimmed.strip_prefix("page ") {
        let label = rest.trim();
        if label.is_empty() {
            return Err(bad(trimmed, "page label must not be empty"));
        }
        return Ok(Locator::Page(label.to_owned()));
    }
    Err(bad(
        trimmed,
        "expected \"paragraph N\", \"table T cell R,C\" or \"page LABEL\"",
    ))
}

/// Result of running one verification protocol over one citation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationOutcome {
    pub protocol_id: String,
    pub verified: VerificationState,
    pub reason: String,
}

impl VerificationOutcome {
    pub fn passed(&self) -> bool {
        self.verified == VerificationState::Verified
    }
}

/// Protocol identifier for a source type: "<source_type>.v1".
pub fn protocol_id(source_type: SourceType) -> String {
    format!("{}.v1", source_type.as_str())
}

/// Run the protocol selected by the source type. Pure: no graph access,
/// no side effects; the caller records the outcome as a provenance event.
pub fn verify_citation(
    citation: &Citation,
    claim: &Claim,
    doc: &ParsedDocument,
    record: &SourceRecord,
) -> Result<VerificationOutcome, VerifyError> {
    if claim.id != citation.claim_id {
        return Err(VerifyError::ClaimMismatch {
            expected: citation.claim_id.to_string(),
            got: claim.id.to_string(),
        });
    }
    if record.id != citation.source_id || doc.source_id != citation.source_id {
        let got = if record.id != citation.source_id {
            record.id.to_string()
        } else {
            doc.source_id.to_string()
        };
        return Err(VerifyError::SourceMismatch {
            expected: citation.source_id.to_string(),
            got,
        });
    }
    let locator = parse_locator(&citation.locator)?;
    let protocol = protocol_id(record.source_type);
    let outcome = match record.source_type {
        SourceType::Regulatory | SourceType::Academic | SourceType::Industry | SourceType::News => {
            text_protocol(&locator, &claim.text, doc)
        }
        SourceType::MarketData | SourceType::UserProvided => {
            table_protocol(&locator, &claim.text, doc)
        }
    };
    Ok(match outcome {
        Ok(reason) => VerificationOutcome {
            protocol_id: protocol,
            verified: VerificationState::Verified,
            reason,
        },
        Err(reason) => VerificationOutcome {
            protocol_id: protocol,
            verified: VerificationState::Failed,
            reason,
        },
    })
}

fn text_protocol(locator: &Locator, claim_text: &str, doc: &ParsedDocument) -> Result<String, String> {
    let n = match locator {
        Locator::Paragraph(n) => *n,
        _ => return Err("text protocol requires a paragraph locator".to_owned()),
    };
    let Some(paragraph) = doc.body.get(n - 1) else {
        return Err("locator unresolved".to_owned());
    };
    let claim_quantities = extract_numbers(claim_text);
    let paragraph_quantities = extract_numbers(paragraph);
    if let Some(q) = claim_quantities
        .iter()
        .find(|q| paragraph_quantities.contains(q))
    {
        return Ok(format!("paragraph {n} shares quantity {q} with the claim"));
    }
    let stopwords = default_stopwords();
    let shared: Vec<String> = content_terms(claim_text, stopwords)
        .intersection(&content_terms(paragraph, stopwords))
        .cloned()
        .collect();
    if shared.len() >= 2 {
        return Ok(format!(
            "paragraph {n} shares {} content terms: {}",
            shared.len(),
            shared.join(", ")
        ));
    }
    Err("no shared quantity and fewer than 2 shared content terms".to_owned())
}

fn table_protocol(locator: &Locator, claim_text: &str, doc: &ParsedDocument) -> Result<String, String> {
    let (table_idx, row, col) = match locator {
        Locator::TableCell { table, row, col } => (*table, *row, *col),
        _ => return Err("table protocol requires a table cell locator".to_owned()),
    };
    let Some(cell) = doc
        .tables
        .get(table_idx - 1)
        .and_then(|t| t.cell(row, col))
    else {
        return Err("locator unresolved".to_owned());
    };
    let Cell::Number(cell_value) = cell else {
        return Err("cited cell is not numeric".to_owned());
    };
    let quantities = extract_numbers(claim_text);
    if quantities.is_empty() {
        return Err("claim contains no quantity".to_owned());
    }
    match quantities
        .iter()
        .find(|q| crate::provenance::relative_difference(**q, *cell_value) <= TABLE_MATCH_TOLERANCE)
    {
        Some(q) => Ok(format!(
            "claim quantity {q} matches cell value {cell_value} within 0.5%"
        )),
        None => Err(format!(
            "no claim quantity within 0.5% of cell value {cell_value}"
        )),
    }
}
