use crate::core::{Cell, ParsedDocument, SourceId, Table};
use crate::ingestion::fetch::FetchResult;
use crate::ingestion::html::parse_html;
use crate::ingestion::registry::MediaKind;
use chrono::NaiveDate;
use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("{kind} input is not valid UTF-8 at byte {position}")]
    InvalidUtf8 { kind: MediaKind, position: usize },
    #[error("malformed {kind} at {position}: {detail}")]
    Malformed {
        kind: MediaKind,
        position: String,
        detail: String,
    },
    #[error("{kind} document failed validation: {detail}")]
    Invalid { kind: MediaKind, detail: String },
}

/// Type a raw cell string: number if it parses as a decimal literal, date
/// if it is an ISO calendar date, otherwise text. Used by the csv, html,
/// and json table extractors so typing is uniform.
pub fn type_cell(text: &str) -> Cell {
    let trimmed = text.trim();
    if let Ok(date) = trimmed.parse::<NaiveDate>() {
        return Cell::Date(date);
    }
    if looks_numeric(trimmed) {
        if let Ok(n) = trimmed.parse::<f64>() {
            return Cell::Number(n);
        }
    }
    Cell::Text(trimmed.to_owned())
}

fn looks_numeric(text: &str) -> bool {
    !text.is_empty()
        && text.chars().next().map(|c| c.is_ascii_digit() || c == '-' || c == '+') == Some(true)
        && text
            .chars()
            .all(|c| c.is_ascii_digit() || matches!(c, '-' | '+' | '.' | 'e' | 'E'))
}

/// Parse fetched bytes into a structured document. Pure function of
/// (raw bytes, media kind): repeated calls produce identical output.
/// Jurisdiction tags are populated later by the semantic layer.
pub fn parse_document(fetch: &FetchResult, source_id: SourceId) -> Result<ParsedDocument, ParseError> {
    let kind = fetch.media_kind;
    let text = std::str::from_utf8(&fetch.raw).map_err(|e| ParseError::InvalidUtf8 {
        kind,
        position: e.valid_up_to(),
    })?;

    let (title, body, tables) = match kind {
        MediaKind::Html => parse_html_document(text)?,
        MediaKind::PlainText | MediaKind::PdfExtractedText => parse_plain_text(text),
        MediaKind::CsvTable => parse_csv(text, &fetch.descriptor.origin)?,
        MediaKind::JsonMarketData => parse_json_market_data(text)?,
    };

    let doc = ParsedDocument {
        source_id,
        title,
        body,
        tables,
        jurisdiction_tags: Vec::new(),
        language: "en".into(),
    };
    doc.validate().map_err(|e| ParseError::Invalid {
        kind,
        detail: e.to_string(),
    })?;
    Ok(doc)
}

fn parse_html_document(text: &str) -> Result<(String, Vec<String>, Vec<Table>), ParseError> {
    let doc = parse_html(text).map_err(|e| ParseError::Malformed {
        kind: MediaKind::Html,
        position: format!("byte {}", e.position),
        detail: e.detail,
    })?;
    Ok((doc.title.unwrap_or_default(), doc.paragraphs, doc.tables))
}

/// First line is the title; the remaining text splits into paragraphs on
/// blank lines, with internal line breaks collapsed to single spaces.
fn parse_plain_text(text: &str) -> (String, Vec<String>, Vec<Table>) {
    let mut lines = text.lines();
    let title = lines.next().unwrap_or("").trim().to_owned();
    let rest: Vec<&str> = lines.collect();
    let mut paragraphs = Vec::new();
    let mut current: Vec<&str> = Vec::new();
    for line in rest {
        if line.trim().is_empty() {
            if !current.is_empty() {
                paragraphs.push(current.join(" "));
                current.clear();
            }
        } else {
            current.push(line.trim());
        }
    }
    if !current.is_empty() {
        paragraphs.push(current.join(" "));
    }
    (title, paragraphs, Vec::new())
}

fn parse_csv(text: &str, origin: &str) -> Result<(String, Vec<String>, Vec<Table>), ParseError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut rows: Vec<Vec<String>> = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| ParseError::Malformed {
            kind: MediaKind::CsvTable,
            position: format!("record {}", idx + 1),
            detail: e.to_string(),
        })?;
        rows.push(record.iter().map(|f| f.to_owned()).collect());
    }
    if rows.is_empty() {
        return Err(ParseError::Malformed {
            kind: MediaKind::CsvTable,
            position: "record 1".into(),
            detail: "empty file".into(),
        });
    }
    let headers = rows.remove(0);
    let expected = headers.len();
    for (idx, row) in rows.iter().enumerate() {
        if row.len() != expected {
            return Err(ParseError::Malformed {
                kind: MediaKind::CsvTable,
                position: format!("record {}", idx + 2),
                detail: format!("row has {} cells, expected {}", row.len(), expected),
            });
        }
    }
    let table = Table {
        headers,
        rows: rows
            .into_iter()
            .map(|row| row.iter().map(|c| type_cell(c)).collect())
            .collect(),
    };
    let title = file_stem(origin);
    Ok((title, Vec::new(), vec![table]))
}

fn file_stem(origin: &str) -> String {
    let name = origin
        .rsplit(['/', '\\'])
        .next()
        .unwrap_or(origin);
    match name.rfind('.') {
        Some(dot) if dot > 0 => name[..dot].to_owned(),
        _ => name.to_owned(),
    }
}

#[derive(Deserialize)]
struct MarketDataFile {
    title: String,
    columns: Vec<String>,
    rows: Vec<Vec<serde_json::Value>>,
    #[serde(default)]
    notes: Vec<String>,
}

/// Documented market-data schema: {"title", "columns", "rows", "notes"?}.
/// Row cells: JSON numbers become numeric cells, ISO-date strings become
/// date cells, everything else text.
fn parse_json_market_data(text: &str) -> Result<(String, Vec<String>, Vec<Table>), ParseError> {
    let parsed: MarketDataFile =
        serde_json::from_str(text).map_err(|e| ParseError::Malformed {
            kind: MediaKind::JsonMarketData,
            position: format!("line {} column {}", e.line(), e.column()),
            detail: e.to_string(),
        })?;
    let rows = parsed
        .rows
        .iter()
        .map(|row| row.iter().map(json_cell).collect())
        .collect();
    let table = Table {
        headers: parsed.columns,
        rows,
    };
    Ok((parsed.title, parsed.notes, vec![table]))
}

fn json_cell(value: &serde_json::Value) -> Cell {
    match value {
        serde_json::Value::Number(n) => Cell::Number(n.as_f64().unwrap_or(f64::NAN)),
        serde_json::Value::String(s) => type_cell(s),
        other => Cell::Text(other.to_string()),
    }
}
