use crate::core::{SourceId, SourceRecord, SourceType};
use crate::encoding::{digest_bytes, short_id};
use crate::ingestion::curate::score_credibility;
use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::sync::Mutex;
use thiserror::Error;

/// Supported raw media kinds; PDFs arrive as pre-extracted text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MediaKind {
    Html,
    PlainText,
    CsvTable,
    JsonMarketData,
    PdfExtractedText,
}

impl MediaKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            MediaKind::Html => "html",
            MediaKind::PlainText => "plain_text",
            MediaKind::CsvTable => "csv_table",
            MediaKind::JsonMarketData => "json_market_data",
            MediaKind::PdfExtractedText => "pdf_extracted_text",
        }
    }

    /// Infer a media kind from a filename extension.
    pub fn from_extension(path: &str) -> Option<Self> {
        let ext = path.rsplit('.').next()?.to_ascii_lowercase();
        match ext.as_str() {
            "html" | "htm" => Some(MediaKind::Html),
            "txt" | "md" => Some(MediaKind::PlainText),
            "csv" => Some(MediaKind::CsvTable),
            "json" => Some(MediaKind::JsonMarketData),
            _ => None,
        }
    }
}

impl std::fmt::Display for MediaKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A source known to the system before its bytes have been fetched.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceDescriptor {
    pub origin: String,
    pub source_type: SourceType,
    pub publisher: String,
    pub published_date: Option<NaiveDate>,
    pub media_kind: MediaKind,
}

impl SourceDescriptor {
    pub fn validate(&self) -> Result<(), RegistryError> {
        if self.origin.trim().is_empty() {
            return Err(RegistryError::EmptyOrigin);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RegistryError {
    #[error("source origin must not be empty")]
    EmptyOrigin,
    #[error("raw bytes for origin {0} are empty")]
    EmptyRaw(String),
}

/// Registry of fetched sources, deduplicating by (origin, content hash).
/// Registration is atomic: concurrent callers registering identical bytes
/// for one origin observe the same record.
pub struct SourceRegistry {
    records: Mutex<BTreeMap<(String, String), SourceRecord>>,
}

impl Default for SourceRegistry {
    fn default() -> Self {
        Self::new()
    }
}

impl SourceRegistry {
    pub fn new() -> Self {
        SourceRegistry {
            records: Mutex::new(BTreeMap::new()),
        }
    }

    /// Register raw bytes for a descriptor; identical bytes for an existing
    /// origin return the already-registered record. Record ids are a pure
    /// function of (origin, content hash), so re-registration across process
    /// restarts is stable.
    pub fn register_source(
        &self,
        descriptor: &SourceDescriptor,
        raw: &[u8],
        retrieved_at: crate::core::Timestamp,
    ) -> Result<SourceRecord, RegistryError> {
        descriptor.validate()?;
        if raw.is_empty() {
            return Err(RegistryError::EmptyRaw(descriptor.origin.clone()));
        }
        let content_hash = digest_bytes(raw);
        let key = (descriptor.origin.clone(), content_hash.clone());
        let mut records = self.records.lock().expect("registry lock poisoned");
        if let Some(existing) = records.get(&key) {
            return Ok(existing.clone());
        }
        let id_seed = format!("{}\u{0}{}", descriptor.origin, content_hash);
        let mut record = SourceRecord {
            id: SourceId::from(short_id("src", &id_seed).as_str()),
            origin: descriptor.origin.clone(),
            source_type: descriptor.source_type,
            publisher: descriptor.publisher.clone(),
            published_date: descriptor.published_date,
            retrieved_at,
            credibility: 0.0,
            content_hash,
        };
        record.credibility = score_credibility(&record);
        records.insert(key, record.clone());
        Ok(record)
    }

    pub fn get(&self, id: &SourceId) -> Option<SourceRecord> {
        let records = self.records.lock().expect("registry lock poisoned");
        records.values().find(|r| &r.id == id).cloned()
    }

    /// All records ordered by (origin, content hash).
    pub fn records(&self) -> Vec<SourceRecord> {
        let records = self.records.lock().expect("registry lock poisoned");
        records.values().cloned().collect()
    }

    pub fn len(&self) -> usize {
        self.records.lock().expect("registry lock poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
