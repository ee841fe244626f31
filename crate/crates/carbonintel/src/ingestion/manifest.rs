use crate::core::{ParsedDocument, SourceRecord, SourceType};
use crate::ingestion::fetch::{FetchError, Fetcher};
use crate::ingestion::parse::{ParseError, parse_document};
use crate::ingestion::registry::{MediaKind, RegistryError, SourceDescriptor, SourceRegistry};
use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;
use thiserror::Error;

pub const MANIFEST_FILE_NAME: &str = "manifest.json";
pub const MANIFEST_VERSION: u32 = 1;

/// Per-file metadata in a corpus manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub source_type: SourceType,
    #[serde(default)]
    pub publisher: String,
    #[serde(default)]
    pub published_date: Option<NaiveDate>,
    pub media_kind: MediaKind,
}

/// Versioned manifest mapping corpus filenames to source metadata.
/// Files absent from the manifest fall back to extension-based media-kind
/// inference and the user_provided source type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusManifest {
    pub version: u32,
    pub entries: BTreeMap<String, ManifestEntry>,
}

impl CorpusManifest {
    pub fn load(path: &Path) -> Result<Self, CorpusError> {
        let text = std::fs::read_to_string(path).map_err(|e| CorpusError::Io {
            path: path.display().to_string(),
            detail: e.to_string(),
        })?;
        let manifest: CorpusManifest =
            serde_json::from_str(&text).map_err(|e| CorpusError::BadManifest {
                path: path.display().to_string(),
                detail: e.to_string(),
            })?;
        if manifest.version != MANIFEST_VERSION {
            return Err(CorpusError::BadManifest {
                path: path.display().to_string(),
                detail: format!(
                    "unsupported manifest version {} (expected {})",
                    manifest.version, MANIFEST_VERSION
                ),
            });
        }
        Ok(manifest)
    }
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {detail}")]
    Io { path: String, detail: String },
    #[error("bad manifest {path}: {detail}")]
    BadManifest { path: String, detail: String },
    #[error(transparent)]
    Fetch(#[from] FetchError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Registry(#[from] RegistryError),
    #[error("file {0} has no manifest entry and no recognizable extension")]
    UnknownKind(String),
}

/// Load every regular file in a corpus directory (except the manifest
/// itself), register it, and parse it. Files are visited in lexicographic
/// filename order so corpus loading is deterministic.
pub fn load_corpus(
    dir: &Path,
    registry: &SourceRegistry,
    fetcher: &dyn Fetcher,
) -> Result<Vec<(ParsedDocument, SourceRecord)>, CorpusError> {
    let manifest_path = dir.join(MANIFEST_FILE_NAME);
    let manifest = if manifest_path.exists() {
        Some(CorpusManifest::load(&manifest_path)?)
    } else {
        None
    };

    let mut names: Vec<String> = std::fs::read_dir(dir)
        .map_err(|e| CorpusError::Io {
            path: dir.display().to_string(),
            detail: e.to_string(),
        })?
        .filter_map(|entry| entry.ok())
        .filter(|entry| entry.path().is_file())
        .filter_map(|entry| entry.file_name().into_string().ok())
        .filter(|name| name != MANIFEST_FILE_NAME)
        .collect();
    names.sort();

    let mut out = Vec::new();
    for name in names {
        let path = dir.join(&name);
        let entry = manifest.as_ref().and_then(|m| m.entries.get(&name));
        let descriptor = match entry {
            Some(e) => SourceDescriptor {
                origin: path.display().to_string(),
                source_type: e.source_type,
                publisher: e.publisher.clone(),
                published_date: e.published_date,
                media_kind: e.media_kind,
            },
            None => SourceDescriptor {
                origin: path.display().to_string(),
                source_type: SourceType::UserProvided,
                publisher: String::new(),
                published_date: None,
                media_kind: MediaKind::from_extension(&name)
                    .ok_or_else(|| CorpusError::UnknownKind(name.clone()))?,
            },
        };
        let fetched = fetcher.fetch(&descriptor)?;
        let record = registry.register_source(&descriptor, &fetched.raw, fetched.retrieved_at)?;
        let doc = parse_document(&fetched, record.id.clone())?;
        out.push((doc, record));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clock::FixedClock;
    use crate::ingestion::fetch::FileFetcher;
    use std::sync::Arc;

    fn write_corpus(dir: &Path) {
        std::fs::write(
            dir.join("manifest.json"),
            r#"{
              "version": 1,
              "entries": {
                "ets.html": {"source_type": "regulatory", "publisher": "EU", "published_date": "2024-06-01", "media_kind": "html"},
                "prices.csv": {"source_type": "market_data", "publisher": "ICE", "media_kind": "csv_table"}
              }
            }"#,
        )
        .unwrap();
        std::fs::write(dir.join("ets.html"), "<h1>ETS Update</h1><p>Cap declines.</p>").unwrap();
        std::fs::write(dir.join("prices.csv"), "year,price\n2024,83.5\n").unwrap();
        std::fs::write(dir.join("note.txt"), "Note Title\n\nBody text.\n").unwrap();
    }

    #[test]
    fn corpus_loads_in_name_order_with_manifest_metadata() {
        let dir = tempfile::tempdir().unwrap();
        write_corpus(dir.path());
        let registry = SourceRegistry::new();
        let fetcher = FileFetcher::new(Arc::new(FixedClock::scripted_default()));
        let docs = load_corpus(dir.path(), &registry, &fetcher).unwrap();
        assert_eq!(docs.len(), 3);
        let titles: Vec<&str> = docs.iter().map(|(d, _)| d.title.as_str()).collect();
        assert_eq!(titles, vec!["ETS Update", "Note Title", "prices"]);
        assert_eq!(docs[0].1.source_type, SourceType::Regulatory);
        assert_eq!(docs[0].1.published_date, Some("2024-06-01".parse().unwrap()));
        // note.txt falls back to user_provided with inferred kind.
        assert_eq!(docs[1].1.source_type, SourceType::UserProvided);
    }

    #[test]
    fn wrong_manifest_version_rejected() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("manifest.json"), r#"{"version": 2, "entries": {}}"#)
            .unwrap();
        let registry = SourceRegistry::new();
        let fetcher = FileFetcher::new(Arc::new(FixedClock::scripted_default()));
        let err = load_corpus(dir.path(), &registry, &fetcher).unwrap_err();
        assert!(matches!(err, CorpusError::BadManifest { .. }));
    }

    #[test]
    fn unknown_extension_without_manifest_entry_rejected() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("data.bin"), "xx").unwrap();
        let registry = SourceRegistry::new();
        let fetcher = FileFetcher::new(Arc::new(FixedClock::scripted_default()));
        let err = load_corpus(dir.path(), &registry, &fetcher).unwrap_err();
        assert!(matches!(err, CorpusError::UnknownKind(name) if name == "data.bin"));
    }
}
