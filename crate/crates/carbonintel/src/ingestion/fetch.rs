use crate::clock::Clock;
use crate::core::Timestamp;
use crate::ingestion::registry::{MediaKind, SourceDescriptor};
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;
use thiserror::Error;

pub const DEFAULT_FETCH_TIMEOUT: Duration = Duration::from_secs(30);
pub const DEFAULT_MAX_BODY_BYTES: u64 = 8 * 1024 * 1024;

#[derive(Debug, Clone)]
pub struct FetchResult {
    pub descriptor: SourceDescriptor,
    pub raw: Vec<u8>,
    pub media_kind: MediaKind,
    pub retrieved_at: Timestamp,
}

#[derive(Debug, Error)]
pub enum FetchError {
    #[error("origin {origin} unreachable: {detail}")]
    Unreachable { origin: String, detail: String },
    #[error("origin {origin} timed out")]
    Timeout { origin: String },
    #[error("origin {origin} body exceeds limit of {limit} bytes")]
    BodyTooLarge { origin: String, limit: u64 },
    #[error("origin {origin} returned an empty body")]
    EmptyBody { origin: String },
}

pub trait Fetcher: Send + Sync {
    fn fetch(&self, descriptor: &SourceDescriptor) -> Result<FetchResult, FetchError>;
}

/// Reads origins as paths on the local filesystem, optionally under a root.
pub struct FileFetcher {
    root: Option<PathBuf>,
    clock: Arc<dyn Clock>,
}

impl FileFetcher {
    pub fn new(clock: Arc<dyn Clock>) -> Self {
        FileFetcher { root: None, clock }
    }

    pub fn with_root(root: PathBuf, clock: Arc<dyn Clock>) -> Self {
        FileFetcher {
            root: Some(root),
            clock,
        }
    }

    fn resolve(&self, origin: &str) -> PathBuf {
        match &self.root {
            Some(root) => root.join(origin),
            None => PathBuf::from(origin),
        }
    }
}

impl Fetcher for FileFetcher {
    fn fetch(&self, descriptor: &SourceDescriptor) -> Result<FetchResult, FetchError> {
        let path = self.resolve(&descriptor.origin);
        let raw = std::fs::read(&path).map_err(|e| FetchError::Unreachable {
            origin: descriptor.origin.clone(),
            detail: e.to_string(),
        })?;
        if raw.is_empty() {
            return Err(FetchError::EmptyBody {
                origin: descriptor.origin.clone(),
            });
        }
        Ok(FetchResult {
            descriptor: descriptor.clone(),
            raw,
            media_kind: descriptor.media_kind,
            retrieved_at: self.clock.now(),
        })
    }
}

/// HTTP GET fetcher with a request timeout and a response-body size cap.
pub struct HttpFetcher {
    agent: ureq::Agent,
    max_body_bytes: u64,
    clock: Arc<dyn Clock>,
}

impl HttpFetcher {
    pub fn new(clock: Arc<dyn Clock>) -> Self {
        Self::with_limits(DEFAULT_FETCH_TIMEOUT, DEFAULT_MAX_BODY_BYTES, clock)
    }

    pub fn with_limits(timeout: Duration, max_body_bytes: u64, clock: Arc<dyn Clock>) -> Self {
        let config = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .build();
        HttpFetcher {
            agent: ureq::Agent::new_with_config(config),
            max_body_bytes,
            clock,
        }
    }

    /// Correct the declared media kind from the response content type when
    /// the header names a kind we understand.
    fn kind_from_content_type(content_type: &str, declared: MediaKind) -> MediaKind {
        let essence = content_type.split(';').next().unwrap_or("").trim();
        match essence {
            "text/html" => MediaKind::Html,
            "text/csv" => MediaKind::CsvTable,
            "application/json" => MediaKind::JsonMarketData,
            "text/plain" => MediaKind::PlainText,
            _ => declared,
        }
    }
}

impl Fetcher for HttpFetcher {
    fn fetch(&self, descriptor: &SourceDescriptor) -> Result<FetchResult, FetchError> {
        let origin = descriptor.origin.clone();
        let mut response =
            self.agent
                .get(&origin)
                .call()
                .map_err(|e| classify_transport_error(&origin, e))?;
        let media_kind = response
            .headers()
            .get("content-type")
            .and_then(|v| v.to_str().ok())
            .map(|ct| Self::kind_from_content_type(ct, descriptor.media_kind))
            .unwrap_or(descriptor.media_kind);
        let raw = response
            .body_mut()
            .with_config()
            .limit(self.max_body_bytes)
            .read_to_vec()
            .map_err(|e| match e {
                ureq::Error::BodyExceedsLimit(limit) => FetchError::BodyTooLarge {
                    origin: origin.clone(),
                    limit,
                },
                ureq::Error::Timeout(_) => FetchError::Timeout {
                    origin: origin.clone(),
                },
                other => FetchError::Unreachable {
                    origin: origin.clone(),
                    detail: other.to_string(),
                },
            })?;
        if raw.is_empty() {
            return Err(FetchError::EmptyBody { origin });
        }
        Ok(FetchResult {
            descriptor: descriptor.clone(),
            raw,
            media_kind,
            retrieved_at: self.clock.now(),
        })
    }
}

fn classify_transport_error(origin: &str, error: ureq::Error) -> FetchError {
    match error {
        ureq::Error::Timeout(_) => FetchError::Timeout {
            origin: origin.to_owned(),
        },
        ureq::Error::BodyExceedsLimit(limit) => FetchError::BodyTooLarge {
            origin: origin.to_owned(),
            limit,
        },
        other => FetchError::Unreachable {
            origin: origin.to_owned(),
            detail: other.to_string(),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clock::FixedClock;
    use crate::core::SourceType;

    fn descriptor(origin: &str, kind: MediaKind) -> SourceDescriptor {
        SourceDescriptor {
            origin: origin.into(),
            source_type: SourceType::News,
            publisher: String::new(),
            published_date: None,
            media_kind: kind,
        }
    }

    #[test]
    fn file_fetcher_reads_existing_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("doc.txt");
        std::fs::write(&path, "hello").unwrap();
        let clock = Arc::new(FixedClock::scripted_default());
        let fetcher = FileFetcher::new(clock);
        let result = fetcher
            .fetch(&descriptor(path.to_str().unwrap(), MediaKind::PlainText))
            .unwrap();
        assert_eq!(result.raw, b"hello");
        assert_eq!(result.media_kind, MediaKind::PlainText);
    }

    #[test]
    fn file_fetcher_missing_path_is_unreachable() {
        let clock = Arc::new(FixedClock::scripted_default());
        let fetcher = FileFetcher::new(clock);
        let err = fetcher
            .fetch(&descriptor("/nonexistent/never", MediaKind::PlainText))
            .unwrap_err();
        assert!(matches!(err, FetchError::Unreachable { .. }));
    }

    #[test]
    fn content_type_overrides_declared_kind() {
        assert_eq!(
            HttpFetcher::kind_from_content_type("text/csv; charset=utf-8", MediaKind::PlainText),
            MediaKind::CsvTable
        );
        assert_eq!(
            HttpFetcher::kind_from_content_type("application/octet-stream", MediaKind::Html),
            MediaKind::Html
        );
    }
}
