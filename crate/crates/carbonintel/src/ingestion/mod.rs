//! Source registration, fetching, per-type parsing, date filtering,
//! credibility scoring, and deduplication.

mod curate;
mod fetch;
mod html;
mod manifest;
mod parse;
mod registry;

pub use curate::{deduplicate, filter_by_date, score_credibility};
pub use fetch::{FetchError, FetchResult, Fetcher, FileFetcher, HttpFetcher};
pub use manifest::{CorpusManifest, ManifestEntry, load_corpus};
pub use parse::{ParseError, parse_document, type_cell};
pub use registry::{MediaKind, RegistryError, SourceDescriptor, SourceRegistry};
