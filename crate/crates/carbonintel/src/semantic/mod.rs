//! Deterministic lexical semantics: gazetteer NER, topic modelling,
//! pattern-based relationship extraction, TF-IDF retrieval, and query
//! refinement.

mod entities;
mod refine;
mod relations;
mod retrieval;
pub mod text;
mod topics;

pub use entities::{
    Entity, EntityKind, Gazetteer, GazetteerError, extract_entities, tag_jurisdictions,
};
pub use refine::{CoverageGaps, refine_query};
pub use relations::{PatternList, RelationTriple, extract_relationships};
pub use retrieval::{RetrievalError, RetrievalIndex, document_text};
pub use topics::{TopicCluster, TopicError, default_k, model_topics};
