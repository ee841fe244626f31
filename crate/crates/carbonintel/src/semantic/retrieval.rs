use crate::core::{ParsedDocument, SourceId};
use crate::semantic::text::{default_stopwords, words};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RetrievalError {
    #[error("index is empty")]
    EmptyIndex,
    #[error("k must be at least 1")]
    ZeroK,
}

/// TF-IDF index: idf = ln(N / df), vectors L2-normalized, cosine ranking
/// with ties broken by ascending document id.
#[derive(Debug, Clone)]
pub struct RetrievalIndex {
    doc_count: usize,
    df: BTreeMap<String, usize>,
    // Per-document normalized term weights, keyed by doc id (ascending).
    vectors: BTreeMap<SourceId, BTreeMap<String, f64>>,
}

/// The text a document contributes to the index: title plus paragraphs.
pub fn document_text(doc: &ParsedDocument) -> String {
    let mut parts = Vec::with_capacity(doc.body.len() + 1);
    if !doc.title.is_empty() {
        parts.push(doc.title.clone());
    }
    parts.extend(doc.body.iter().cloned());
    parts.join(" ")
}

impl RetrievalIndex {
    pub fn build(docs: &[ParsedDocument]) -> Result<Self, RetrievalError> {
        if docs.is_empty() {
            return Err(RetrievalError::EmptyIndex);
        }
        let stopwords = default_stopwords();
        let term_counts: Vec<(SourceId, BTreeMap<String, usize>)> = docs
            .iter()
            .map(|doc| {
                let mut counts = BTreeMap::new();
                for word in words(&document_text(doc)) {
                    if !stopwords.contains(&word) {
                        *counts.entry(word).or_insert(0) += 1;
                    }
                }
                (doc.source_id.clone(), counts)
            })
            .collect();

        let doc_count = term_counts.len();
        let mut df: BTreeMap<String, usize> = BTreeMap::new();
        for (_, counts) in &term_counts {
            for term in counts.keys() {
                *df.entry(term.clone()).or_insert(0) += 1;
            }
        }

        let mut vectors = BTreeMap::new();
        for (id, counts) in term_counts {
            let weighted = weight_and_normalize(&counts, doc_count, &df);
            vectors.insert(id, weighted);
        }
        Ok(RetrievalIndex {
            doc_count,
            df,
            vectors,
        })
    }

    pub fn len(&self) -> usize {
        self.doc_count
    }

    pub fn is_empty(&self) -> bool {
        self.doc_count == 0
    }

    /// Total normalized TF-IDF weight a term carries across the corpus.
    /// Used to rank uncovered query terms when building a gap report.
    pub fn term_mass(&self, term: &str) -> f64 {
        self.vectors.values().filter_map(|v| v.get(term)).sum()
    }

    /// Top-k documents by cosine similarity; zero-score documents are
    /// dropped, so a query sharing no vocabulary returns nothing.
    pub fn retrieve(&self, query: &str, k: usize) -> Result<Vec<(SourceId, f64)>, RetrievalError> {
        if k == 0 {
            return Err(RetrievalError::ZeroK);
        }
        let stopwords = default_stopwords();
        let mut counts: BTreeMap<String, usize> = BTreeMap::new();
        for word in words(query) {
            if !stopwords.contains(&word) {
                *counts.entry(word).or_insert(0) += 1;
            }
        }
        let query_vec = weight_and_normalize(&counts, self.doc_count, &self.df);

        let mut scored: Vec<(SourceId, f64)> = self
            .vectors
            .iter()
            .map(|(id, vec)| (id.clone(), dot(&query_vec, vec)))
            .filter(|(_, score)| *score > 0.0)
            .collect();
        // Stable by construction: vectors iterate in ascending id order, so
        // equal scores keep ascending-id order under a stable sort.
        scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
        scored.truncate(k);
        Ok(scored)
    }
}

fn weight_and_normalize(
    counts: &BTreeMap<String, usize>,
    doc_count: usize,
    df: &BTreeMap<String, usize>,
) -> BTreeMap<String, f64> {
    let mut weights: BTreeMap<String, f64> = BTreeMap::new();
    for (term, &tf) in counts {
        let Some(&term_df) = df.get(term) else {
            continue;
        };
        let idf = (doc_count as f64 / term_df as f64).ln();
        if idf > 0.0 {
            weights.insert(term.clone(), tf as f64 * idf);
        }
    }
    let norm = weights.values().map(|w| w * w).sum::<f64>().sqrt();
    if norm > 0.0 {
        for w in weights.values_mut() {
            *w /= norm;
        }
    }
    weights
}

fn dot(a: &BTreeMap<String, f64>, b: &BTreeMap<String, f64>) -> f64 {
    if a.len() > b.len() {
        return dot(b, a);
    }
    a.iter()
        .filter_map(|(term, wa)| b.get(term).map(|wb| wa * wb))
        .sum()
}
