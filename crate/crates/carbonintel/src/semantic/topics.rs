use crate::core::{ParsedDocument, SourceId};
use crate::semantic::text::{default_stopwords, words};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicCluster {
    /// The seed term; clusters are disjoint in label by construction.
    pub label: String,
    /// Member terms with corpus TF-IDF mass, non-increasing.
    pub terms: Vec<(String, f64)>,
    /// Documents containing at least one member term, sorted by id.
    pub documents: Vec<SourceId>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TopicError {
    #[error("corpus has no non-stopword terms")]
    EmptyCorpus,
    #[error("k={k} exceeds vocabulary size {vocabulary}")]
    KTooLarge { k: usize, vocabulary: usize },
    #[error("k must be positive")]
    ZeroK,
}

/// Default topic count: min(8, vocabulary/10), at least 1.
pub fn default_k(vocabulary_size: usize) -> usize {
    (vocabulary_size / 10).clamp(1, 8)
}

/// Greedy TF-IDF topic clustering. Terms are ranked by corpus TF-IDF mass
/// (sum over documents of tf × ln(N/df)); the top k seed clusters; every
/// remaining term joins the cluster whose seed it co-occurs with most at
/// document level. All ties break lexicographically.
pub fn model_topics(docs: &[ParsedDocument], k: usize) -> Result<Vec<TopicCluster>, TopicError> {
    if k == 0 {
        return Err(TopicError::ZeroK);
    }
    let stopwords = default_stopwords();
    let doc_terms: Vec<(SourceId, BTreeMap<String, usize>)> = docs
        .iter()
        .map(|doc| {
            let mut counts = BTreeMap::new();
            for paragraph in std::iter::once(&doc.title).chain(doc.body.iter()) {
                for word in words(paragraph) {
                    if !stopwords.contains(&word) {
                        *counts.entry(word).or_insert(0) += 1;
                    }
                }
            }
            (doc.source_id.clone(), counts)
        })
        .collect();

    let n = doc_terms.len();
    let mut df: BTreeMap<&str, usize> = BTreeMap::new();
    for (_, counts) in &doc_terms {
        for term in counts.keys() {
            *df.entry(term).or_insert(0) += 1;
        }
    }
    if df.is_empty() {
        return Err(TopicError::EmptyCorpus);
    }
    if k > df.len() {
        return Err(TopicError::KTooLarge {
            k,
            vocabulary: df.len(),
        });
    }

    // Corpus mass per term; BTreeMap keeps the lexicographic tie order.
    let mut mass: BTreeMap<String, f64> = BTreeMap::new();
    for (_, counts) in &doc_terms {
        for (term, &tf) in counts {
            let idf = (n as f64 / df[term.as_str()] as f64).ln();
            *mass.entry(term.clone()).or_insert(0.0) += tf as f64 * idf;
        }
    }

    let mut ranked: Vec<(&String, f64)> = mass.iter().map(|(t, &m)| (t, m)).collect();
    ranked.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(b.0)));
    let seeds: Vec<String> = ranked.iter().take(k).map(|(t, _)| (*t).clone()).collect();

    // Document-level co-occurrence between each term and each seed.
    let mut members: BTreeMap<&str, Vec<String>> =
        seeds.iter().map(|s| (s.as_str(), Vec::new())).collect();
    for (term, _) in &ranked {
        if seeds.contains(term) {
            members.get_mut(term.as_str()).unwrap().push((*term).clone());
            continue;
        }
        let best_seed = seeds
            .iter()
            .map(|seed| {
                let co = doc_terms
                    .iter()
                    .filter(|(_, counts)| {
                        counts.contains_key(*term) && counts.contains_key(seed)
                    })
                    .count();
                (seed, co)
            })
            // Highest co-occurrence wins; ties go to the lexicographically
            // earliest seed (max_by keeps the last max, so compare seeds
            // reversed).
            .max_by(|a, b| a.1.cmp(&b.1).then_with(|| b.0.cmp(a.0)))
            .map(|(seed, _)| seed.clone())
            .unwrap();
        members.get_mut(best_seed.as_str()).unwrap().push((*term).clone());
    }

    let clusters = seeds
        .iter()
        .map(|seed| {
            let mut terms: Vec<(String, f64)> = members[seed.as_str()]
                .iter()
                .map(|t| (t.clone(), mass[t]))
                .collect();
            terms.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(&b.0)));
            let term_set: BTreeSet<&str> = terms.iter().map(|(t, _)| t.as_str()).collect();
            let documents: Vec<SourceId> = {
                let mut ids: Vec<SourceId> = doc_terms
                    .iter()
                    .filter(|(_, counts)| counts.keys().any(|t| term_set.contains(t.as_str())))
                    .map(|(id, _)| id.clone())
                    .collect();
                ids.sort();
                ids.dedup();
                ids
            };
            TopicCluster {
                label: seed.clone(),
                terms,
                documents,
            }
        })
        .collect();
    Ok(clusters)
}
