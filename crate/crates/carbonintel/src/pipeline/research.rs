//! Research stage: retrieve context, prompt the researcher, parse FINDING
//! blocks, register claims and citations, and report coverage gaps.
//!
//! Retrieval runs at most twice. When the first round leaves gaps and query
//! refinement is enabled, the query is expanded once and retrieval repeats;
//! findings are deduplicated across rounds by (text, source, locator).

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::backends::{ChatMessage, ModelBinding};
use crate::core::{
    Citation, Claim, ClaimId, ParsedDocument, ResearchQuery, SourceId, SourceRecord, Stage,
};
use crate::pipeline::stage::{
    PipelineError, StageServices, ask_with_one_reask, block_field, fenced_blocks,
};
use crate::provenance::{ConflictKey, ProvenanceGraph, parse_locator};
use crate::semantic::text::{default_stopwords, words};
use crate::semantic::{CoverageGaps, RetrievalIndex, document_text, refine_query};

/// Context paragraphs quoted per document in the researcher prompt.
const MAX_CONTEXT_PARAGRAPHS: usize = 3;

const RESEARCH_SYSTEM_PROMPT: &str = "You research carbon markets using only the \
context documents supplied in the user message. Reply with one block per finding \
and nothing outside the blocks:\n\
FINDING\n\
claim: <one factual sentence containing its key figure>\n\
source: <a source id quoted from the context>\n\
locator: <paragraph N | table T cell R,C | page LABEL>\n\
annotation: <why the cited passage supports the claim>\n\
entity: <measured subject; include only for quantified claims>\n\
metric: <measured quantity; include only together with entity>\n\
period: <time period; include only together with entity>\n\
END";

/// One model finding after validation, bound to a registered claim.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Finding {
    pub claim: Claim,
    pub source_id: SourceId,
    pub locator: String,
    pub annotation: String,
    /// Present only when the claim quantifies entity/metric/period.
    pub conflict_key: Option<ConflictKey>,
}

/// Research stage output: findings plus the residual coverage gaps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResearchReport {
    pub findings: Vec<Finding>,
    pub gaps: CoverageGaps,
    /// Context sources in first-retrieved order across all rounds.
    pub sources: Vec<SourceId>,
    pub retrieval_rounds: u32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResearchOptions {
    pub top_k: usize,
    pub query_refinement: bool,
}

impl Default for ResearchOptions {
    fn default() -> Self {
        Self {
            top_k: 5,
            query_refinement: true,
        }
    }
}

/// A finding as parsed from the response, before claim ids exist.
struct RawFinding {
    text: String,
    source: SourceId,
    locator: String,
    annotation: String,
    key: Option<ConflictKey>,
}

fn parse_findings(text: &str, known: &BTreeSet<SourceId>) -> Result<Vec<RawFinding>, String> {
    let blocks = fenced_blocks(text, "FINDING")?;
    if blocks.is_empty() {
        return Err("no FINDING block present".into());
    }
    let mut findings = Vec::with_capacity(blocks.len());
    for (i, block) in blocks.iter().enumerate() {
        let n = i + 1;
        let field = |key: &str| {
            block_field(&block.lines, key)
                .filter(|v| !v.is_empty())
                .map(str::to_owned)
                .ok_or(format!("finding {n}: missing {key}"))
        };
        let claim = field("claim")?;
        let source = SourceId::new(field("source")?);
        if !known.contains(&source) {
            return Err(format!("finding {n}: unknown source {source}"));
        }
        let locator = field("locator")?;
        parse_locator(&locator).map_err(|e| format!("finding {n}: {e}"))?;
        let annotation = block_field(&block.lines, "annotation")
            .unwrap_or_default()
            .to_owned();
        let triple = (
            block_field(&block.lines, "entity").filter(|v| !v.is_empty()),
            block_field(&block.lines, "metric").filter(|v| !v.is_empty()),
            block_field(&block.lines, "period").filter(|v| !v.is_empty()),
        );
        let key = match triple {
            (Some(e), Some(m), Some(p)) => Some(ConflictKey::new(e, m, p)),
            (None, None, None) => None,
            _ => {
                return Err(format!(
                    "finding {n}: entity, metric and period must appear together"
                ));
            }
        };
        findings.push(RawFinding {
            text: claim,
            source,
            locator,
            annotation,
            key,
        });
    }
    Ok(findings)
}

/// Gaps between what the query asks for and what retrieval surfaced.
fn compute_gaps(
    query: &ResearchQuery,
    context: &[(&ParsedDocument, &SourceRecord)],
    index: &RetrievalIndex,
) -> CoverageGaps {
    let mut tags = BTreeSet::new();
    let mut covered_terms = BTreeSet::new();
    for (doc, _) in context {
        tags.extend(doc.jurisdiction_tags.iter().map(|t| t.to_lowercase()));
        covered_terms.extend(words(&document_text(doc)));
    }
    let missing_jurisdictions = query
        .jurisdictions
        .iter()
        .filter(|j| !tags.contains(&j.to_lowercase()))
        .cloned()
        .collect();
    let stopwords = default_stopwords();
    let topic_terms: BTreeSet<String> = words(&query.topic)
        .into_iter()
        .filter(|t| !stopwords.contains(t))
        .collect();
    let uncovered_terms = topic_terms
        .into_iter()
        .filter(|t| !covered_terms.contains(t))
        .map(|t| {
            let mass = index.term_mass(&t);
            (t, mass)
        })
        .collect();
    let empty_date_slices = match query.date_range {
        Some((start, end))
            if !context.iter().any(|(_, r)| {
                r.published_date.is_some_and(|d| start <= d && d <= end)
            }) =>
        {
            vec![(start, end)]
        }
        _ => Vec::new(),
    };
    CoverageGaps {
        missing_jurisdictions,
        uncovered_terms,
        empty_date_slices,
    }
}

/// Retrieval text covers the topic and requested jurisdictions so refinement
/// shifts the ranking.
fn retrieval_text(query: &ResearchQuery) -> String {
    let mut text = query.topic.clone();
    for jurisdiction in &query.jurisdictions {
        text.push(' ');
        text.push_str(jurisdiction);
    }
    text
}

fn build_messages(
    query: &ResearchQuery,
    context: &[(&ParsedDocument, &SourceRecord)],
    round: u32,
) -> Vec<ChatMessage> {
    let mut user = format!("topic: {}\n", query.topic);
    if !query.jurisdictions.is_empty() {
        user.push_str(&format!(
            "jurisdictions: {}\n",
            query.jurisdictions.join(", ")
        ));
    }
    if let Some((start, end)) = query.date_range {
        user.push_str(&format!("date range: {start} to {end}\n"));
    }
    user.push_str(&format!("audience: {}\n", query.audience.as_str()));
    user.push_str(&format!("retrieval round: {round}\n\ncontext documents:\n"));
    for (doc, record) in context {
        let publisher = if record.publisher.is_empty() {
            "unknown publisher"
        } else {
            &record.publisher
        };
        user.push_str(&format!(
            "--- source {} ({}; {}) {}\n",
            record.id, record.source_type, publisher, doc.title
        ));
        for paragraph in doc.body.iter().take(MAX_CONTEXT_PARAGRAPHS) {
            user.push_str(paragraph);
            user.push('\n');
        }
        if !doc.tables.is_empty() {
            user.push_str(&format!("[{} tables]\n", doc.tables.len()));
        }
    }
    vec![
        ChatMessage::system(RESEARCH_SYSTEM_PROMPT),
        ChatMessage::user(user),
    ]
}

/// Runs retrieval and the researcher model, registering every deduplicated
/// finding as a claim with one citation. Claim ids are sequential (`clm-1`,
/// `clm-2`, ...) in finding order.
pub fn run_researcher(
    query: &ResearchQuery,
    docs: &[(ParsedDocument, SourceRecord)],
    index: &RetrievalIndex,
    graph: &mut ProvenanceGraph,
    binding: &ModelBinding,
    services: &StageServices,
    options: &ResearchOptions,
) -> Result<ResearchReport, PipelineError> {
    const STAGE: Stage = Stage::Research;
    let by_id: BTreeMap<&SourceId, (&ParsedDocument, &SourceRecord)> = docs
        .iter()
        .map(|(doc, record)| (&record.id, (doc, record)))
        .collect();
    let known: BTreeSet<SourceId> = graph.sources().map(|r| r.id.clone()).collect();
    if known.is_empty() {
        return Err(PipelineError::stage(
            STAGE,
            "no sources registered in the provenance graph",
        ));
    }

    let mut active = query.clone();
    let mut raw: Vec<RawFinding> = Vec::new();
    let mut seen: BTreeSet<(String, SourceId, String)> = BTreeSet::new();
    let mut context_order: Vec<SourceId> = Vec::new();
    let mut rounds = 0u32;
    let gaps = loop {
        rounds += 1;
        let ranked = index
            .retrieve(&retrieval_text(&active), options.top_k)
            .map_err(|e| PipelineError::stage(STAGE, e.to_string()))?;
        let context: Vec<(&ParsedDocument, &SourceRecord)> = ranked
            .iter()
            .filter_map(|(id, _)| by_id.get(id).copied())
            .collect();
        for (_, record) in &context {
            if !context_order.contains(&record.id) {
                context_order.push(record.id.clone());
            }
        }
        let messages = build_messages(&active, &context, rounds);
        let parsed = ask_with_one_reask(services, binding, STAGE, messages, |text| {
            parse_findings(text, &known)
        })?;
        for finding in parsed {
            let key = (
                finding.text.clone(),
                finding.source.clone(),
                finding.locator.clone(),
            );
            if seen.insert(key) {
                raw.push(finding);
            }
        }
        let gaps = compute_gaps(&active, &context, index);
        if rounds == 1 && options.query_refinement && !gaps.is_empty() {
            active = refine_query(&active, &gaps);
            continue;
        }
        break gaps;
    };

    let mut findings = Vec::with_capacity(raw.len());
    for (i, finding) in raw.into_iter().enumerate() {
        let claim = Claim {
            id: ClaimId::new(format!("clm-{}", i + 1)),
            text: finding.text,
            section_ref: None,
            confidence: 0.0,
        };
        graph.record_claim(&claim, services.clock.now())?;
        let citation = Citation::new(
            claim.id.clone(),
            finding.source.clone(),
            finding.locator.as_str(),
        );
        graph.attach_citation(&citation, services.clock.now())?;
        findings.push(Finding {
            claim,
            source_id: finding.source,
            locator: finding.locator,
            annotation: finding.annotation,
            conflict_key: finding.key,
        });
    }

    Ok(ResearchReport {
        findings,
        gaps,
        sources: context_order,
        retrieval_rounds: rounds,
    })
}
