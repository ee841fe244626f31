//! Draft stage: turn research findings into a structured report whose
//! sections follow the audience template and whose claims are conserved.
//!
//! The drafter may reword a claim (recorded as a rewrite in the provenance
//! graph) but may not drop, invent, or duplicate one. Violations trigger the
//! standard single re-ask before the stage fails.

use std::collections::{BTreeMap, BTreeSet};

use crate::backends::{ChatMessage, ModelBinding};
use crate::core::{
    Audience, ClaimId, ClaimRef, ReportArtifact, ResearchQuery, Section, Stage,
};
use crate::pipeline::research::{Finding, ResearchReport};
use crate::pipeline::stage::{PipelineError, StageServices, ask_with_one_reask, fenced_blocks};
use crate::provenance::ProvenanceGraph;

const DRAFT_SYSTEM_PROMPT: &str = "You draft a carbon-market report from the \
numbered findings in the user message. Reply with one block per required \
section, in the exact order and with the exact headings listed there, and \
nothing outside the blocks:\n\
SECTION <heading>\n\
body: <narrative prose for the section>\n\
CLAIM <id>\n\
END\n\
Place every finding's claim id exactly once across all sections. Write \
`CLAIM <id>: <new text>` instead to reword a claim; keep its figures intact.";

/// Required section headings per audience, in order.
pub fn section_template(audience: Audience) -> &'static [&'static str] {
    match audience {
        Audience::Policymaker => &["Summary", "Policy Implications", "Recommendations"],
        Audience::Investor => &["Summary", "Market Impact", "Risk"],
        Audience::SustainabilityAnalyst => &["Methodology", "Findings", "Data Annex"],
        Audience::General => &["Narrative"],
    }
}

/// One parsed section: prose plus claim placements (id, optional rewording).
struct SectionPlan {
    heading: String,
    body: String,
    claims: Vec<(ClaimId, Option<String>)>,
}

fn parse_draft(
    text: &str,
    template: &[&str],
    expected: &BTreeSet<ClaimId>,
) -> Result<Vec<SectionPlan>, String> {
    let blocks = fenced_blocks(text, "SECTION")?;
    let headings: Vec<&str> = blocks.iter().map(|b| b.header.as_str()).collect();
    if headings != template {
        return Err(format!(
            "sections must be exactly: {}",
            template.join(", ")
        ));
    }
    let mut placed: BTreeSet<ClaimId> = BTreeSet::new();
    let mut plans = Vec::with_capacity(blocks.len());
    for block in blocks {
        let mut body_parts: Vec<&str> = Vec::new();
        let mut claims = Vec::new();
        for line in &block.lines {
            if let Some(rest) = line.strip_prefix("body:") {
                body_parts.push(rest.trim());
            } else if let Some(rest) = line.strip_prefix("CLAIM ") {
                let (id, reword) = match rest.split_once(':') {
                    Some((id, text)) => {
                        let text = text.trim();
                        if text.is_empty() {
                            return Err(format!("empty rewording for claim {}", id.trim()));
                        }
                        (ClaimId::new(id.trim()), Some(text.to_owned()))
                    }
                    None => (ClaimId::new(rest.trim()), None),
                };
                if !expected.contains(&id) {
                    return Err(format!("unknown claim id {id}"));
                }
                if !placed.insert(id.clone()) {
                    return Err(format!("claim {id} placed more than once"));
                }
                claims.push((id, reword));
            } else {
                return Err(format!(
                    "unrecognized line in section {}: {line}",
                    block.header
                ));
            }
        }
        plans.push(SectionPlan {
            heading: block.header,
            body: body_parts.join(" "),
            claims,
        });
    }
    let missing: Vec<&ClaimId> = expected.iter().filter(|id| !placed.contains(id)).collect();
    if !missing.is_empty() {
        let ids: Vec<&str> = missing.iter().map(|id| id.as_str()).collect();
        return Err(format!("claims missing from the draft: {}", ids.join(", ")));
    }
    Ok(plans)
}

fn build_messages(
    research: &ResearchReport,
    query: &ResearchQuery,
    review_gaps: &[String],
    template: &[&str],
) -> Vec<ChatMessage> {
    let mut user = format!(
        "title: {}\naudience: {}\nlanguage: {}\nsections required, in order:\n",
        query.topic,
        query.audience.as_str(),
        query.primary_language()
    );
    for heading in template {
        user.push_str(&format!("- {heading}\n"));
    }
    user.push_str("\nfindings:\n");
    for finding in &research.findings {
        user.push_str(&format!(
            "{} [{} | {}]: {}\n",
            finding.claim.id, finding.source_id, finding.locator, finding.claim.text
        ));
        if !finding.annotation.is_empty() {
            user.push_str(&format!("  annotation: {}\n", finding.annotation));
        }
    }
    if !review_gaps.is_empty() {
        user.push_str("\nthe previous draft failed review; address these gaps:\n");
        for gap in review_gaps {
            user.push_str(&format!("- {gap}\n"));
        }
    }
    vec![
        ChatMessage::system(DRAFT_SYSTEM_PROMPT),
        ChatMessage::user(user),
    ]
}

/// Drafts the report. Rewordings are applied to the provenance graph first,
/// and the artifact always carries the graph's current claim text.
pub fn run_drafter(
    research: &ResearchReport,
    query: &ResearchQuery,
    review_gaps: &[String],
    graph: &mut ProvenanceGraph,
    binding: &ModelBinding,
    services: &StageServices,
) -> Result<ReportArtifact, PipelineError> {
    const STAGE: Stage = Stage::Draft;
    if research.findings.is_empty() {
        return Err(PipelineError::stage(
            STAGE,
            "cannot draft from empty research findings",
        ));
    }
    let template = section_template(query.audience);
    let by_id: BTreeMap<&ClaimId, &Finding> = research
        .findings
        .iter()
        .map(|f| (&f.claim.id, f))
        .collect();
    let expected: BTreeSet<ClaimId> = by_id.keys().map(|id| (*id).clone()).collect();
    let messages = build_messages(research, query, review_gaps, template);
    let plans = ask_with_one_reask(services, binding, STAGE, messages, |text| {
        parse_draft(text, template, &expected)
    })?;

    let mut sections = Vec::with_capacity(plans.len());
    for plan in plans {
        let mut claims = Vec::with_capacity(plan.claims.len());
        for (id, reword) in plan.claims {
            if let Some(new_text) = reword
                && graph.claim_text(&id) != Some(new_text.as_str())
            {
                graph.rewrite_claim(&id, &new_text, services.clock.now())?;
            }
            let text = graph
                .claim_text(&id)
                .ok_or_else(|| {
                    PipelineError::stage(STAGE, format!("claim {id} is not in the graph"))
                })?
                .to_owned();
            let finding = by_id[&id];
            claims.push(ClaimRef {
                claim: crate::core::Claim {
                    id: id.clone(),
                    text,
                    section_ref: Some(plan.heading.clone()),
                    confidence: finding.claim.confidence,
                },
                sources: vec![finding.source_id.clone()],
            });
        }
        sections.push(Section {
            heading: plan.heading,
            body: plan.body,
            claims,
            chart_refs: Vec::new(),
        });
    }
    let artifact = ReportArtifact {
        title: query.topic.clone(),
        audience: query.audience,
        language: query.primary_language().to_owned(),
        sections,
        bibliography: Vec::new(),
    };
    artifact
        .validate()
        .map_err(|e| PipelineError::stage(STAGE, e.to_string()))?;
    Ok(artifact)
}
