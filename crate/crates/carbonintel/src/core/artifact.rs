use super::query::Audience;
use super::types::{Claim, ClaimId, CoreError, SourceId};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

/// A claim placed in a section, with the sources that back it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClaimRef {
    pub claim: Claim,
    pub sources: Vec<SourceId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Section {
    pub heading: String,
    pub body: String,
    pub claims: Vec<ClaimRef>,
    pub chart_refs: Vec<String>,
}

/// A structured report: ordered sections, each claim appearing exactly once,
/// plus an ordered formatted bibliography.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportArtifact {
    pub title: String,
    pub audience: Audience,
    pub language: String,
    pub sections: Vec<Section>,
    pub bibliography: Vec<String>,
}

impl ReportArtifact {
    pub fn validate(&self) -> Result<(), CoreError> {
        if self.title.trim().is_empty() {
            return Err(CoreError::EmptyField("report title"));
        }
        let mut seen: BTreeSet<&ClaimId> = BTreeSet::new();
        for section in &self.sections {
            if section.heading.trim().is_empty() {
                return Err(CoreError::EmptyField("section heading"));
            }
            for claim_ref in &section.claims {
                claim_ref.claim.validate()?;
                if !seen.insert(&claim_ref.claim.id) {
                    return Err(CoreError::DuplicateClaim(claim_ref.claim.id.clone()));
                }
            }
        }
        Ok(())
    }

    pub fn claims(&self) -> impl Iterator<Item = &ClaimRef> {
        self.sections.iter().flat_map(|s| s.claims.iter())
    }

    pub fn claim_count(&self) -> usize {
        self.claims().count()
    }

    pub fn claim_ids(&self) -> BTreeSet<ClaimId> {
        self.claims().map(|c| c.claim.id.clone()).collect()
    }

    pub fn find_claim(&self, id: &ClaimId) -> Option<&ClaimRef> {
        self.claims().find(|c| &c.claim.id == id)
    }

    pub fn chart_refs(&self) -> impl Iterator<Item = &str> {
        self.sections
            .iter()
            .flat_map(|s| s.chart_refs.iter().map(|r| r.as_str()))
    }

    /// Replace the text of one claim, returning the previous text.
    pub fn reword_claim(&mut self, id: &ClaimId, new_text: &str) -> Option<String> {
        for section in &mut self.sections {
            for claim_ref in &mut section.claims {
                if &claim_ref.claim.id == id {
                    let old = std::mem::replace(&mut claim_ref.claim.text, new_text.to_owned());
                    return Some(old);
                }
            }
        }
        None
    }

    pub fn set_confidence(&mut self, id: &ClaimId, confidence: f64) -> bool {
        for section in &mut self.sections {
            for claim_ref in &mut section.claims {
                if &claim_ref.claim.id == id {
                    claim_ref.claim.confidence = confidence;
                    return true;
                }
            }
        }
        false
    }

    /// Deterministic markdown rendering: title, sections with claim lines
    /// carrying citation markers and chart references, then bibliography.
    pub fn render_markdown(&self) -> String {
        let mut out = String::new();
        out.push_str("# ");
        out.push_str(&self.title);
        out.push('\n');
        for section in &self.sections {
            out.push_str("\n## ");
            out.push_str(&section.heading);
            out.push_str("\n\n");
            if !section.body.is_empty() {
                out.push_str(&section.body);
                out.push_str("\n\n");
            }
            for claim_ref in &section.claims {
                out.push_str("- ");
                out.push_str(&claim_ref.claim.text);
                for source in &claim_ref.sources {
                    out.push_str(&format!(" [{}]", source));
                }
                out.push('\n');
            }
            for chart_ref in &section.chart_refs {
                out.push_str(&format!("\n![chart](charts/{}.json)\n", chart_ref));
            }
        }
        if !self.bibliography.is_empty() {
            out.push_str("\n## References\n\n");
            for entry in &self.bibliography {
                out.push_str(entry);
                out.push('\n');
            }
        }
        out
    }
}
