//! Translate stage: produce one structurally identical report per non-primary
//! target language.
//!
//! Structure checks are part of response parsing, so a violation gets the
//! standard single re-ask: section count and claim ids must match the source
//! report, every numeric token must survive byte-for-byte, and glossary terms
//! present in the source must be rendered with their required translation.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::backends::{ChatMessage, ModelBinding};
use crate::core::{Claim, ClaimId, ClaimRef, ReportArtifact, Section, Stage};
use crate::pipeline::stage::{PipelineError, StageServices, ask_with_one_reask, fenced_blocks};

const TRANSLATE_SYSTEM_PROMPT: &str = "You translate a carbon-market report \
into the requested language. Reply with a TITLE line followed by one block per \
source section, in the same order, and nothing else:\n\
TITLE: <translated title>\n\
SECTION <translated heading>\n\
body: <translated section prose>\n\
CLAIM <id>: <translated claim text>\n\
END\n\
Keep every claim id, keep numeric values byte-identical, and use the required \
glossary translations.";

/// Required term translations per target language.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Glossary {
    /// language -> source term -> required translation.
    pub terms: BTreeMap<String, BTreeMap<String, String>>,
}

impl Glossary {
    pub fn for_language(&self, language: &str) -> Option<&BTreeMap<String, String>> {
        self.terms.get(language)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TranslationBundle {
    pub translations: Vec<ReportArtifact>,
}

/// Digit-led tokens with their attached separators (`.,%`), trailing sentence
/// punctuation stripped, sorted. Two texts agree on their numbers iff these
/// multisets are byte-identical.
fn number_tokens(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    for c in text.chars() {
        if current.is_empty() {
            if c.is_ascii_digit() {
                current.push(c);
            }
        } else if c.is_ascii_digit() || matches!(c, '.' | ',' | '%') {
            current.push(c);
        } else {
            tokens.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    for token in &mut tokens {
        while token.ends_with('.') || token.ends_with(',') {
            token.pop();
        }
    }
    tokens.sort();
    tokens
}

/// Everything a reader sees, for the glossary scan.
fn artifact_text(artifact: &ReportArtifact) -> String {
    let mut text = artifact.title.clone();
    for section in &artifact.sections {
        text.push(' ');
        text.push_str(&section.heading);
        text.push(' ');
        text.push_str(&section.body);
        for claim_ref in &section.claims {
            text.push(' ');
            text.push_str(&claim_ref.claim.text);
        }
    }
    text
}

fn parse_translation(
    text: &str,
    source: &ReportArtifact,
    language: &str,
    glossary: Option<&BTreeMap<String, String>>,
) -> Result<ReportArtifact, String> {
    let title = text
        .lines()
        .map(str::trim)
        .find_map(|l| l.strip_prefix("TITLE:"))
        .map(str::trim)
        .ok_or("missing TITLE line")?
        .to_owned();
    if title.is_empty() {
        return Err("empty TITLE line".into());
    }
    let blocks = fenced_blocks(text, "SECTION")?;
    if blocks.len() != source.sections.len() {
        return Err(format!(
            "section count {}\u{2260}{}",
            blocks.len(),
            source.sections.len()
        ));
    }
    let mut sections = Vec::with_capacity(blocks.len());
    for (block, src_section) in blocks.iter().zip(&source.sections) {
        if block.header.is_empty() {
            return Err("SECTION heading missing".into());
        }
        let mut body_parts: Vec<&str> = Vec::new();
        let mut claims: Vec<(ClaimId, String)> = Vec::new();
        for line in &block.lines {
            if let Some(rest) = line.strip_prefix("body:") {
                body_parts.push(rest.trim());
            } else if let Some(rest) = line.strip_prefix("CLAIM ") {
                let (id, translated) = rest
                    .split_once(':')
                    .ok_or(format!("claim line without translated text: {line}"))?;
                let translated = translated.trim();
                if translated.is_empty() {
                    return Err(format!("empty translation for claim {}", id.trim()));
                }
                claims.push((ClaimId::new(id.trim()), translated.to_owned()));
            } else {
                return Err(format!(
                    "unrecognized line in section {}: {line}",
                    block.header
                ));
            }
        }
        let src_ids: Vec<&ClaimId> = src_section.claims.iter().map(|c| &c.claim.id).collect();
        if claims.len() != src_ids.len()
            || claims.iter().zip(&src_ids).any(|((id, _), want)| id != *want)
        {
            return Err(format!(
                "claim ids in section {} do not match source section {}",
                block.header, src_section.heading
            ));
        }
        let body = body_parts.join(" ");
        if number_tokens(&body) != number_tokens(&src_section.body) {
            return Err(format!("numbers differ in section {} body", block.header));
        }
        let mut claim_refs = Vec::with_capacity(claims.len());
        for ((id, translated), src_claim) in claims.into_iter().zip(&src_section.claims) {
            if number_tokens(&translated) != number_tokens(&src_claim.claim.text) {
                return Err(format!("numbers differ in claim {id}"));
            }
            claim_refs.push(ClaimRef {
                claim: Claim {
                    id,
                    text: translated,
                    section_ref: Some(block.header.clone()),
                    confidence: src_claim.claim.confidence,
                },
                sources: src_claim.sources.clone(),
            });
        }
        sections.push(Section {
            heading: block.header.clone(),
            body,
            claims: claim_refs,
            chart_refs: src_section.chart_refs.clone(),
        });
    }
    let translated = ReportArtifact {
        title,
        audience: source.audience,
        language: language.to_owned(),
        sections,
        bibliography: source.bibliography.clone(),
    };
    if let Some(map) = glossary {
        let source_text = artifact_text(source).to_lowercase();
        let translated_text = artifact_text(&translated);
        for (term, required) in map {
            if source_text.contains(&term.to_lowercase()) && !translated_text.contains(required) {
                return Err(format!(
                    "glossary term {term:?} must be rendered as {required:?}"
                ));
            }
        }
    }
    Ok(translated)
}

fn build_messages(
    report: &ReportArtifact,
    language: &str,
    glossary: Option<&BTreeMap<String, String>>,
) -> Vec<ChatMessage> {
    let mut user = format!("target language: {language}\n");
    if let Some(map) = glossary
        && !map.is_empty()
    {
        user.push_str("glossary (source term => required translation):\n");
        for (term, required) in map {
            user.push_str(&format!("- {term} => {required}\n"));
        }
    }
    user.push_str(&format!("\nsource report:\nTITLE: {}\n", report.title));
    for section in &report.sections {
        user.push_str(&format!("SECTION {}\n", section.heading));
        user.push_str(&format!("body: {}\n", section.body));
        for claim_ref in &section.claims {
            user.push_str(&format!(
                "CLAIM {}: {}\n",
                claim_ref.claim.id, claim_ref.claim.text
            ));
        }
        user.push_str("END\n");
    }
    vec![
        ChatMessage::system(TRANSLATE_SYSTEM_PROMPT),
        ChatMessage::user(user),
    ]
}

/// Translates the report into every target language other than its own.
/// Charts, bibliography, sources, and confidences carry over unchanged.
pub fn run_translator(
    report: &ReportArtifact,
    languages: &[String],
    glossary: &Glossary,
    binding: &ModelBinding,
    services: &StageServices,
) -> Result<TranslationBundle, PipelineError> {
    const STAGE: Stage = Stage::Translate;
    let mut bundle = TranslationBundle::default();
    for language in languages {
        if *language == report.language {
            continue;
        }
        let map = glossary.for_language(language);
        let messages = build_messages(report, language, map);
        let translated = ask_with_one_reask(services, binding, STAGE, messages, |text| {
            parse_translation(text, report, language, map)
        })
        .map_err(|e| match e {
            PipelineError::Stage { stage, detail } => PipelineError::Stage {
                stage,
                detail: format!("translation to {language} failed: {detail}"),
            },
            other => other,
        })?;
        bundle.translations.push(translated);
    }
    Ok(bundle)
}
