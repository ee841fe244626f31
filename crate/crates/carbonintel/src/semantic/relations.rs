use crate::semantic::entities::Entity;
use serde::{Deserialize, Serialize};
use std::sync::OnceLock;
use thiserror::Error;

pub const DEFAULT_PATTERNS: &str = include_str!("../../data/patterns.txt");
pub const CO_OCCURRENCE_PREDICATE: &str = "co_occurs";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationTriple {
    pub subject: Entity,
    pub predicate: String,
    pub object: Entity,
    /// (paragraph index, sentence start, sentence end) in character offsets.
    pub sentence: (usize, usize, usize),
    pub confidence: f64,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PatternError {
    #[error("pattern line {line}: expected 'id | phrase', got {got:?}")]
    BadShape { line: usize, got: String },
}

/// Ordered list of (pattern id, normalized phrase).
#[derive(Debug, Clone)]
pub struct PatternList {
    patterns: Vec<(String, String)>,
}

impl PatternList {
    pub fn parse(text: &str) -> Result<Self, PatternError> {
        let mut patterns = Vec::new();
        for (idx, raw_line) in text.lines().enumerate() {
            let line = raw_line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((id, phrase)) = line.split_once('|') else {
                return Err(PatternError::BadShape {
                    line: idx + 1,
                    got: line.to_owned(),
                });
            };
            patterns.push((id.trim().to_owned(), normalize_phrase(phrase)));
        }
        Ok(PatternList { patterns })
    }

    pub fn builtin() -> &'static PatternList {
        static BUILTIN: OnceLock<PatternList> = OnceLock::new();
        BUILTIN
            .get_or_init(|| PatternList::parse(DEFAULT_PATTERNS).expect("builtin patterns parse"))
    }

    fn match_phrase(&self, intervening: &str) -> Option<&str> {
        let normalized = normalize_phrase(intervening);
        self.patterns
            .iter()
            .find(|(_, phrase)| *phrase == normalized)
            .map(|(id, _)| id.as_str())
    }
}

fn normalize_phrase(text: &str) -> String {
    text.split_whitespace()
        .map(|w| w.trim_matches(|c: char| !c.is_alphanumeric()).to_lowercase())
        .filter(|w| !w.is_empty())
        .collect::<Vec<_>>()
        .join(" ")
}

/// For each sentence holding two or more entities, emit a triple for every
/// ordered entity pair whose intervening text equals a pattern phrase
/// (confidence 1.0). With `emit_co_occurrence`, pairs with no pattern match
/// still produce a low-confidence triple.
pub fn extract_relationships(
    paragraphs: &[String],
    entities: &[Entity],
    patterns: &PatternList,
    emit_co_occurrence: bool,
) -> Vec<RelationTriple> {
    let mut triples = Vec::new();
    for (paragraph_idx, paragraph) in paragraphs.iter().enumerate() {
        let chars: Vec<char> = paragraph.chars().collect();
        for (sent_start, sent_end) in sentence_spans(&chars) {
            let in_sentence: Vec<&Entity> = entities
                .iter()
                .filter(|e| {
                    e.paragraph == paragraph_idx && e.start >= sent_start && e.end <= sent_end
                })
                .collect();
            for (i, subject) in in_sentence.iter().enumerate() {
                for object in in_sentence.iter().skip(i + 1) {
                    if subject.end > object.start {
                        continue;
                    }
                    let intervening: String =
                        chars[subject.end..object.start].iter().collect();
                    match patterns.match_phrase(&intervening) {
                        Some(id) => triples.push(RelationTriple {
                            subject: (*subject).clone(),
                            predicate: id.to_owned(),
                            object: (*object).clone(),
                            sentence: (paragraph_idx, sent_start, sent_end),
                            confidence: 1.0,
                        }),
                        None if emit_co_occurrence => triples.push(RelationTriple {
                            subject: (*subject).clone(),
                            predicate: CO_OCCURRENCE_PREDICATE.to_owned(),
                            object: (*object).clone(),
                            sentence: (paragraph_idx, sent_start, sent_end),
                            confidence: 0.5,
                        }),
                        None => {}
                    }
                }
            }
        }
    }
    triples
}

/// Sentence boundaries: '.', '!', '?' followed by whitespace or end of
/// text. Returns character spans excluding the terminator.
fn sentence_spans(chars: &[char]) -> Vec<(usize, usize)> {
    let mut spans = Vec::new();
    let mut start = 0;
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if matches!(c, '.' | '!' | '?')
            && (i + 1 >= chars.len() || chars[i + 1].is_whitespace())
        {
            if i > start {
                spans.push((start, i));
            }
            i += 1;
            while i < chars.len() && chars[i].is_whitespace() {
                i += 1;
            }
            start = i;
            continue;
        }
        i += 1;
    }
    if start < chars.len() {
        spans.push((start, chars.len()));
    }
    spans
}
