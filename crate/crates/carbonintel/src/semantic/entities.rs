use crate::core::ParsedDocument;
use crate::semantic::text::tokenize;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::sync::OnceLock;
use thiserror::Error;

pub const DEFAULT_GAZETTEER: &str = include_str!("../../data/gazetteer.txt");
pub const DEFAULT_UNITS: &str = include_str!("../../data/units.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntityKind {
    Jurisdiction,
    Organisation,
    Instrument,
    Quantity,
    Date,
}

impl EntityKind {
    fn parse(text: &str) -> Option<Self> {
        match text {
            "jurisdiction" => Some(EntityKind::Jurisdiction),
            "organisation" => Some(EntityKind::Organisation),
            "instrument" => Some(EntityKind::Instrument),
            "quantity" => Some(EntityKind::Quantity),
            "date" => Some(EntityKind::Date),
            _ => None,
        }
    }
}

/// One recognized entity with its span (paragraph index plus character
/// offsets within that paragraph).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Entity {
    pub text: String,
    pub kind: EntityKind,
    /// Canonical form: gazetteer canonical name, "magnitude unit" for
    /// quantities, ISO-prefix form for dates (YYYY / YYYY-MM / YYYY-MM-DD).
    pub normalized: String,
    pub paragraph: usize,
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GazetteerError {
    #[error("gazetteer line {line}: expected 'canonical | kind | aliases', got {got:?}")]
    BadShape { line: usize, got: String },
    #[error("gazetteer line {line}: unknown kind {kind:?}")]
    UnknownKind { line: usize, kind: String },
    #[error("gazetteer line {line}: empty canonical name")]
    EmptyCanonical { line: usize },
}

/// Phrase dictionary for NER: canonical names with kinds and aliases, plus
/// the unit list for quantity matching.
#[derive(Debug, Clone)]
pub struct Gazetteer {
    // Lowercased word sequence -> (canonical, kind). Longest sequences win.
    phrases: BTreeMap<Vec<String>, (String, EntityKind)>,
    max_phrase_len: usize,
    // Lowercased unit token -> canonical unit casing.
    units: BTreeMap<String, String>,
}

impl Gazetteer {
    pub fn parse(gazetteer_text: &str, units_text: &str) -> Result<Self, GazetteerError> {
        let mut phrases = BTreeMap::new();
        let mut max_phrase_len = 0;
        for (idx, raw_line) in gazetteer_text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw_line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parts: Vec<&str> = line.split('|').collect();
            if parts.len() != 3 {
                return Err(GazetteerError::BadShape {
                    line: line_no,
                    got: line.to_owned(),
                });
            }
            let canonical = parts[0].trim();
            if canonical.is_empty() {
                return Err(GazetteerError::EmptyCanonical { line: line_no });
            }
            let kind = EntityKind::parse(parts[1].trim()).ok_or_else(|| {
                GazetteerError::UnknownKind {
                    line: line_no,
                    kind: parts[1].trim().to_owned(),
                }
            })?;
            let mut surfaces = vec![canonical.to_owned()];
            surfaces.extend(
                parts[2]
                    .split(';')
                    .map(str::trim)
                    .filter(|a| !a.is_empty())
                    .map(str::to_owned),
            );
            for surface in surfaces {
                let key: Vec<String> =
                    tokenize(&surface).into_iter().map(|t| t.text.to_lowercase()).collect();
                if key.is_empty() {
                    continue;
                }
                max_phrase_len = max_phrase_len.max(key.len());
                phrases.insert(key, (canonical.to_owned(), kind));
            }
        }
        let units = units_text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(|u| (u.to_lowercase(), u.to_owned()))
            .collect();
        Ok(Gazetteer {
            phrases,
            max_phrase_len,
            units,
        })
    }

    pub fn builtin() -> &'static Gazetteer {
        static BUILTIN: OnceLock<Gazetteer> = OnceLock::new();
        BUILTIN.get_or_init(|| {
            Gazetteer::parse(DEFAULT_GAZETTEER, DEFAULT_UNITS)
                .expect("builtin gazetteer is well-formed")
        })
    }

    fn lookup(&self, key: &[String]) -> Option<&(String, EntityKind)> {
        self.phrases.get(key)
    }

    fn canonical_unit(&self, token: &str) -> Option<&str> {
        self.units.get(&token.to_lowercase()).map(|u| u.as_str())
    }
}

const MONTHS: [&str; 12] = [
    "january", "february", "march", "april", "may", "june", "july", "august", "september",
    "october", "november", "december",
];

/// Extract entities from every paragraph: gazetteer phrases first
/// (longest-match, case-insensitive, greedy left-to-right), then quantities
/// (number + unit) and dates (ISO, "Month YYYY", bare 19xx/20xx year) over
/// the tokens the gazetteer did not consume. Output ordered by span.
pub fn extract_entities(doc: &ParsedDocument, gazetteer: &Gazetteer) -> Vec<Entity> {
    let mut entities = Vec::new();
    for (paragraph_idx, paragraph) in doc.body.iter().enumerate() {
        extract_from_paragraph(paragraph, paragraph_idx, gazetteer, &mut entities);
    }
    entities.sort_by_key(|e| (e.paragraph, e.start, e.end));
    entities
}

fn extract_from_paragraph(
    paragraph: &str,
    paragraph_idx: usize,
    gazetteer: &Gazetteer,
    out: &mut Vec<Entity>,
) {
    let tokens = tokenize(paragraph);
    let lowered: Vec<String> = tokens.iter().map(|t| t.text.to_lowercase()).collect();
    let chars: Vec<char> = paragraph.chars().collect();
    let mut consumed = vec![false; tokens.len()];

    // Gazetteer pass: at each position try the longest phrase first.
    let mut i = 0;
    while i < tokens.len() {
        let mut matched = None;
        let max_len = gazetteer.max_phrase_len.min(tokens.len() - i);
        for len in (1..=max_len).rev() {
            if let Some((canonical, kind)) = gazetteer.lookup(&lowered[i..i + len]) {
                matched = Some((len, canonical.clone(), *kind));
                break;
            }
        }
        if let Some((len, canonical, kind)) = matched {
            let start = tokens[i].start;
            let end = tokens[i + len - 1].end;
            out.push(Entity {
                text: chars[start..end].iter().collect(),
                kind,
                normalized: canonical,
                paragraph: paragraph_idx,
                start,
                end,
            });
            for c in consumed.iter_mut().skip(i).take(len) {
                *c = true;
            }
            i += len;
        } else {
            i += 1;
        }
    }

    // Quantity and date pass over unconsumed tokens.
    let mut i = 0;
    while i < tokens.len() {
        if consumed[i] {
            i += 1;
            continue;
        }
        let token = &tokens[i];

        if let Some(magnitude) = parse_magnitude(&token.text) {
            let next_free = i + 1 < tokens.len() && !consumed[i + 1];
            if next_free {
                if let Some(unit) = gazetteer.canonical_unit(&tokens[i + 1].text) {
                    let start = token.start;
                    let end = tokens[i + 1].end;
                    out.push(Entity {
                        text: chars[start..end].iter().collect(),
                        kind: EntityKind::Quantity,
                        normalized: format!("{} {}", format_magnitude(magnitude), unit),
                        paragraph: paragraph_idx,
                        start,
                        end,
                    });
                    consumed[i] = true;
                    consumed[i + 1] = true;
                    i += 2;
                    continue;
                }
            }
        }

        if let Some(normalized) = parse_date_token(&token.text) {
            out.push(Entity {
                text: token.text.clone(),
                kind: EntityKind::Date,
                normalized,
                paragraph: paragraph_idx,
                start: token.start,
                end: token.end,
            });
            consumed[i] = true;
            i += 1;
            continue;
        }

        // "Month YYYY" pair.
        if i + 1 < tokens.len() && !consumed[i + 1] {
            if let Some(month) = month_number(&lowered[i]) {
                if let Some(year) = parse_year(&tokens[i + 1].text) {
                    let start = token.start;
                    let end = tokens[i + 1].end;
                    out.push(Entity {
                        text: chars[start..end].iter().collect(),
                        kind: EntityKind::Date,
                        normalized: format!("{year}-{month:02}"),
                        paragraph: paragraph_idx,
                        start,
                        end,
                    });
                    consumed[i] = true;
                    consumed[i + 1] = true;
                    i += 2;
                    continue;
                }
            }
        }

        if let Some(year) = parse_year(&token.text) {
            out.push(Entity {
                text: token.text.clone(),
                kind: EntityKind::Date,
                normalized: year.to_string(),
                paragraph: paragraph_idx,
                start: token.start,
                end: token.end,
            });
            consumed[i] = true;
        }
        i += 1;
    }
}

fn parse_magnitude(token: &str) -> Option<f64> {
    if token.chars().next()?.is_ascii_digit() {
        token.parse::<f64>().ok()
    } else {
        None
    }
}

fn format_magnitude(m: f64) -> String {
    if m.fract() == 0.0 && m.abs() < 1e15 {
        format!("{}", m as i64)
    } else {
        format!("{m}")
    }
}

fn parse_date_token(token: &str) -> Option<String> {
    // Full ISO date as one token (the tokenizer keeps the hyphens).
    if token.len() == 10 && token.parse::<chrono::NaiveDate>().is_ok() {
        return Some(token.to_owned());
    }
    None
}

fn parse_year(token: &str) -> Option<u32> {
    if token.len() == 4 && (token.starts_with("19") || token.starts_with("20")) {
        token.parse::<u32>().ok()
    } else {
        None
    }
}

fn month_number(word: &str) -> Option<usize> {
    MONTHS.iter().position(|m| *m == word).map(|i| i + 1)
}

/// Distinct jurisdiction names mentioned in a document, sorted. Parsers
/// leave jurisdiction_tags empty; this is the downstream pass that fills
/// them.
pub fn tag_jurisdictions(doc: &ParsedDocument, gazetteer: &Gazetteer) -> Vec<String> {
    let mut tags: Vec<String> = extract_entities(doc, gazetteer)
        .into_iter()
        .filter(|e| e.kind == EntityKind::Jurisdiction)
        .map(|e| e.normalized)
        .collect();
    tags.sort();
    tags.dedup();
    tags
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::SourceId;

    fn doc(paragraphs: &[&str]) -> ParsedDocument {
        ParsedDocument {
            source_id: SourceId::from("src-t"),
            title: "t".into(),
            body: paragraphs.iter().map(|p| p.to_string()).collect(),
            tables: vec![],
            jurisdiction_tags: vec![],
            language: "en".into(),
        }
    }

    #[test]
    fn direct_gazetteer_hit() {
        let g = Gazetteer::parse("EU ETS | instrument |", "").unwrap();
        let entities = extract_entities(&doc(&["The EU ETS covers power."]), &g);
        assert_eq!(entities.len(), 1);
        assert_eq!(entities[0].kind, EntityKind::Instrument);
        assert_eq!(entities[0].normalized, "EU ETS");
        assert_eq!(entities[0].text, "EU ETS");
    }

    #[test]
    fn longest_match_wins_over_prefix() {
        let g = Gazetteer::parse(
            "European Union | jurisdiction | EU\nEU ETS | instrument |",
            "",
        )
        .unwrap();
        let entities = extract_entities(&doc(&["EU ETS reform passed."]), &g);
        assert_eq!(entities.len(), 1);
        assert_eq!(entities[0].normalized, "EU ETS");
    }

    #[test]
    fn quantity_and_year_from_fixture() {
        let g = Gazetteer::parse("", "MtCO2e\n").unwrap();
        let entities = extract_entities(&doc(&["45 MtCO2e by 2030"]), &g);
        assert_eq!(entities.len(), 2);
        assert_eq!(entities[0].kind, EntityKind::Quantity);
        assert_eq!(entities[0].normalized, "45 MtCO2e");
        assert_eq!((entities[0].start, entities[0].end), (0, 9));
        assert_eq!(entities[1].kind, EntityKind::Date);
        assert_eq!(entities[1].normalized, "2030");
        assert_eq!((entities[1].start, entities[1].end), (13, 17));
    }

    #[test]
    fn empty_body_yields_no_entities() {
        let g = Gazetteer::builtin();
        assert!(extract_entities(&doc(&[]), g).is_empty());
    }

    #[test]
    fn month_year_and_iso_dates() {
        let g = Gazetteer::parse("", "").unwrap();
        let entities = extract_entities(&doc(&["From March 2024 until 2024-06-30."]), &g);
        let normals: Vec<&str> = entities.iter().map(|e| e.normalized.as_str()).collect();
        assert_eq!(normals, vec!["2024-03", "2024-06-30"]);
    }

    #[test]
    fn case_insensitive_alias_normalizes_to_canonical() {
        let g = Gazetteer::parse("South Korea | jurisdiction | Korea", "").unwrap();
        let entities = extract_entities(&doc(&["korea expands trading."]), &g);
        assert_eq!(entities[0].normalized, "South Korea");
        assert_eq!(entities[0].text, "korea");
    }

    #[test]
    fn gazetteer_spans_never_overlap() {
        let g = Gazetteer::builtin();
        let entities = extract_entities(
            &doc(&["The European Union and the EU ETS and South Korea met."]),
            g,
        );
        let mut gaz: Vec<&Entity> = entities
            .iter()
            .filter(|e| !matches!(e.kind, EntityKind::Quantity | EntityKind::Date))
            .collect();
        gaz.sort_by_key(|e| e.start);
        for pair in gaz.windows(2) {
            assert!(pair[0].end <= pair[1].start);
        }
    }

    #[test]
    fn malformed_gazetteer_lines_rejected() {
        assert_eq!(
            Gazetteer::parse("only one field", "").unwrap_err(),
            GazetteerError::BadShape {
                line: 1,
                got: "only one field".into()
            }
        );
        assert_eq!(
            Gazetteer::parse("X | mineral |", "").unwrap_err(),
            GazetteerError::UnknownKind {
                line: 1,
                kind: "mineral".into()
            }
        );
    }

    #[test]
    fn jurisdiction_tagging_distinct_sorted() {
        let g = Gazetteer::builtin();
        let d = doc(&["Brazil and South Korea.", "Brazil again."]);
        assert_eq!(tag_jurisdictions(&d, g), vec!["Brazil", "South Korea"]);
    }

    #[test]
    fn percent_quantity() {
        let g = Gazetteer::parse("", "%\n").unwrap();
        let entities = extract_entities(&doc(&["emissions fell 45% overall"]), &g);
        assert_eq!(entities.len(), 1);
        assert_eq!(entities[0].normalized, "45 %");
    }
}
