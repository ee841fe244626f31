//! Shared tokenization and stopword handling. Every module that compares
//! terms (retrieval, topics, citation verification) goes through these
//! helpers so the notion of a "content term" is uniform.

use std::collections::BTreeSet;
use std::sync::OnceLock;

pub const DEFAULT_STOPWORDS: &str = include_str!("../../data/stopwords.txt");

/// A token with its character span in the input string.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub text: String,
    pub start: usize,
    pub end: usize,
}

/// Split text into alphanumeric word tokens with character offsets.
/// Tokens keep their original casing; '%' forms its own token so that
/// "45%" yields ["45", "%"]; '-' and '.' are kept inside tokens when
/// surrounded by alphanumerics ("K-ETS", "83.5", "2024-01-02").
pub fn tokenize(text: &str) -> Vec<Token> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c == '%' {
            tokens.push(Token {
                text: "%".into(),
                start: i,
                end: i + 1,
            });
            i += 1;
            continue;
        }
        if c.is_alphanumeric() {
            let start = i;
            let mut buf = String::new();
            while i < chars.len() {
                let c = chars[i];
                if c.is_alphanumeric() {
                    buf.push(c);
                    i += 1;
                } else if matches!(c, '-' | '.')
                    && i + 1 < chars.len()
                    && chars[i + 1].is_alphanumeric()
                {
                    buf.push(c);
                    i += 1;
                } else {
                    break;
                }
            }
            tokens.push(Token {
                text: buf,
                start,
                end: i,
            });
            continue;
        }
        i += 1;
    }
    tokens
}

/// Lowercased word tokens (no offsets).
pub fn words(text: &str) -> Vec<String> {
    tokenize(text)
        .into_iter()
        .map(|t| t.text.to_lowercase())
        .collect()
}

pub fn parse_stopwords(data: &str) -> BTreeSet<String> {
    data.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| l.to_lowercase())
        .collect()
}

pub fn default_stopwords() -> &'static BTreeSet<String> {
    static SET: OnceLock<BTreeSet<String>> = OnceLock::new();
    SET.get_or_init(|| parse_stopwords(DEFAULT_STOPWORDS))
}

/// Distinct lowercased non-stopword terms of a text.
pub fn content_terms(text: &str, stopwords: &BTreeSet<String>) -> BTreeSet<String> {
    words(text)
        .into_iter()
        .filter(|w| !stopwords.contains(w))
        .collect()
}

/// All numeric magnitudes mentioned in a text, in order of appearance.
pub fn extract_numbers(text: &str) -> Vec<f64> {
    tokenize(text)
        .into_iter()
        .filter_map(|t| {
            let cleaned = t.text.replace(',', "");
            if cleaned.chars().next()?.is_ascii_digit() {
                cleaned.parse::<f64>().ok()
            } else {
                None
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokenizer_keeps_offsets_and_compounds() {
        let tokens = tokenize("EU ETS caps 45 MtCO2e (K-ETS).");
        let texts: Vec<&str> = tokens.iter().map(|t| t.text.as_str()).collect();
        assert_eq!(texts, vec!["EU", "ETS", "caps", "45", "MtCO2e", "K-ETS"]);
        assert_eq!(tokens[0].start, 0);
        assert_eq!(tokens[0].end, 2);
        assert_eq!(tokens[3].start, 12);
        assert_eq!(tokens[3].end, 14);
    }

    #[test]
    fn percent_is_its_own_token() {
        let texts: Vec<String> = tokenize("up 45% today").into_iter().map(|t| t.text).collect();
        assert_eq!(texts, vec!["up", "45", "%", "today"]);
    }

    #[test]
    fn decimal_and_date_tokens_stay_joined() {
        let texts: Vec<String> = tokenize("83.5 on 2024-01-02").into_iter().map(|t| t.text).collect();
        assert_eq!(texts, vec!["83.5", "on", "2024-01-02"]);
    }

    #[test]
    fn content_terms_drop_stopwords() {
        let sw = default_stopwords();
        let terms = content_terms("The price of carbon rose.", sw);
        assert!(terms.contains("carbon"));
        assert!(terms.contains("price"));
        assert!(!terms.contains("the"));
        assert!(!terms.contains("of"));
    }

    #[test]
    fn numbers_extracted_in_order() {
        assert_eq!(extract_numbers("price 83.5 then 90 EUR"), vec![83.5, 90.0]);
        assert_eq!(extract_numbers("no numerals"), Vec::<f64>::new());
    }
}
