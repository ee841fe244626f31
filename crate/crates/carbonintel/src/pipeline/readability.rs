//! Reading-ease scoring for audience-targeted drafts.
//!
//! score = 206.835 - 1.015 * (words / sentences) - 84.6 * (syllables / words)
//!
//! Syllables per word: count maximal vowel runs (a e i o u y) over the
//! word's lowercased alphabetic characters, subtract one for a trailing
//! silent 'e' (but not '-le') when more than one run remains, minimum one.
//! Sentences are '.', '!' or '?' occurrences; words are whitespace tokens
//! containing at least one letter. Both floor at one to stay defined.

use crate::core::Audience;

pub fn syllable_count(word: &str) -> usize {
    let letters: String = word
        .chars()
        .filter(|c| c.is_alphabetic())
        .flat_map(|c| c.to_lowercase())
        .collect();
    if letters.is_empty() {
        return 0;
    }
    let is_vowel = |c: char| matches!(c, 'a' | 'e' | 'i' | 'o' | 'u' | 'y');
    let mut groups = 0usize;
    let mut in_group = false;
    for c in letters.chars() {
        if is_vowel(c) {
            if !in_group {
                groups += 1;
            }
            in_group = true;
        } else {
            in_group = false;
        }
    }
    if groups > 1 && letters.ends_with('e') && !letters.ends_with("le") {
        groups -= 1;
    }
    groups.max(1)
}

pub fn reading_ease(text: &str) -> f64 {
    let tokens: Vec<&str> = text.split_whitespace().collect();
    let words = tokens
        .iter()
        .filter(|t| t.chars().any(char::is_alphabetic))
        .count()
        .max(1);
    let sentences = text
        .chars()
        .filter(|c| matches!(c, '.' | '!' | '?'))
        .count()
        .max(1);
    let syllables: usize = tokens.iter().map(|t| syllable_count(t)).sum();
    206.835 - 1.015 * (words as f64 / sentences as f64) - 84.6 * (syllables as f64 / words as f64)
}

/// Target reading-ease band per audience, as (low, high]. Analysts accept
/// denser text; general audiences require plain language.
pub fn target_band(audience: Audience) -> (f64, f64) {
    match audience {
        Audience::Policymaker | Audience::Investor => (40.0, 60.0),
        Audience::SustainabilityAnalyst => (20.0, 50.0),
        Audience::General => (60.0, 100.0),
    }
}

pub fn in_band(score: f64, audience: Audience) -> bool {
    let (low, high) = target_band(audience);
    low < score && score <= high
}
