//! Double-blind report labeling.
//!
//! Reports enter with an identity (who produced them) and leave labeled
//! "Report A", "Report B", ... in an order drawn from a seeded shuffle.
//! Judges only ever see labels and text. The reverse mapping stays sealed
//! inside the assignment until `unseal` is called after scoring.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;

use crate::evaluation::EvalError;

/// Labels are single letters, so at most 26 reports per assignment.
const MAX_REPORTS: usize = 26;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledReport {
    pub label: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlindAssignment {
    seed: u64,
    /// (identity, label), in input order.
    mapping: Vec<(String, String)>,
    /// Labeled texts in label order; what judges see.
    labeled: Vec<LabeledReport>,
}

impl BlindAssignment {
    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn label_for(&self, identity: &str) -> Option<&str> {
        self.mapping
            .iter()
            .find(|(id, _)| id == identity)
            .map(|(_, label)| label.as_str())
    }

    /// The anonymized reports, sorted by label.
    pub fn labeled_reports(&self) -> &[LabeledReport] {
        &self.labeled
    }

    /// Breaks the blind: label to identity. Call only after scoring.
    pub fn unseal(&self) -> BTreeMap<String, String> {
        self.mapping
            .iter()
            .map(|(id, label)| (label.clone(), id.clone()))
            .collect()
    }
}

fn label(i: usize) -> String {
    format!("Report {}", (b'A' + i as u8) as char)
}

/// Assigns anonymous labels to `(identity, text)` pairs using a shuffle
/// seeded by `seed`, scanning every text for every identity token first.
/// A text that mentions any report's identity cannot be blinded.
pub fn blind_assign(reports: &[(String, String)], seed: u64) -> Result<BlindAssignment, EvalError> {
    if reports.len() < 2 {
        return Err(EvalError::Blinding(format!(
            "need at least 2 reports, got {}",
            reports.len()
        )));
    }
    if reports.len() > MAX_REPORTS {
        return Err(EvalError::Blinding(format!(
            "at most {MAX_REPORTS} reports per assignment, got {}",
            reports.len()
        )));
    }
    let mut seen = std::collections::BTreeSet::new();
    for (identity, _) in reports {
        if identity.trim().is_empty() {
            return Err(EvalError::Blinding("report with an empty identity".into()));
        }
        if !seen.insert(identity.as_str()) {
            return Err(EvalError::Blinding(format!(
                "duplicate report identity {identity:?}"
            )));
        }
    }
    let tokens: Vec<String> = reports.iter().map(|(id, _)| id.to_lowercase()).collect();
    for (identity, text) in reports {
        let lowered = text.to_lowercase();
        for token in &tokens {
            if lowered.contains(token) {
                return Err(EvalError::Blinding(format!(
                    "identity token {token:?} appears in the text of {identity:?}; \
                     scrub report texts before blinding"
                )));
            }
        }
    }

    // order[i] is the input index that receives label i.
    let mut order: Vec<usize> = (0..reports.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);

    let mut mapping = vec![(String::new(), String::new()); reports.len()];
    let mut labeled = Vec::with_capacity(reports.len());
    for (i, &input) in order.iter().enumerate() {
        let (identity, text) = &reports[input];
        mapping[input] = (identity.clone(), label(i));
        labeled.push(LabeledReport {
            label: label(i),
            text: text.clone(),
        });
    }
    Ok(BlindAssignment {
        seed,
        mapping,
        labeled,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reports() -> Vec<(String, String)> {
        vec![
            ("alpha-engine".into(), "Prices rose in 2024.".into()),
            ("expert-panel".into(), "Volumes held steady.".into()),
        ]
    }

    #[test]
    fn same_seed_reproduces_the_assignment() {
        let a = blind_assign(&reports(), 42).unwrap();
        let b = blind_assign(&reports(), 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.seed(), 42);
    }

    #[test]
    fn labels_are_a_bijection_over_report_letters() {
        let a = blind_assign(&reports(), 7).unwrap();
        let mut labels: Vec<String> = reports()
            .iter()
            .map(|(id, _)| a.label_for(id).unwrap().to_owned())
            .collect();
        labels.sort_unstable();
        assert_eq!(labels, ["Report A", "Report B"]);
        assert_eq!(a.labeled_reports().len(), 2);
        assert_eq!(a.labeled_reports()[0].label, "Report A");
        assert_eq!(a.labeled_reports()[1].label, "Report B");
    }

    #[test]
    fn unseal_inverts_the_mapping() {
        let a = blind_assign(&reports(), 3).unwrap();
        let unsealed = a.unseal();
        for (identity, _) in reports() {
            let label = a.label_for(&identity).unwrap();
            assert_eq!(unsealed[label], identity);
        }
    }

    #[test]
    fn identity_token_in_any_text_is_a_blinding_failure() {
        let mut bad = reports();
        bad[1].1 = "As Alpha-Engine reported, volumes held steady.".into();
        let err = blind_assign(&bad, 1).unwrap_err();
        assert!(err.to_string().contains("alpha-engine"), "{err}");
        assert!(err.to_string().contains("expert-panel"), "names the host report");
    }

    #[test]
    fn fewer_than_two_reports_is_an_error() {
        let one = vec![("solo".to_string(), "text".to_string())];
        let err = blind_assign(&one, 0).unwrap_err();
        assert!(err.to_string().contains("at least 2"), "{err}");
    }

    #[test]
    fn duplicate_identities_are_rejected() {
        let mut dup = reports();
        dup[1].0 = "alpha-engine".into();
        let err = blind_assign(&dup, 0).unwrap_err();
        assert!(err.to_string().contains("duplicate report identity"), "{err}");
    }

    #[test]
    fn orderings_over_1000_seeds_are_uniform_by_chi_square() {
        // Two reports, two orderings; chi-square with 1 degree of freedom,
        // alpha = 0.01 critical value 6.635.
        let mut first_gets_a = 0u32;
        let trials = 1000;
        for seed in 0..trials {
            let a = blind_assign(&reports(), seed).unwrap();
            if a.label_for("alpha-engine") == Some("Report A") {
                first_gets_a += 1;
            }
        }
        let expected = trials as f64 / 2.0;
        let other = trials - first_gets_a;
        let chi2 = (first_gets_a as f64 - expected).powi(2) / expected
            + (other as f64 - expected).powi(2) / expected;
        assert!(chi2 < 6.635, "chi2 = {chi2}, counts {first_gets_a}/{other}");
    }
}
