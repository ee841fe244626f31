//! Quality thresholds and the review gate.

use crate::pipeline::stage::fmt_f64;
use serde::{Deserialize, Serialize};

/// The four review thresholds. All comparisons are inclusive, so metrics
/// exactly at a threshold pass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityThresholds {
    pub min_coverage: f64,
    pub max_unresolved_conflicts: usize,
    pub max_uncited_claims: usize,
    pub min_mean_confidence: f64,
}

impl Default for QualityThresholds {
    fn default() -> Self {
        QualityThresholds {
            min_coverage: 0.95,
            max_unresolved_conflicts: 0,
            max_uncited_claims: 0,
            min_mean_confidence: 0.6,
        }
    }
}

impl QualityThresholds {
    pub fn validate(&self) -> Result<(), String> {
        if !(0.0..=1.0).contains(&self.min_coverage) {
            return Err(format!("min_coverage {} outside [0, 1]", self.min_coverage));
        }
        if !(0.0..=1.0).contains(&self.min_mean_confidence) {
            return Err(format!(
                "min_mean_confidence {} outside [0, 1]",
                self.min_mean_confidence
            ));
        }
        Ok(())
    }
}

/// The review metrics the gate judges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateMetrics {
    pub coverage: f64,
    pub unresolved_conflicts: usize,
    pub uncited_claims: usize,
    pub mean_confidence: f64,
}

/// Pass iff every threshold is met (inclusive). On failure the gap list
/// names each violated threshold with actual vs required.
pub fn quality_gate(metrics: &GateMetrics, t: &QualityThresholds) -> Result<(), Vec<String>> {
    let mut gaps = Vec::new();
    if metrics.coverage < t.min_coverage {
        gaps.push(format!(
            "coverage {} < {}",
            fmt_f64(metrics.coverage),
            fmt_f64(t.min_coverage)
        ));
    }
    if metrics.unresolved_conflicts > t.max_unresolved_conflicts {
        gaps.push(format!(
            "unresolved conflicts {} > {}",
            metrics.unresolved_conflicts, t.max_unresolved_conflicts
        ));
    }
    if metrics.uncited_claims > t.max_uncited_claims {
        gaps.push(format!(
            "uncited claims {} > {}",
            metrics.uncited_claims, t.max_uncited_claims
        ));
    }
    if metrics.mean_confidence < t.min_mean_confidence {
        gaps.push(format!(
            "mean confidence {} < {}",
            fmt_f64(metrics.mean_confidence),
            fmt_f64(t.min_mean_confidence)
        ));
    }
    if gaps.is_empty() { Ok(()) } else { Err(gaps) }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn metrics(coverage: f64, conflicts: usize, uncited: usize, confidence: f64) -> GateMetrics {
        GateMetrics {
            coverage,
            unresolved_conflicts: conflicts,
            uncited_claims: uncited,
            mean_confidence: confidence,
        }
    }

    #[test]
    fn clean_metrics_pass_defaults() {
        quality_gate(&metrics(1.0, 0, 0, 0.9), &QualityThresholds::default()).unwrap();
    }

    #[test]
    fn low_coverage_names_actual_and_required() {
        let gaps =
            quality_gate(&metrics(0.75, 0, 0, 0.9), &QualityThresholds::default()).unwrap_err();
        assert_eq!(gaps, vec!["coverage 0.75 < 0.95"]);
    }

    #[test]
    fn metrics_exactly_at_thresholds_pass() {
        // Inclusive comparisons on all four.
        quality_gate(&metrics(0.95, 0, 0, 0.6), &QualityThresholds::default()).unwrap();
    }

    #[test]
    fn every_violated_threshold_is_listed() {
        let gaps =
            quality_gate(&metrics(0.5, 2, 1, 0.1), &QualityThresholds::default()).unwrap_err();
        assert_eq!(
            gaps,
            vec![
                "coverage 0.5 < 0.95",
                "unresolved conflicts 2 > 0",
                "uncited claims 1 > 0",
                "mean confidence 0.1 < 0.6",
            ]
        );
    }

    #[test]
    fn threshold_ranges_validated() {
        let mut t = QualityThresholds::default();
        t.min_coverage = 1.2;
        assert!(t.validate().is_err());
        t.min_coverage = 0.95;
        t.min_mean_confidence = -0.1;
        assert!(t.validate().is_err());
        assert!(QualityThresholds::default().validate().is_ok());
    }
}
