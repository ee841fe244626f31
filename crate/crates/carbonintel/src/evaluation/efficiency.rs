//! Efficiency and coverage metrics against expert baselines.
//!
//! Expert baselines arrive as (low, high) ranges; reductions are computed
//! against the range midpoint. Reference figures from the production
//! deployment ride along for side-by-side display; they are labels on
//! output, never test expectations.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::evaluation::EvalError;
use crate::pipeline::RunMetrics;

fn positive(value: f64, what: &str) -> Result<(), EvalError> {
    if !value.is_finite() || value <= 0.0 {
        return Err(EvalError::Input(format!("{what} must be positive, got {value}")));
    }
    Ok(())
}

fn midpoint(range: (f64, f64), what: &str) -> Result<f64, EvalError> {
    positive(range.0, &format!("{what} low"))?;
    positive(range.1, &format!("{what} high"))?;
    if range.0 > range.1 {
        return Err(EvalError::Input(format!(
            "{what} low {} exceeds high {}",
            range.0, range.1
        )));
    }
    Ok((range.0 + range.1) / 2.0)
}

/// Percentage reduction of automated minutes against the midpoint of an
/// expert-hours range: `100 * (1 - auto_minutes / (midpoint_hours * 60))`.
pub fn time_reduction(expert_hours: (f64, f64), auto_minutes: f64) -> Result<f64, EvalError> {
    let mid = midpoint(expert_hours, "expert hours")?;
    positive(auto_minutes, "automated minutes")?;
    Ok(100.0 * (1.0 - auto_minutes / (mid * 60.0)))
}

/// Percentage reduction of automated cost against the midpoint of an
/// expert-cost range: `100 * (1 - auto_cost / midpoint)`.
pub fn cost_reduction(expert_cost: (f64, f64), auto_cost: f64) -> Result<f64, EvalError> {
    let mid = midpoint(expert_cost, "expert cost")?;
    positive(auto_cost, "automated cost")?;
    Ok(100.0 * (1.0 - auto_cost / mid))
}

/// Coverage figures reported for the production deployment. Displayed
/// beside measured values for comparison; never asserted in tests.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReferenceCoverage {
    pub jurisdictions_per_report: f64,
    pub documents_per_session: f64,
    pub regulatory_references: f64,
    pub academic_references: f64,
    pub industry_references: f64,
}

pub const REPORTED_COVERAGE: ReferenceCoverage = ReferenceCoverage {
    jurisdictions_per_report: 18.3,
    documents_per_session: 327.0,
    regulatory_references: 42.7,
    academic_references: 37.2,
    industry_references: 23.5,
};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunCoverage {
    pub run_id: String,
    pub jurisdictions: usize,
    pub documents: usize,
    pub citations: usize,
    pub cited_by_source_type: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageMeans {
    pub runs: usize,
    pub jurisdictions: f64,
    pub documents: f64,
    pub citations: f64,
    pub cited_by_source_type: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageStats {
    pub per_run: Vec<RunCoverage>,
    /// Absent when no runs were supplied.
    pub means: Option<CoverageMeans>,
    pub reference: ReferenceCoverage,
}

/// Per-run coverage counts and their means over all runs.
pub fn coverage_stats(runs: &[RunMetrics]) -> CoverageStats {
    let per_run: Vec<RunCoverage> = runs
        .iter()
        .map(|m| RunCoverage {
            run_id: m.run_id.as_str().to_owned(),
            jurisdictions: m.jurisdiction_count,
            documents: m.document_count,
            citations: m.citation_count,
            cited_by_source_type: m.cited_by_source_type.clone(),
        })
        .collect();
    let means = if per_run.is_empty() {
        None
    } else {
        let n = per_run.len() as f64;
        let mut type_sums: BTreeMap<String, usize> = BTreeMap::new();
        for run in &per_run {
            for (ty, count) in &run.cited_by_source_type {
                *type_sums.entry(ty.clone()).or_insert(0) += count;
            }
        }
        Some(CoverageMeans {
            runs: per_run.len(),
            jurisdictions: per_run.iter().map(|r| r.jurisdictions).sum::<usize>() as f64 / n,
            documents: per_run.iter().map(|r| r.documents).sum::<usize>() as f64 / n,
            citations: per_run.iter().map(|r| r.citations).sum::<usize>() as f64 / n,
            cited_by_source_type: type_sums
                .into_iter()
                .map(|(ty, sum)| (ty, sum as f64 / n))
                .collect(),
        })
    };
    CoverageStats {
        per_run,
        means,
        reference: REPORTED_COVERAGE,
    }
}
