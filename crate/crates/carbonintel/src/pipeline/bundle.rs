//! Report bundle layout and the run metrics record.
//!
//! A bundle is one directory named after the run id:
//!   report.<language>.md   one per produced report, primary included
//!   citations.jsonl        one canonical-JSON citation per line
//!   charts/<name>.json     one canonical-JSON chart spec per chart
//!   provenance.log         the hash-chained event log
//!   run.metrics            canonical-JSON RunMetrics
//!   failure.txt            only on failed runs: stage and detail
//!
//! All payloads use canonical JSON, so equal runs produce byte-equal bundles.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::backends::MeterSnapshot;
use crate::core::{Phase, ReportArtifact, RunId, Stage};
use crate::encoding::canonical_json;
use crate::pipeline::stage::PipelineError;
use crate::pipeline::visual::NamedChart;
use crate::provenance::ProvenanceGraph;

pub const METRICS_FILE: &str = "run.metrics";
pub const PROVENANCE_FILE: &str = "provenance.log";
pub const CITATIONS_FILE: &str = "citations.jsonl";
pub const CHARTS_DIR: &str = "charts";
pub const FAILURE_FILE: &str = "failure.txt";

/// Everything `metrics` subcommands need, without reopening the full log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub run_id: RunId,
    /// "complete" or "failed:<stage>".
    pub outcome: String,
    pub failed_stage: Option<Stage>,
    pub state_history: Vec<Phase>,
    pub duration_seconds: i64,
    pub envelope_count: usize,
    pub document_count: usize,
    /// Distinct lowercased jurisdiction tags across cited sources.
    pub jurisdiction_count: usize,
    pub claim_count: usize,
    pub citation_count: usize,
    /// Distinct cited sources keyed by source type name.
    pub cited_by_source_type: std::collections::BTreeMap<String, usize>,
    pub coverage: f64,
    pub unresolved_conflicts: usize,
    pub provenance_head_digest: String,
    pub usage: MeterSnapshot,
    /// Formatted to nano-USD precision, e.g. "1.23".
    pub total_cost_usd: String,
}

/// Inputs for one bundle write. Partial runs pass what they have.
pub struct BundleInputs<'a> {
    pub report: Option<&'a ReportArtifact>,
    pub translations: &'a [ReportArtifact],
    pub charts: &'a [NamedChart],
    pub graph: &'a ProvenanceGraph,
    pub metrics: &'a RunMetrics,
    pub failure: Option<&'a str>,
}

fn write_file(path: &Path, content: &str) -> Result<(), PipelineError> {
    fs::write(path, content).map_err(|e| PipelineError::Io {
        path: path.to_path_buf(),
        detail: e.to_string(),
    })
}

/// Writes the bundle under `<output_dir>/<run_id>/` and returns that path.
pub fn persist_bundle(output_dir: &Path, inputs: &BundleInputs) -> Result<PathBuf, PipelineError> {
    let dir = output_dir.join(inputs.metrics.run_id.as_str());
    fs::create_dir_all(&dir).map_err(|e| PipelineError::Io {
        path: dir.clone(),
        detail: e.to_string(),
    })?;

    for report in inputs.report.into_iter().chain(inputs.translations) {
        let path = dir.join(format!("report.{}.md", report.language));
        write_file(&path, &report.render_markdown())?;
    }

    let mut citations = String::new();
    for citation in inputs.graph.citations() {
        citations.push_str(&canonical_json(&citation)?);
        citations.push('\n');
    }
    write_file(&dir.join(CITATIONS_FILE), &citations)?;

    if !inputs.charts.is_empty() {
        let charts_dir = dir.join(CHARTS_DIR);
        fs::create_dir_all(&charts_dir).map_err(|e| PipelineError::Io {
            path: charts_dir.clone(),
            detail: e.to_string(),
        })?;
        for chart in inputs.charts {
            let mut body = canonical_json(&chart.spec)?;
            body.push('\n');
            write_file(&charts_dir.join(format!("{}.json", chart.name)), &body)?;
        }
    }

    write_file(&dir.join(PROVENANCE_FILE), &inputs.graph.export_log()?)?;

    let mut metrics = canonical_json(inputs.metrics)?;
    metrics.push('\n');
    write_file(&dir.join(METRICS_FILE), &metrics)?;

    if let Some(failure) = inputs.failure {
        write_file(&dir.join(FAILURE_FILE), failure)?;
    }
    Ok(dir)
}

/// Reads the metrics record back from a bundle directory.
pub fn load_metrics(bundle_dir: &Path) -> Result<RunMetrics, PipelineError> {
    let path = bundle_dir.join(METRICS_FILE);
    let text = fs::read_to_string(&path).map_err(|e| PipelineError::Io {
        path: path.clone(),
        detail: e.to_string(),
    })?;
    crate::encoding::from_canonical(text.trim()).map_err(PipelineError::from)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backends::MeterSnapshot;
    use crate::core::{Audience, Section};

    fn metrics(run_id: &str) -> RunMetrics {
        RunMetrics {
            run_id: RunId::new(run_id),
            outcome: "complete".into(),
            failed_stage: None,
            state_history: vec![Phase::Queued, Phase::Complete],
            duration_seconds: 7,
            envelope_count: 5,
            document_count: 2,
            jurisdiction_count: 1,
            claim_count: 2,
            citation_count: 2,
            cited_by_source_type: [("regulatory".to_string(), 1)].into(),
            coverage: 1.0,
            unresolved_conflicts: 0,
            provenance_head_digest: "0".repeat(64),
            usage: MeterSnapshot::default(),
            total_cost_usd: "0".into(),
        }
    }

    fn report(language: &str) -> ReportArtifact {
        ReportArtifact {
            title: "Outlook".into(),
            audience: Audience::General,
            language: language.into(),
            sections: vec![Section {
                heading: "Narrative".into(),
                body: "Body.".into(),
                claims: Vec::new(),
                chart_refs: Vec::new(),
            }],
            bibliography: Vec::new(),
        }
    }

    #[test]
    fn writes_all_files_and_reads_metrics_back() {
        let tmp = tempfile::tempdir().unwrap();
        let graph = ProvenanceGraph::new();
        let m = metrics("run-abc");
        let en = report("en");
        let de = report("de");
        let inputs = BundleInputs {
            report: Some(&en),
            translations: std::slice::from_ref(&de),
            charts: &[],
            graph: &graph,
            metrics: &m,
            failure: None,
        };
        let dir = persist_bundle(tmp.path(), &inputs).unwrap();
        assert_eq!(dir, tmp.path().join("run-abc"));
        assert!(dir.join("report.en.md").exists());
        assert!(dir.join("report.de.md").exists());
        assert!(dir.join(CITATIONS_FILE).exists());
        assert!(dir.join(PROVENANCE_FILE).exists());
        assert!(!dir.join(FAILURE_FILE).exists());
        assert!(!dir.join(CHARTS_DIR).exists(), "no charts, no dir");
        assert_eq!(load_metrics(&dir).unwrap(), m);
    }

    #[test]
    fn failed_runs_write_the_failure_marker() {
        let tmp = tempfile::tempdir().unwrap();
        let graph = ProvenanceGraph::new();
        let mut m = metrics("run-bad");
        m.outcome = "failed:review".into();
        m.failed_stage = Some(Stage::Review);
        let inputs = BundleInputs {
            report: None,
            translations: &[],
            charts: &[],
            graph: &graph,
            metrics: &m,
            failure: Some("stage: review\ndetail: quality gate failed\n"),
        };
        let dir = persist_bundle(tmp.path(), &inputs).unwrap();
        let marker = std::fs::read_to_string(dir.join(FAILURE_FILE)).unwrap();
        assert!(marker.contains("quality gate failed"));
        assert!(!dir.join("report.en.md").exists());
    }

    #[test]
    fn persisting_twice_is_byte_identical() {
        let tmp = tempfile::tempdir().unwrap();
        let graph = ProvenanceGraph::new();
        let m = metrics("run-same");
        let en = report("en");
        let inputs = BundleInputs {
            report: Some(&en),
            translations: &[],
            charts: &[],
            graph: &graph,
            metrics: &m,
            failure: None,
        };
        let a = persist_bundle(&tmp.path().join("a"), &inputs).unwrap();
        let b = persist_bundle(&tmp.path().join("b"), &inputs).unwrap();
        for name in ["report.en.md", CITATIONS_FILE, PROVENANCE_FILE, METRICS_FILE] {
            let left = std::fs::read(a.join(name)).unwrap();
            let right = std::fs::read(b.join(name)).unwrap();
            assert_eq!(left, right, "{name} differs");
        }
    }
}
