//! The run orchestrator: drives the state machine through every stage, emits
//! one hash-chained envelope per stage execution, and persists the bundle
//! whether the run completes or fails.
//!
//! With a scripted backend and a fixed clock the whole run is a pure function
//! of (query, corpus, config, script): every digest, envelope, and bundle
//! byte is reproducible.

use std::collections::BTreeMap;
use std::path::PathBuf;

use crate::backends::{ChatBackend, MeterSnapshot, ModelBinding, RetryPolicy, UsageMeter, format_nano_usd};
use crate::clock::Clock;
use crate::core::{
    ParsedDocument, PayloadKind, Phase, PipelineEvent, PipelineState, ReportArtifact,
    ResearchQuery, RunId, RunLog, SourceId, SourceRecord, Stage, advance_state,
};
use crate::encoding::{canonical_json, digest_value, short_id};
use crate::pipeline::bundle::{BundleInputs, RunMetrics, persist_bundle};
use crate::pipeline::draft::run_drafter;
use crate::pipeline::readability::{reading_ease, target_band};
use crate::pipeline::research::{ResearchOptions, run_researcher};
use crate::pipeline::review::run_reviewer;
use crate::pipeline::stage::{PipelineError, StageServices};
use crate::pipeline::thresholds::QualityThresholds;
use crate::pipeline::translate::{Glossary, TranslationBundle, run_translator};
use crate::pipeline::visual::{ChartBundle, run_visualiser};
use crate::core::ClaimId;
use crate::provenance::{ProvenanceGraph, coverage};
use crate::semantic::RetrievalIndex;

pub const DEFAULT_TOP_K: usize = 5;
pub const DEFAULT_REFINEMENT_BUDGET: u32 = 2;

/// Model bindings per agent role. The reviewer and visualiser run local
/// deterministic logic; their bindings are carried for configuration
/// completeness and cost attribution, not called today.
#[derive(Debug, Clone, PartialEq)]
pub struct StageBindings {
    pub researcher: ModelBinding,
    pub drafter: ModelBinding,
    pub reviewer: ModelBinding,
    pub visualiser: ModelBinding,
    pub translator: ModelBinding,
}

impl StageBindings {
    pub fn for_stage(&self, stage: Stage) -> &ModelBinding {
        match stage {
            Stage::Research => &self.researcher,
            Stage::Draft => &self.drafter,
            Stage::Review => &self.reviewer,
            Stage::Visualise => &self.visualiser,
            Stage::Translate => &self.translator,
        }
    }

    /// Zero-price placeholder bindings for scripted runs.
    pub fn scripted_defaults() -> Self {
        let binding = |role: Stage| ModelBinding {
            role,
            model_id: "scripted".into(),
            endpoint: "scripted://local".into(),
            api_key_env: "CARBONINTEL_API_KEY".into(),
            prompt_price_micro_per_1k: 0,
            completion_price_micro_per_1k: 0,
        };
        Self {
            researcher: binding(Stage::Research),
            drafter: binding(Stage::Draft),
            reviewer: binding(Stage::Review),
            visualiser: binding(Stage::Visualise),
            translator: binding(Stage::Translate),
        }
    }
}

/// Everything configurable about a run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub bindings: StageBindings,
    pub thresholds: QualityThresholds,
    pub refinement_budget: u32,
    pub conflict_threshold: f64,
    pub top_k: usize,
    pub query_refinement: bool,
    pub retry: RetryPolicy,
    pub glossary: Glossary,
    pub output_dir: PathBuf,
}

impl RunConfig {
    /// Scripted-run defaults writing bundles under `output_dir`.
    pub fn scripted(output_dir: PathBuf) -> Self {
        Self {
            bindings: StageBindings::scripted_defaults(),
            thresholds: QualityThresholds::default(),
            refinement_budget: DEFAULT_REFINEMENT_BUDGET,
            conflict_threshold: crate::provenance::DEFAULT_CONFLICT_THRESHOLD,
            top_k: DEFAULT_TOP_K,
            query_refinement: true,
            retry: RetryPolicy::immediate(1),
            glossary: Glossary::default(),
            output_dir,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RunOutcome {
    Complete,
    Failed { stage: Stage, detail: String },
}

impl RunOutcome {
    pub fn is_complete(&self) -> bool {
        matches!(self, RunOutcome::Complete)
    }
}

/// The in-memory result of one run; the bundle on disk mirrors it.
#[derive(Debug)]
pub struct PipelineRun {
    pub run_id: RunId,
    pub outcome: RunOutcome,
    pub log: RunLog,
    pub state_history: Vec<Phase>,
    pub budget_remaining: u32,
    pub report: Option<ReportArtifact>,
    pub translations: Vec<ReportArtifact>,
    pub meter: MeterSnapshot,
    pub coverage: f64,
    pub head_digest: String,
    pub bundle_dir: PathBuf,
    pub metrics: RunMetrics,
}

/// Mutable run state threaded through the stages so that a failure still
/// leaves everything needed to persist a partial bundle.
struct Scratch {
    graph: ProvenanceGraph,
    log: RunLog,
    state: PipelineState,
    history: Vec<Phase>,
    report: Option<ReportArtifact>,
    charts: ChartBundle,
    translations: TranslationBundle,
}

impl Scratch {
    fn advance(&mut self, event: PipelineEvent) -> Result<(), PipelineError> {
        self.state = advance_state(self.state, event)?;
        self.history.push(self.state.phase);
        Ok(())
    }

    fn emit(
        &mut self,
        stage: Stage,
        payload_digest: String,
        quality: BTreeMap<String, f64>,
        services: &StageServices,
    ) -> Result<(), PipelineError> {
        self.log.next_envelope(
            stage,
            PayloadKind::for_stage(stage),
            payload_digest,
            quality,
            services.clock.now(),
        )?;
        Ok(())
    }
}

fn quality_map<const N: usize>(entries: [(&str, f64); N]) -> BTreeMap<String, f64> {
    entries
        .into_iter()
        .map(|(k, v)| (k.to_owned(), v))
        .collect()
}

/// Body and claim prose, the text a reader actually encounters.
fn report_prose(report: &ReportArtifact) -> String {
    let mut text = String::new();
    for section in &report.sections {
        text.push_str(&section.body);
        text.push(' ');
        for claim_ref in &section.claims {
            text.push_str(&claim_ref.claim.text);
            text.push(' ');
        }
    }
    text
}

/// Formats the bibliography from first-citation order, one entry per source.
fn fill_bibliography(
    report: &mut ReportArtifact,
    graph: &ProvenanceGraph,
    docs: &BTreeMap<SourceId, ParsedDocument>,
) {
    let order = crate::provenance::first_citation_order(report);
    report.bibliography = order
        .iter()
        .enumerate()
        .filter_map(|(i, source_id)| {
            let record = graph.source(source_id)?;
            let title = docs
                .get(source_id)
                .map(|d| d.title.as_str())
                .filter(|t| !t.is_empty());
            Some(crate::provenance::format_citation(record, title, i + 1))
        })
        .collect();
}

fn execute_stages(
    scratch: &mut Scratch,
    query: &ResearchQuery,
    docs: &[(ParsedDocument, SourceRecord)],
    docs_by_id: &BTreeMap<SourceId, ParsedDocument>,
    index: &RetrievalIndex,
    config: &RunConfig,
    services: &StageServices,
) -> Result<(), PipelineError> {
    scratch.advance(PipelineEvent::Start)?;
    let research = run_researcher(
        query,
        docs,
        index,
        &mut scratch.graph,
        &config.bindings.researcher,
        services,
        &ResearchOptions {
            top_k: config.top_k,
            query_refinement: config.query_refinement,
        },
    )?;
    scratch.emit(
        Stage::Research,
        digest_value(&research)?,
        quality_map([
            ("finding_count", research.findings.len() as f64),
            ("context_source_count", research.sources.len() as f64),
            ("retrieval_rounds", research.retrieval_rounds as f64),
            (
                "gap_jurisdictions",
                research.gaps.missing_jurisdictions.len() as f64,
            ),
            ("gap_terms", research.gaps.uncovered_terms.len() as f64),
            (
                "gap_date_slices",
                research.gaps.empty_date_slices.len() as f64,
            ),
        ]),
        services,
    )?;
    scratch.advance(PipelineEvent::StageDone)?;

    let conflict_keys: BTreeMap<ClaimId, crate::provenance::ConflictKey> = research
        .findings
        .iter()
        .filter_map(|f| f.conflict_key.clone().map(|k| (f.claim.id.clone(), k)))
        .collect();

    let mut review_gaps: Vec<String> = Vec::new();
    let mut refinement_round = 0u32;
    let mut report = loop {
        let mut draft = run_drafter(
            &research,
            query,
            &review_gaps,
            &mut scratch.graph,
            &config.bindings.drafter,
            services,
        )?;
        let ease = reading_ease(&report_prose(&draft));
        let (band_low, band_high) = target_band(query.audience);
        scratch.emit(
            Stage::Draft,
            digest_value(&draft)?,
            quality_map([
                ("claim_count", draft.claims().count() as f64),
                ("section_count", draft.sections.len() as f64),
                ("reading_ease", ease),
                ("reading_ease_band_low", band_low),
                ("reading_ease_band_high", band_high),
                ("refinement_round", refinement_round as f64),
            ]),
            services,
        )?;
        scratch.advance(PipelineEvent::StageDone)?;

        let outcome = run_reviewer(
            &mut draft,
            &conflict_keys,
            docs_by_id,
            &mut scratch.graph,
            &config.thresholds,
            config.conflict_threshold,
            services,
        )?;
        scratch.emit(
            Stage::Review,
            digest_value(&outcome)?,
            quality_map([
                ("coverage", outcome.metrics.coverage),
                (
                    "unresolved_conflicts",
                    outcome.metrics.unresolved_conflicts as f64,
                ),
                ("uncited_claims", outcome.metrics.uncited_claims as f64),
                ("mean_confidence", outcome.metrics.mean_confidence),
                ("verified_citations", outcome.verified_citations as f64),
                ("failed_citations", outcome.failed_citations as f64),
                ("passed", if outcome.passed { 1.0 } else { 0.0 }),
            ]),
            services,
        )?;
        scratch.report = Some(draft.clone());
        if outcome.passed {
            scratch.advance(PipelineEvent::QualityPass)?;
            break draft;
        }
        scratch.advance(PipelineEvent::QualityFail)?;
        if scratch.state.is_terminal() {
            return Err(PipelineError::stage(
                Stage::Review,
                format!(
                    "quality gate failed and the refinement budget is exhausted: {}",
                    outcome.gaps.join("; ")
                ),
            ));
        }
        review_gaps = outcome.gaps;
        refinement_round += 1;
    };

    fill_bibliography(&mut report, &scratch.graph, docs_by_id);
    let charts = run_visualiser(&mut report, docs_by_id);
    scratch.emit(
        Stage::Visualise,
        digest_value(&charts)?,
        quality_map([
            ("chart_count", charts.charts.len() as f64),
            ("warning_count", charts.warnings.len() as f64),
        ]),
        services,
    )?;
    scratch.charts = charts;
    scratch.report = Some(report.clone());
    scratch.advance(PipelineEvent::StageDone)?;

    let translations = run_translator(
        &report,
        &query.target_languages,
        &config.glossary,
        &config.bindings.translator,
        services,
    )?;
    scratch.emit(
        Stage::Translate,
        digest_value(&translations)?,
        quality_map([
            ("language_count", query.target_languages.len() as f64),
            (
                "translation_count",
                translations.translations.len() as f64,
            ),
        ]),
        services,
    )?;
    scratch.advance(PipelineEvent::StageDone)?;
    scratch.translations = translations;
    scratch.report = Some(report);
    Ok(())
}

/// Runs the full pipeline over an in-memory corpus and persists the bundle.
///
/// Stage failures still produce a bundle (with `failure.txt` and whatever
/// artifacts exist) and return `Ok` with a failed outcome; infrastructure
/// errors (I/O, log corruption) return `Err`.
pub fn run_pipeline(
    query: &ResearchQuery,
    docs: &[(ParsedDocument, SourceRecord)],
    config: &RunConfig,
    backend: &dyn ChatBackend,
    clock: &dyn Clock,
) -> Result<PipelineRun, PipelineError> {
    config
        .thresholds
        .validate()
        .map_err(PipelineError::Config)?;
    if docs.is_empty() {
        return Err(PipelineError::Config("corpus is empty".into()));
    }
    let meter = UsageMeter::new();
    let services = StageServices {
        backend,
        clock,
        meter: &meter,
        retry: config.retry,
    };
    let start = clock.now();
    let run_id = RunId::new(short_id("run", &canonical_json(&(query, &start))?));

    let mut scratch = Scratch {
        graph: ProvenanceGraph::new(),
        log: RunLog::new(run_id.clone()),
        state: PipelineState::new(config.refinement_budget),
        history: vec![Phase::Queued],
        report: None,
        charts: ChartBundle::default(),
        translations: TranslationBundle::default(),
    };
    for (_, record) in docs {
        if scratch.graph.source(&record.id).is_none() {
            scratch.graph.record_source(record, clock.now())?;
        }
    }
    let parsed: Vec<ParsedDocument> = docs.iter().map(|(d, _)| d.clone()).collect();
    let index = RetrievalIndex::build(&parsed).map_err(|e| PipelineError::Config(e.to_string()))?;
    let docs_by_id: BTreeMap<SourceId, ParsedDocument> = docs
        .iter()
        .map(|(d, r)| (r.id.clone(), d.clone()))
        .collect();

    let result = execute_stages(
        &mut scratch,
        query,
        docs,
        &docs_by_id,
        &index,
        config,
        &services,
    );
    let (outcome, failure_text) = match result {
        Ok(()) => (RunOutcome::Complete, None),
        Err(PipelineError::Stage { stage, detail }) => {
            if !scratch.state.is_terminal() {
                scratch.advance(PipelineEvent::StageError)?;
            }
            let marker = format!("stage: {stage}\ndetail: {detail}\n");
            (RunOutcome::Failed { stage, detail }, Some(marker))
        }
        Err(other) => return Err(other),
    };

    let end = clock.now();
    let snapshot = meter.snapshot();
    let run_coverage = scratch
        .report
        .as_ref()
        .map(|r| coverage(r, &scratch.graph).1)
        .unwrap_or(0.0);
    let citations = scratch.graph.citations();
    let cited: std::collections::BTreeSet<SourceId> =
        citations.iter().map(|c| c.source_id.clone()).collect();
    let mut jurisdictions = std::collections::BTreeSet::new();
    let mut cited_by_source_type = BTreeMap::new();
    for id in &cited {
        if let Some(doc) = docs_by_id.get(id) {
            jurisdictions.extend(doc.jurisdiction_tags.iter().map(|t| t.to_lowercase()));
        }
        if let Some(record) = scratch.graph.source(id) {
            *cited_by_source_type
                .entry(record.source_type.as_str().to_owned())
                .or_insert(0usize) += 1;
        }
    }
    let (outcome_label, failed_stage) = match &outcome {
        RunOutcome::Complete => ("complete".to_owned(), None),
        RunOutcome::Failed { stage, .. } => (format!("failed:{stage}"), Some(*stage)),
    };
    let metrics = RunMetrics {
        run_id: run_id.clone(),
        outcome: outcome_label,
        failed_stage,
        state_history: scratch.history.clone(),
        duration_seconds: end.seconds_since(&start),
        envelope_count: scratch.log.len(),
        document_count: docs.len(),
        jurisdiction_count: jurisdictions.len(),
        claim_count: scratch.graph.claim_count(),
        citation_count: citations.len(),
        cited_by_source_type,
        coverage: run_coverage,
        unresolved_conflicts: scratch.graph.unresolved_conflicts().len(),
        provenance_head_digest: scratch.graph.head_digest().to_owned(),
        usage: snapshot.clone(),
        total_cost_usd: format_nano_usd(snapshot.total.cost_nano_usd),
    };
    let bundle_dir = persist_bundle(
        &config.output_dir,
        &BundleInputs {
            report: scratch.report.as_ref(),
            translations: &scratch.translations.translations,
            charts: &scratch.charts.charts,
            graph: &scratch.graph,
            metrics: &metrics,
            failure: failure_text.as_deref(),
        },
    )?;

    Ok(PipelineRun {
        run_id,
        outcome,
        log: scratch.log,
        state_history: scratch.history,
        budget_remaining: scratch.state.refinement_budget_remaining,
        report: scratch.report,
        translations: scratch.translations.translations,
        meter: snapshot,
        coverage: run_coverage,
        head_digest: scratch.graph.head_digest().to_owned(),
        bundle_dir,
        metrics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backends::ScriptedBackend;
    use crate::clock::FixedClock;
    use crate::core::{Audience, Cell, SourceType, Table, Timestamp};

    fn corpus() -> Vec<(ParsedDocument, SourceRecord)> {
        let table = Table {
            headers: vec!["year".into(), "price".into()],
            rows: vec![
                vec![Cell::Text("2023".into()), Cell::Number(80.2)],
                vec![Cell::Text("2024".into()), Cell::Number(83.5)],
            ],
        };
        let doc = ParsedDocument {
            source_id: SourceId::new("src-ets"),
            title: "ETS price bulletin".into(),
            body: vec![
                "EUA carbon prices averaged 83.5 EUR in 2024.".into(),
                "Traded volume held steady across the year.".into(),
            ],
            tables: vec![table],
            jurisdiction_tags: vec!["eu".into()],
            language: "en".into(),
        };
        let record = SourceRecord {
            id: SourceId::new("src-ets"),
            origin: "file:///src-ets.md".into(),
            source_type: SourceType::Regulatory,
            publisher: "Fixture Press".into(),
            published_date: None,
            retrieved_at: Timestamp::parse("2025-01-01T00:00:00Z").unwrap(),
            credibility: 0.9,
            content_hash: "hash-src-ets".into(),
        };
        // Second document with disjoint vocabulary: topic terms found in
        // every document have zero idf and would never be retrieved.
        let filler = ParsedDocument {
            source_id: SourceId::new("src-note"),
            title: "Registry operations note".into(),
            body: vec!["Maintenance windows were announced for the registry.".into()],
            tables: Vec::new(),
            jurisdiction_tags: vec!["eu".into()],
            language: "en".into(),
        };
        let filler_record = SourceRecord {
            id: SourceId::new("src-note"),
            origin: "file:///src-note.md".into(),
            source_type: SourceType::News,
            publisher: "Fixture Press".into(),
            published_date: None,
            retrieved_at: Timestamp::parse("2025-01-01T00:00:00Z").unwrap(),
            credibility: 0.4,
            content_hash: "hash-src-note".into(),
        };
        vec![(doc, record), (filler, filler_record)]
    }

    fn query() -> ResearchQuery {
        ResearchQuery {
            topic: "carbon prices".into(),
            date_range: None,
            jurisdictions: Vec::new(),
            audience: Audience::General,
            target_languages: vec!["en".into()],
            user_corpus: None,
        }
    }

    fn entry(role: &str, stage: &str, content: &str) -> String {
        serde_json::json!({
            "role": role,
            "stage": stage,
            "prompt_digest": "*",
            "content": content,
        })
        .to_string()
    }

    const FINDINGS: &str = "FINDING\n\
claim: EUA carbon prices averaged 83.5 EUR in 2024.\n\
source: src-ets\n\
locator: paragraph 1\n\
annotation: stated directly\n\
END";

    const GOOD_DRAFT: &str = "SECTION Narrative\n\
body: The market firmed through the year.\n\
CLAIM clm-1\n\
END";

    const BAD_DRAFT: &str = "SECTION Narrative\n\
body: The market firmed through the year.\n\
CLAIM clm-1: Nothing relevant appears described anywhere.\n\
END";

    const FIXED_DRAFT: &str = "SECTION Narrative\n\
body: The market firmed through the year.\n\
CLAIM clm-1: EUA carbon prices averaged 83.5 EUR in 2024.\n\
END";

    fn happy_script() -> String {
        [
            entry("researcher", "research", FINDINGS),
            entry("drafter", "draft", GOOD_DRAFT),
        ]
        .join("\n")
    }

    fn run_with(script: &str, out: &std::path::Path) -> PipelineRun {
        let backend = ScriptedBackend::from_text(script).unwrap();
        let clock = FixedClock::scripted_default();
        let config = RunConfig::scripted(out.to_path_buf());
        run_pipeline(&query(), &corpus(), &config, &backend, &clock).unwrap()
    }

    #[test]
    fn happy_path_completes_with_five_envelopes() {
        let tmp = tempfile::tempdir().unwrap();
        let run = run_with(&happy_script(), tmp.path());
        assert!(run.outcome.is_complete());
        assert_eq!(
            run.state_history,
            vec![
                Phase::Queued,
                Phase::Researching,
                Phase::Drafting,
                Phase::Reviewing,
                Phase::Visualising,
                Phase::Translating,
                Phase::Complete,
            ]
        );
        assert_eq!(run.log.len(), 5);
        let stages: Vec<Stage> = run.log.envelopes().iter().map(|e| e.stage).collect();
        assert_eq!(
            stages,
            vec![
                Stage::Research,
                Stage::Draft,
                Stage::Review,
                Stage::Visualise,
                Stage::Translate,
            ]
        );
        assert_eq!(run.coverage, 1.0);
        assert_eq!(run.budget_remaining, DEFAULT_REFINEMENT_BUDGET);
        let report = run.report.as_ref().unwrap();
        assert_eq!(report.bibliography.len(), 1);
        assert!(report.bibliography[0].contains("ETS price bulletin"));
        assert_eq!(report.sections[0].chart_refs, ["src-ets-t1"]);
        assert!(run.bundle_dir.join("report.en.md").exists());
        assert!(run.bundle_dir.join("run.metrics").exists());
        assert!(run.bundle_dir.join("provenance.log").exists());
        assert!(run.bundle_dir.join("citations.jsonl").exists());
        assert!(run.bundle_dir.join("charts/src-ets-t1.json").exists());
        assert!(!run.bundle_dir.join("failure.txt").exists());
        assert_eq!(run.metrics.outcome, "complete");
        assert_eq!(run.metrics.claim_count, 1);
    }

    #[test]
    fn identical_runs_produce_identical_bundles() {
        let tmp = tempfile::tempdir().unwrap();
        let a = run_with(&happy_script(), &tmp.path().join("a"));
        let b = run_with(&happy_script(), &tmp.path().join("b"));
        assert_eq!(a.run_id, b.run_id);
        assert_eq!(a.head_digest, b.head_digest);
        for name in [
            "report.en.md",
            "citations.jsonl",
            "provenance.log",
            "run.metrics",
            "charts/src-ets-t1.json",
        ] {
            let left = std::fs::read(a.bundle_dir.join(name)).unwrap();
            let right = std::fs::read(b.bundle_dir.join(name)).unwrap();
            assert_eq!(left, right, "{name} differs between runs");
        }
    }

    #[test]
    fn failed_review_once_adds_one_refinement_cycle() {
        let script = [
            entry("researcher", "research", FINDINGS),
            entry("drafter", "draft", BAD_DRAFT),
            entry("drafter", "draft", FIXED_DRAFT),
        ]
        .join("\n");
        let tmp = tempfile::tempdir().unwrap();
        let run = run_with(&script, tmp.path());
        assert!(run.outcome.is_complete());
        assert_eq!(run.budget_remaining, DEFAULT_REFINEMENT_BUDGET - 1);
        let stages: Vec<Stage> = run.log.envelopes().iter().map(|e| e.stage).collect();
        assert_eq!(
            stages,
            vec![
                Stage::Research,
                Stage::Draft,
                Stage::Review,
                Stage::Draft,
                Stage::Review,
                Stage::Visualise,
                Stage::Translate,
            ],
            "exactly one extra draft/review pair"
        );
        assert!(run.state_history.contains(&Phase::Drafting));
        assert_eq!(
            run.state_history
                .iter()
                .filter(|p| **p == Phase::Drafting)
                .count(),
            2
        );
    }

    #[test]
    fn exhausted_budget_fails_at_review_with_three_attempts() {
        let script = [
            entry("researcher", "research", FINDINGS),
            entry("drafter", "draft", BAD_DRAFT),
            entry("drafter", "draft", BAD_DRAFT),
            entry("drafter", "draft", BAD_DRAFT),
        ]
        .join("\n");
        let tmp = tempfile::tempdir().unwrap();
        let run = run_with(&script, tmp.path());
        let RunOutcome::Failed { stage, detail } = &run.outcome else {
            panic!("expected failure");
        };
        assert_eq!(*stage, Stage::Review);
        assert!(detail.contains("refinement budget is exhausted"), "{detail}");
        assert_eq!(run.budget_remaining, 0);
        assert_eq!(*run.state_history.last().unwrap(), Phase::Failed(Stage::Review));
        let review_envelopes = run
            .log
            .envelopes()
            .iter()
            .filter(|e| e.stage == Stage::Review)
            .count();
        assert_eq!(review_envelopes, 3);
        assert!(run.bundle_dir.join("failure.txt").exists());
        assert!(
            run.bundle_dir.join("report.en.md").exists(),
            "partial report persists"
        );
        assert_eq!(run.metrics.outcome, "failed:review");
    }

    #[test]
    fn research_stage_failure_persists_failure_marker() {
        let script = [
            entry("researcher", "research", "not a finding"),
            entry("researcher", "research", "still not"),
        ]
        .join("\n");
        let tmp = tempfile::tempdir().unwrap();
        let run = run_with(&script, tmp.path());
        let RunOutcome::Failed { stage, .. } = &run.outcome else {
            panic!("expected failure");
        };
        assert_eq!(*stage, Stage::Research);
        assert_eq!(*run.state_history.last().unwrap(), Phase::Failed(Stage::Research));
        assert!(run.log.is_empty(), "no envelope for a failed research stage");
        assert!(run.bundle_dir.join("failure.txt").exists());
        assert!(!run.bundle_dir.join("report.en.md").exists());
        let marker = std::fs::read_to_string(run.bundle_dir.join("failure.txt")).unwrap();
        assert!(marker.contains("stage: research"));
    }

    #[test]
    fn translated_run_writes_both_reports() {
        let translation = "TITLE: Ausblick\n\
SECTION Narrative\n\
body: Der Markt festigte sich im Jahresverlauf.\n\
CLAIM clm-1: EUA-Preise lagen 2024 im Schnitt bei 83.5 EUR.\n\
END";
        let script = [
            entry("researcher", "research", FINDINGS),
            entry("drafter", "draft", GOOD_DRAFT),
            entry("translator", "translate", translation),
        ]
        .join("\n");
        let tmp = tempfile::tempdir().unwrap();
        let backend = ScriptedBackend::from_text(&script).unwrap();
        let clock = FixedClock::scripted_default();
        let config = RunConfig::scripted(tmp.path().to_path_buf());
        let mut q = query();
        q.target_languages = vec!["en".into(), "de".into()];
        let run = run_pipeline(&q, &corpus(), &config, &backend, &clock).unwrap();
        assert!(run.outcome.is_complete(), "{:?}", run.outcome);
        assert_eq!(run.translations.len(), 1);
        assert!(run.bundle_dir.join("report.en.md").exists());
        assert!(run.bundle_dir.join("report.de.md").exists());
    }
}
