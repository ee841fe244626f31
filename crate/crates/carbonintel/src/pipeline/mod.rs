//! The multi-agent report pipeline: research, draft, review, visualise,
//! translate, orchestrated by a frozen state machine with hash-chained
//! envelopes and a persisted bundle per run.

mod bundle;
mod draft;
mod readability;
mod research;
mod review;
mod run;
mod stage;
mod thresholds;
mod translate;
mod visual;

pub use bundle::{
    BundleInputs, CHARTS_DIR, CITATIONS_FILE, FAILURE_FILE, METRICS_FILE, PROVENANCE_FILE,
    RunMetrics, load_metrics, persist_bundle,
};
pub use draft::{run_drafter, section_template};
pub use readability::{in_band, reading_ease, syllable_count, target_band};
pub use research::{Finding, ResearchOptions, ResearchReport, run_researcher};
pub use review::{ReviewOutcome, run_reviewer};
pub use run::{
    DEFAULT_REFINEMENT_BUDGET, DEFAULT_TOP_K, PipelineRun, RunConfig, RunOutcome, StageBindings,
    run_pipeline,
};
pub use stage::{PipelineError, StageServices};
pub use thresholds::{GateMetrics, QualityThresholds, quality_gate};
pub use translate::{Glossary, TranslationBundle, run_translator};
pub use visual::{ChartBundle, NamedChart, run_visualiser};
