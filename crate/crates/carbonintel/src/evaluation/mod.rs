//! Report evaluation: a fixed four-criterion rubric, a sixteen-persona
//! judge registry, double-blind report labeling, scripted or live persona
//! scoring, score-table aggregation and auditing, and efficiency metrics
//! comparing automated runs against expert baselines.

mod blind;
mod efficiency;
mod personas;
mod rubric;
mod score;
mod table;

use std::path::PathBuf;

use thiserror::Error;

pub use blind::{BlindAssignment, LabeledReport, blind_assign};
pub use efficiency::{
    CoverageMeans, CoverageStats, ReferenceCoverage, REPORTED_COVERAGE, RunCoverage,
    cost_reduction, coverage_stats, time_reduction,
};
pub use personas::{
    PERSONA_COUNT, PersonaGroup, PersonaRegistry, PersonaSpec, load_personas,
    load_personas_file,
};
pub use rubric::{CRITERION_COUNT, CRITERION_MAX, Criterion, Rubric, TOTAL_MAX};
pub use score::{SCORE_MAX_TOKENS, ScoreRecord, score_report};
pub use table::{
    AVERAGE_TOPIC, Aggregate, Inconsistency, LabelMeans, MeanDifference, SCORE_CSV_HEADER,
    ScoreRow, ScoreTable, StatedAverages, aggregate, validate_table,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("persona config: {0}")]
    Personas(String),
    #[error("blinding: {0}")]
    Blinding(String),
    #[error("scoring: {0}")]
    Score(String),
    #[error("score table: {0}")]
    Table(String),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("cannot read {}: {detail}", path.display())]
    Io { path: PathBuf, detail: String },
}
