use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Pipeline stages in forward order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Research,
    Draft,
    Review,
    Visualise,
    Translate,
}

impl Stage {
    pub const ALL: [Stage; 5] = [
        Stage::Research,
        Stage::Draft,
        Stage::Review,
        Stage::Visualise,
        Stage::Translate,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Stage::Research => "research",
            Stage::Draft => "draft",
            Stage::Review => "review",
            Stage::Visualise => "visualise",
            Stage::Translate => "translate",
        }
    }
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "phase", content = "stage")]
pub enum Phase {
    Queued,
    Researching,
    Drafting,
    Reviewing,
    Visualising,
    Translating,
    Complete,
    Failed(Stage),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineState {
    pub phase: Phase,
    pub refinement_budget_remaining: u32,
}

impl PipelineState {
    pub fn new(refinement_budget: u32) -> Self {
        PipelineState {
            phase: Phase::Queued,
            refinement_budget_remaining: refinement_budget,
        }
    }

    pub fn is_terminal(&self) -> bool {
        matches!(self.phase, Phase::Complete | Phase::Failed(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PipelineEvent {
    Start,
    StageDone,
    QualityPass,
    QualityFail,
    StageError,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StateError {
    #[error("event {event:?} is not valid in phase {phase:?}")]
    InvalidTransition { phase: Phase, event: PipelineEvent },
    #[error("pipeline already terminal in phase {0:?}")]
    Terminal(Phase),
}

/// Advance the pipeline state machine by one event.
///
/// The only backward edge is reviewing -> drafting on a quality failure
/// while refinement budget remains; an exhausted budget fails the run at
/// the review stage. Quality events are only meaningful while reviewing.
pub fn advance_state(
    state: PipelineState,
    event: PipelineEvent,
) -> Result<PipelineState, StateError> {
    use {Phase as P, PipelineEvent as E};

    if state.is_terminal() {
        return Err(StateError::Terminal(state.phase));
    }

    let mut next = state;
    next.phase = match (state.phase, event) {
        (P::Queued, E::Start) => P::Researching,
        (P::Researching, E::StageDone) => P::Drafting,
        (P::Drafting, E::StageDone) => P::Reviewing,
        (P::Reviewing, E::QualityPass) => P::Visualising,
        (P::Reviewing, E::QualityFail) => {
            if state.refinement_budget_remaining > 0 {
                next.refinement_budget_remaining -= 1;
                P::Drafting
            } else {
                P::Failed(Stage::Review)
            }
        }
        (P::Visualising, E::StageDone) => P::Translating,
        (P::Translating, E::StageDone) => P::Complete,
        (phase, E::StageError) => P::Failed(active_stage(phase)),
        (phase, event) => return Err(StateError::InvalidTransition { phase, event }),
    };
    Ok(next)
}

fn active_stage(phase: Phase) -> Stage {
    match phase {
        Phase::Queued | Phase::Researching => Stage::Research,
        Phase::Drafting => Stage::Draft,
        Phase::Reviewing => Stage::Review,
        Phase::Visualising => Stage::Visualise,
        Phase::Translating => Stage::Translate,
        Phase::Complete | Phase::Failed(_) => unreachable!("terminal phases have no active stage"),
    }
}
