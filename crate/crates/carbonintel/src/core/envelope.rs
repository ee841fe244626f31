use super::state::Stage;
use super::types::{RunId, Timestamp};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

/// What kind of payload an envelope references; each stage produces exactly
/// one kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PayloadKind {
    ResearchReport,
    ReportDraft,
    ReviewOutcome,
    ChartBundle,
    TranslationBundle,
}

impl PayloadKind {
    pub fn for_stage(stage: Stage) -> Self {
        match stage {
            Stage::Research => PayloadKind::ResearchReport,
            Stage::Draft => PayloadKind::ReportDraft,
            Stage::Review => PayloadKind::ReviewOutcome,
            Stage::Visualise => PayloadKind::ChartBundle,
            Stage::Translate => PayloadKind::TranslationBundle,
        }
    }

    pub fn stage(&self) -> Stage {
        match self {
            PayloadKind::ResearchReport => Stage::Research,
            PayloadKind::ReportDraft => Stage::Draft,
            PayloadKind::ReviewOutcome => Stage::Review,
            PayloadKind::ChartBundle => Stage::Visualise,
            PayloadKind::TranslationBundle => Stage::Translate,
        }
    }
}

/// Inter-agent metadata record. The payload artifact itself lives in the run
/// bundle; the envelope carries its content digest plus quality metrics.
/// Envelopes in a run form a contiguous sequence starting at 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentEnvelope {
    pub run_id: RunId,
    pub sequence: u64,
    pub stage: Stage,
    pub payload_kind: PayloadKind,
    pub payload_ref: String,
    pub quality: BTreeMap<String, f64>,
    pub issued_at: Timestamp,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnvelopeError {
    #[error("stage {stage} must carry {expected:?}, got {got:?}")]
    KindMismatch {
        stage: Stage,
        expected: PayloadKind,
        got: PayloadKind,
    },
    #[error("expected sequence {expected}, got {got}")]
    SequenceGap { expected: u64, got: u64 },
    #[error("envelope run id {got} does not match log run id {expected}")]
    RunMismatch { expected: RunId, got: RunId },
    #[error("stage {got} cannot follow stage {prev}")]
    StageOrder { prev: Stage, got: Stage },
}

/// Ordered log of the envelopes exchanged during one run.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct RunLog {
    pub run_id: RunId,
    envelopes: Vec<AgentEnvelope>,
}

impl RunLog {
    pub fn new(run_id: RunId) -> Self {
        RunLog {
            run_id,
            envelopes: Vec::new(),
        }
    }

    pub fn envelopes(&self) -> &[AgentEnvelope] {
        &self.envelopes
    }

    pub fn len(&self) -> usize {
        self.envelopes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.envelopes.is_empty()
    }

    /// Build and append the next envelope; sequence numbers are assigned
    /// here, never by the caller.
    pub fn next_envelope(
        &mut self,
        stage: Stage,
        payload_kind: PayloadKind,
        payload_ref: String,
        quality: BTreeMap<String, f64>,
        issued_at: Timestamp,
    ) -> Result<&AgentEnvelope, EnvelopeError> {
        self.check_next(stage, payload_kind)?;
        let envelope = AgentEnvelope {
            run_id: self.run_id.clone(),
            sequence: self.envelopes.len() as u64 + 1,
            stage,
            payload_kind,
            payload_ref,
            quality,
            issued_at,
        };
        self.envelopes.push(envelope);
        Ok(self.envelopes.last().unwrap())
    }

    /// Append an already-built envelope, enforcing the same rules as
    /// `next_envelope`. Used when replaying a serialized log.
    pub fn append(&mut self, envelope: AgentEnvelope) -> Result<(), EnvelopeError> {
        if envelope.run_id != self.run_id {
            return Err(EnvelopeError::RunMismatch {
                expected: self.run_id.clone(),
                got: envelope.run_id,
            });
        }
        let expected_seq = self.envelopes.len() as u64 + 1;
        if envelope.sequence != expected_seq {
            return Err(EnvelopeError::SequenceGap {
                expected: expected_seq,
                got: envelope.sequence,
            });
        }
        self.check_next(envelope.stage, envelope.payload_kind)?;
        self.envelopes.push(envelope);
        Ok(())
    }

    fn check_next(&self, stage: Stage, payload_kind: PayloadKind) -> Result<(), EnvelopeError> {
        let expected_kind = PayloadKind::for_stage(stage);
        if payload_kind != expected_kind {
            return Err(EnvelopeError::KindMismatch {
                stage,
                expected: expected_kind,
                got: payload_kind,
            });
        }
        match self.envelopes.last() {
            Some(prev) => check_succession(prev.stage, stage),
            None if stage == Stage::Research => Ok(()),
            None => Err(EnvelopeError::StageOrder {
                prev: Stage::Research,
                got: stage,
            }),
        }
    }
}

/// The forward pipeline order plus the single allowed regression,
/// review -> draft (a refinement round).
fn check_succession(prev: Stage, next: Stage) -> Result<(), EnvelopeError> {
    let ok = matches!(
        (prev, next),
        (Stage::Research, Stage::Draft)
            | (Stage::Draft, Stage::Review)
            | (Stage::Review, Stage::Draft)
            | (Stage::Review, Stage::Visualise)
            | (Stage::Visualise, Stage::Translate)
    );
    if ok {
        Ok(())
    } else {
        Err(EnvelopeError::StageOrder { prev, got: next })
    }
}
