//! One persona scoring one blinded report.
//!
//! The prompt carries the persona's expertise, the rubric definitions, and
//! the labeled report text; nothing else. The reply must be a single line
//! `SCORES: a,b,c,d` with integers 0..=25. A malformed reply earns one
//! re-ask; an out-of-range integer fails immediately because the judge
//! understood the format and still broke the scale.

use serde::{Deserialize, Serialize};

use crate::backends::{ChatMessage, ChatRequest, ModelBinding, with_retry};
use crate::core::Stage;
use crate::evaluation::blind::LabeledReport;
use crate::evaluation::rubric::{CRITERION_COUNT, CRITERION_MAX, Rubric};
use crate::evaluation::{EvalError, PersonaSpec};
use crate::pipeline::StageServices;

pub const SCORE_MAX_TOKENS: u32 = 256;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoreRecord {
    pub persona: String,
    pub label: String,
    pub scores: [u8; CRITERION_COUNT],
    /// Always the recomputed criterion sum.
    pub total: u8,
}

enum Violation {
    Grammar(String),
    Range(String),
}

fn parse_scores(text: &str) -> Result<[u8; CRITERION_COUNT], Violation> {
    let line = text
        .lines()
        .map(str::trim)
        .find(|l| l.starts_with("SCORES:"))
        .ok_or_else(|| Violation::Grammar("no SCORES: line present".into()))?;
    let rest = &line["SCORES:".len()..];
    let parts: Vec<&str> = rest.split(',').map(str::trim).collect();
    if parts.len() != CRITERION_COUNT {
        return Err(Violation::Grammar(format!(
            "expected {CRITERION_COUNT} comma-separated scores, found {}",
            parts.len()
        )));
    }
    let mut scores = [0u8; CRITERION_COUNT];
    for (i, part) in parts.iter().enumerate() {
        let value: i64 = part
            .parse()
            .map_err(|_| Violation::Grammar(format!("score {part:?} is not an integer")))?;
        if !(0..=CRITERION_MAX as i64).contains(&value) {
            return Err(Violation::Range(format!(
                "score {value} outside 0..={CRITERION_MAX}"
            )));
        }
        scores[i] = value as u8;
    }
    Ok(scores)
}

fn build_messages(persona: &PersonaSpec, report: &LabeledReport, rubric: &Rubric) -> Vec<ChatMessage> {
    let system = format!(
        "You are {name}, an expert in {expertise}, serving on the {group} panel. \
         Judge the report below strictly from that perspective.\n\n\
         Score each criterion from 0 to {max}:\n{definitions}\n\
         Reply with exactly one line and nothing else:\n\
         SCORES: <{c1}>,<{c2}>,<{c3}>,<{c4}>",
        name = persona.name,
        expertise = persona.expertise,
        group = persona.group.display_name(),
        max = CRITERION_MAX,
        definitions = rubric.definitions_text(),
        c1 = rubric.names()[0],
        c2 = rubric.names()[1],
        c3 = rubric.names()[2],
        c4 = rubric.names()[3],
    );
    let user = format!("{label}\n\n{text}", label = report.label, text = report.text);
    vec![ChatMessage::system(system), ChatMessage::user(user)]
}

/// One metered, retried completion under the persona's own name. Persona
/// usage accrues to the review stage of the meter.
fn persona_call(
    services: &StageServices,
    binding: &ModelBinding,
    persona: &str,
    messages: Vec<ChatMessage>,
) -> Result<String, EvalError> {
    let request = ChatRequest {
        model_id: binding.model_id.clone(),
        messages,
        max_tokens: SCORE_MAX_TOKENS,
        temperature: 0.0,
    };
    let (response, _attempts) = with_retry(&services.retry, |_| {
        services.backend.complete(persona, Stage::Review, &request)
    })
    .map_err(|e| EvalError::Score(format!("{persona}: {e}")))?;
    services.meter.accrue(Stage::Review, &response.usage, binding);
    Ok(response.content)
}

/// Scores one labeled report with one persona. Grammar violations earn a
/// single re-ask quoting the violation; range violations fail at once.
pub fn score_report(
    persona: &PersonaSpec,
    report: &LabeledReport,
    rubric: &Rubric,
    binding: &ModelBinding,
    services: &StageServices,
) -> Result<ScoreRecord, EvalError> {
    let mut messages = build_messages(persona, report, rubric);
    let first = persona_call(services, binding, &persona.name, messages.clone())?;
    let scores = match parse_scores(&first) {
        Ok(scores) => scores,
        Err(Violation::Range(detail)) => {
            return Err(EvalError::Score(format!("{}: {detail}", persona.name)));
        }
        Err(Violation::Grammar(violation)) => {
            messages.push(ChatMessage::assistant(&first));
            messages.push(ChatMessage::user(format!(
                "The previous response violated the documented response format: {violation}. \
                 Reply again using only that format."
            )));
            let second = persona_call(services, binding, &persona.name, messages)?;
            match parse_scores(&second) {
                Ok(scores) => scores,
                Err(Violation::Range(detail)) => {
                    return Err(EvalError::Score(format!("{}: {detail}", persona.name)));
                }
                Err(Violation::Grammar(v)) => {
                    return Err(EvalError::Score(format!(
                        "{}: response format violation after one re-ask: {v}",
                        persona.name
                    )));
                }
            }
        }
    };
    Ok(ScoreRecord {
        persona: persona.name.clone(),
        label: report.label.clone(),
        scores,
        total: scores.iter().sum(),
    })
}
