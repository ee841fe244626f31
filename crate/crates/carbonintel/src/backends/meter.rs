//! Token and cost metering in exact integer arithmetic.
//!
//! Prices are micro-USD per 1000 tokens; accrued cost is nano-USD, so
//! cost_nano = tokens * price_micro_per_1k holds with no division and no
//! floating point. The meter total always equals the sum of the
//! per-stage breakdown because both are updated in one locked step.

use std::collections::BTreeMap;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::backends::chat::Usage;
use crate::core::Stage;

pub const NANO_PER_USD: u64 = 1_000_000_000;

/// One agent role's model assignment. Prices come from config; model ids
/// are opaque strings, never interpreted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelBinding {
    pub role: Stage,
    pub model_id: String,
    pub endpoint: String,
    /// Name of the environment variable holding the bearer token. The
    /// token itself is read per call and never stored or logged.
    pub api_key_env: String,
    pub prompt_price_micro_per_1k: u64,
    pub completion_price_micro_per_1k: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PriceError {
    #[error("malformed USD amount {0:?}")]
    Malformed(String),
    #[error("USD amount {0:?} has more than 6 decimal places")]
    TooPrecise(String),
}

/// Parse a decimal USD amount ("0.005") to micro-USD exactly. Floats are
/// never involved, so configured prices accrue without rounding drift.
pub fn parse_usd_to_micro(text: &str) -> Result<u64, PriceError> {
    let trimmed = text.trim();
    let (int_part, frac_part) = match trimmed.split_once('.') {
        Some((i, f)) => (i, f),
        None => (trimmed, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(PriceError::Malformed(text.to_owned()));
    }
    if !int_part.chars().all(|c| c.is_ascii_digit())
        || !frac_part.chars().all(|c| c.is_ascii_digit())
    {
        return Err(PriceError::Malformed(text.to_owned()));
    }
    if frac_part.len() > 6 {
        return Err(PriceError::TooPrecise(text.to_owned()));
    }
    let int_value: u64 = if int_part.is_empty() {
        0
    } else {
        int_part
            .parse()
            .map_err(|_| PriceError::Malformed(text.to_owned()))?
    };
    let mut frac_value: u64 = 0;
    if !frac_part.is_empty() {
        frac_value = frac_part
            .parse()
            .map_err(|_| PriceError::Malformed(text.to_owned()))?;
        frac_value *= 10u64.pow(6 - frac_part.len() as u32);
    }
    int_value
        .checked_mul(1_000_000)
        .and_then(|v| v.checked_add(frac_value))
        .ok_or_else(|| PriceError::Malformed(text.to_owned()))
}

/// Render nano-USD as a decimal string, trailing zeros trimmed but at
/// least two decimal places kept ("1.10", "0.025").
pub fn format_nano_usd(nano: u64) -> String {
    let whole = nano / NANO_PER_USD;
    let frac = nano % NANO_PER_USD;
    let mut digits = format!("{frac:09}");
    while digits.len() > 2 && digits.ends_with('0') {
        digits.pop();
    }
    format!("{whole}.{digits}")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct StageUsage {
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
    pub cost_nano_usd: u64,
}

impl StageUsage {
    fn add(&mut self, usage: &Usage, binding: &ModelBinding) {
        self.prompt_tokens += usage.prompt_tokens;
        self.completion_tokens += usage.completion_tokens;
        self.cost_nano_usd += usage.prompt_tokens * binding.prompt_price_micro_per_1k
            + usage.completion_tokens * binding.completion_price_micro_per_1k;
    }

    pub fn cost_usd_display(&self) -> String {
        format_nano_usd(self.cost_nano_usd)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct MeterSnapshot {
    pub total: StageUsage,
    pub by_stage: BTreeMap<String, StageUsage>,
}

/// Thread-safe accumulator shared by every agent in a run.
#[derive(Debug, Default)]
pub struct UsageMeter {
    state: Mutex<MeterSnapshot>,
}

impl UsageMeter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn accrue(&self, stage: Stage, usage: &Usage, binding: &ModelBinding) {
        let mut state = self.state.lock().expect("meter poisoned");
        state.total.add(usage, binding);
        state
            .by_stage
            .entry(stage.as_str().to_owned())
            .or_default()
            .add(usage, binding);
    }

    pub fn snapshot(&self) -> MeterSnapshot {
        self.state.lock().expect("meter poisoned").clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binding(prompt_micro: u64, completion_micro: u64) -> ModelBinding {
        ModelBinding {
            role: Stage::Research,
            model_id: "model-a".into(),
            endpoint: "http://stub".into(),
            api_key_env: "STUB_KEY".into(),
            prompt_price_micro_per_1k: prompt_micro,
            completion_price_micro_per_1k: completion_micro,
        }
    }

    #[test]
    fn thousand_prompt_tokens_cost_one_rate_unit() {
        let meter = UsageMeter::new();
        meter.accrue(
            Stage::Research,
            &Usage { prompt_tokens: 1000, completion_tokens: 0 },
            &binding(parse_usd_to_micro("0.005").unwrap(), 0),
        );
        let snap = meter.snapshot();
        // $0.005 exactly, in nano-USD.
        assert_eq!(snap.total.cost_nano_usd, 5_000_000);
        assert_eq!(snap.total.cost_usd_display(), "0.005");
    }

    #[test]
    fn mixed_usage_accumulates_exactly() {
        let meter = UsageMeter::new();
        let b = binding(
            parse_usd_to_micro("0.005").unwrap(),
            parse_usd_to_micro("0.015").unwrap(),
        );
        meter.accrue(
            Stage::Draft,
            &Usage { prompt_tokens: 2000, completion_tokens: 1000 },
            &b,
        );
        let snap = meter.snapshot();
        // 2000/1k * 0.005 + 1000/1k * 0.015 = 0.025.
        assert_eq!(snap.total.cost_nano_usd, 25_000_000);
        assert_eq!(snap.total.cost_usd_display(), "0.025");
    }

    #[test]
    fn zero_usage_changes_nothing() {
        let meter = UsageMeter::new();
        meter.accrue(Stage::Review, &Usage::default(), &binding(5000, 15000));
        let snap = meter.snapshot();
        assert_eq!(snap.total, StageUsage::default());
    }

    #[test]
    fn total_equals_sum_of_stages() {
        let meter = UsageMeter::new();
        let b = binding(5000, 15000);
        for (stage, prompt, completion) in [
            (Stage::Research, 1200, 300),
            (Stage::Draft, 800, 2000),
            (Stage::Research, 50, 60),
            (Stage::Translate, 10, 10),
        ] {
            meter.accrue(
                stage,
                &Usage { prompt_tokens: prompt, completion_tokens: completion },
                &b,
            );
        }
        let snap = meter.snapshot();
        let sum: u64 = snap.by_stage.values().map(|s| s.cost_nano_usd).sum();
        assert_eq!(snap.total.cost_nano_usd, sum);
        let prompt_sum: u64 = snap.by_stage.values().map(|s| s.prompt_tokens).sum();
        assert_eq!(snap.total.prompt_tokens, prompt_sum);
    }

    #[test]
    fn concurrent_accrual_loses_nothing() {
        let meter = std::sync::Arc::new(UsageMeter::new());
        let b = binding(1000, 1000);
        let mut handles = Vec::new();
        for _ in 0..8 {
            let meter = meter.clone();
            let b = b.clone();
            handles.push(std::thread::spawn(move || {
                for _ in 0..100 {
                    meter.accrue(
                        Stage::Review,
                        &Usage { prompt_tokens: 1, completion_tokens: 1 },
                        &b,
                    );
                }
            }));
        }
        for h in handles {
            h.join().unwrap();
        }
        let snap = meter.snapshot();
        assert_eq!(snap.total.prompt_tokens, 800);
        assert_eq!(snap.total.cost_nano_usd, 800 * 1000 + 800 * 1000);
    }

    #[test]
    fn usd_parsing_is_exact_and_strict() {
        assert_eq!(parse_usd_to_micro("0.005").unwrap(), 5_000);
        assert_eq!(parse_usd_to_micro("1.10").unwrap(), 1_100_000);
        assert_eq!(parse_usd_to_micro("2").unwrap(), 2_000_000);
        assert_eq!(parse_usd_to_micro(".5").unwrap(), 500_000);
        assert_eq!(parse_usd_to_micro("0.000001").unwrap(), 1);
        assert!(parse_usd_to_micro("0.0000001").is_err());
        assert!(parse_usd_to_micro("-1").is_err());
        assert!(parse_usd_to_micro("1.2.3").is_err());
        assert!(parse_usd_to_micro("").is_err());
        assert!(parse_usd_to_micro("$1").is_err());
    }

    #[test]
    fn display_keeps_two_decimals_minimum() {
        assert_eq!(format_nano_usd(1_100_000_000), "1.10");
        assert_eq!(format_nano_usd(0), "0.00");
        assert_eq!(format_nano_usd(25_000_000), "0.025");
        assert_eq!(format_nano_usd(1), "0.000000001");
    }
}
