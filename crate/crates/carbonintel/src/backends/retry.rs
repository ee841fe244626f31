//! Retry with deterministic exponential backoff.
//!
//! Only transient errors (transport) are retried; fatal classes
//! propagate immediately. The schedule is base * 2^(attempt-1) with no
//! jitter, so runs stay reproducible; tests use a zero base.

use std::time::Duration;

use crate::backends::chat::BackendError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RetryPolicy {
    pub max_attempts: u32,
    pub base_delay: Duration,
}

impl RetryPolicy {
    /// `max_attempts` below 1 is meaningless and clamps to 1.
    pub fn new(max_attempts: u32, base_delay: Duration) -> Self {
        Self {
            max_attempts: max_attempts.max(1),
            base_delay,
        }
    }

    /// Immediate attempts, no sleeping. The default for scripted runs.
    pub fn immediate(max_attempts: u32) -> Self {
        Self::new(max_attempts, Duration::ZERO)
    }

    fn delay_after(&self, attempt: u32) -> Duration {
        // base * 2^(attempt-1); attempt is 1-based.
        self.base_delay * 2u32.saturating_pow(attempt.saturating_sub(1))
    }
}

/// Run `call` until success, a fatal error, or exhaustion. Returns the
/// value plus how many attempts it took. `call` receives the 1-based
/// attempt number.
pub fn with_retry<T>(
    policy: &RetryPolicy,
    mut call: impl FnMut(u32) -> Result<T, BackendError>,
) -> Result<(T, u32), BackendError> {
    let mut history = Vec::new();
    for attempt in 1..=policy.max_attempts {
        match call(attempt) {
            Ok(value) => return Ok((value, attempt)),
            Err(err) if err.is_transient() && attempt < policy.max_attempts => {
                history.push(err.to_string());
                let delay = policy.delay_after(attempt);
                if !delay.is_zero() {
                    std::thread::sleep(delay);
                }
            }
            Err(err) if err.is_transient() => {
                history.push(err.to_string());
                return Err(BackendError::Exhausted {
                    attempts: attempt,
                    history,
                    last: Box::new(err),
                });
            }
            Err(err) => return Err(err),
        }
    }
    unreachable!("loop always returns: max_attempts >= 1")
}
