//! Time sources.
//!
//! Runs observe time only through a [`Clock`], so a scripted run can pin
//! every timestamp and stay byte-reproducible. Timestamps are truncated to
//! whole seconds; sub-second precision never survives the canonical
//! encoding anyway.

use crate::core::Timestamp;
use chrono::{DateTime, TimeZone, Utc};
use std::sync::atomic::{AtomicU64, Ordering};

pub trait Clock: Send + Sync {
    fn now(&self) -> Timestamp;
}

/// Wall clock, truncated to seconds.
pub struct SystemClock;

impl Clock for SystemClock {
    fn now(&self) -> Timestamp {
        Timestamp::from_datetime(Utc::now())
    }
}

/// Deterministic clock: starts at a fixed instant and advances by a fixed
/// step on every observation.
pub struct FixedClock {
    start: DateTime<Utc>,
    step_seconds: u64,
    ticks: AtomicU64,
}

impl FixedClock {
    pub fn new(start: DateTime<Utc>, step_seconds: u64) -> Self {
        Self {
            start,
            step_seconds,
            ticks: AtomicU64::new(0),
        }
    }

    /// Clock used by scripted runs when no explicit start is configured.
    pub fn scripted_default() -> Self {
        Self::new(Utc.with_ymd_and_hms(2025, 1, 1, 0, 0, 0).unwrap(), 1)
    }
}

impl Clock for FixedClock {
    fn now(&self) -> Timestamp {
        let n = self.ticks.fetch_add(1, Ordering::SeqCst);
        Timestamp::from_datetime(
            self.start + chrono::Duration::seconds((n * self.step_seconds) as i64),
        )
    }
}
