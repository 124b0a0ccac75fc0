use std::time::Instant;

/// Point on the monotonic clock.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Timestamp(Instant);

pub fn now_monotonic() -> Timestamp {
    Timestamp(Instant::now())
}

impl Timestamp {
    /// Seconds from `earlier` to `self`; zero if `earlier` is later.
    pub fn seconds_since(&self, earlier: Timestamp) -> f64 {
        self.0.saturating_duration_since(earlier.0).as_secs_f64()
    }

    pub fn elapsed_seconds(&self) -> f64 {
        now_monotonic().seconds_since(*self)
    }
}
