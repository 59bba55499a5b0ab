use chrono::{DateTime, TimeZone, Utc};

/// Source of UTC instants for timestamps written into artifacts.
///
/// Pipelines that must be byte-reproducible use [`Clock::Fixed`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[derive(Default)]
pub enum Clock {
    #[default]
    System,
    Fixed(DateTime<Utc>),
}

impl Clock {
    /// Fixed clock pinned to the Unix epoch.
    pub fn epoch() -> Self {
        Clock::Fixed(Utc.timestamp_opt(0, 0).unwrap())
    }

    pub fn now(&self) -> DateTime<Utc> {
        match self {
            Clock::System => Utc::now(),
            Clock::Fixed(t) => *t,
        }
    }
}

