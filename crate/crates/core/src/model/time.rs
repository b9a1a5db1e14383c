use std::fmt;
use std::ops::Add;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::ModelError;

/// Upper bound (exclusive) for finite time values, in seconds.
pub const TIME_LIMIT: u32 = 1 << 31;

/// Seconds since the start of the service day.
///
/// `Time::INFINITY` compares greater than every finite value and absorbs
/// any addition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Time(u32);

impl Time {
    pub const INFINITY: Time = Time(u32::MAX);
    pub const ZERO: Time = Time(0);

    /// Builds a finite time. Values at or beyond `TIME_LIMIT` are rejected.
    pub fn from_secs(secs: u32) -> Result<Time, ModelError> {
        if secs >= TIME_LIMIT {
            return Err(ModelError::TimeOutOfRange(u64::from(secs)));
        }
        Ok(Time(secs))
    }

    pub fn from_hms(hours: u32, minutes: u32, seconds: u32) -> Result<Time, ModelError> {
        let total = u64::from(hours) * 3600 + u64::from(minutes) * 60 + u64::from(seconds);
        if total >= u64::from(TIME_LIMIT) {
            return Err(ModelError::TimeOutOfRange(total));
        }
        Ok(Time(total as u32))
    }

    /// Parses `HH:MM:SS`. Hours may exceed 23 (trips running past midnight).
    pub fn parse_hms(text: &str) -> Result<Time, ModelError> {
        let bad = || ModelError::BadTimeFormat(text.to_owned());
        let mut parts = text.trim().split(':');
        let (h, m, s) = match (parts.next(), parts.next(), parts.next(), parts.next()) {
            (Some(h), Some(m), Some(s), None) => (h, m, s),
            _ => return Err(bad()),
        };
        let field = |f: &str, max_len: usize| -> Result<u32, ModelError> {
            if f.is_empty() || f.len() > max_len || !f.bytes().all(|b| b.is_ascii_digit()) {
                return Err(bad());
            }
            f.parse().map_err(|_| bad())
        };
        let (h, m, s) = (field(h, 6)?, field(m, 2)?, field(s, 2)?);
        if m >= 60 || s >= 60 {
            return Err(bad());
        }
        Time::from_hms(h, m, s)
    }

    pub fn is_finite(self) -> bool {
        self != Time::INFINITY
    }

    /// Raw seconds. Panics on `INFINITY`.
    pub fn secs(self) -> u32 {
        assert!(self.is_finite(), "seconds of an infinite time");
        self.0
    }

    pub fn checked_secs(self) -> Option<u32> {
        self.is_finite().then_some(self.0)
    }

    /// Seconds elapsed since `earlier`, or `None` when either side is infinite
    /// or `earlier` is later.
    pub fn since(self, earlier: Time) -> Option<Duration> {
        if !self.is_finite() || !earlier.is_finite() || earlier > self {
            return None;
        }
        Some(Duration(self.0 - earlier.0))
    }
}

impl Add<Duration> for Time {
    type Output = Time;

    fn add(self, rhs: Duration) -> Time {
        if !self.is_finite() {
            return Time::INFINITY;
        }
        match self.0.checked_add(rhs.0) {
            Some(v) if v < TIME_LIMIT => Time(v),
            _ => Time::INFINITY,
        }
    }
}

impl fmt::Display for Time {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.is_finite() {
            return f.write_str("--:--:--");
        }
        let s = self.0;
        write!(f, "{:02}:{:02}:{:02}", s / 3600, (s / 60) % 60, s % 60)
    }
}

impl FromStr for Time {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Time::parse_hms(s)
    }
}

/// Non-negative span of seconds.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Duration(pub u32);

impl Duration {
    pub const ZERO: Duration = Duration(0);

    pub fn secs(self) -> u32 {
        self.0
    }

    pub fn saturating_add(self, other: Duration) -> Duration {
        Duration(self.0.saturating_add(other.0))
    }
}

impl Add for Duration {
    type Output = Duration;

    fn add(self, rhs: Duration) -> Duration {
        self.saturating_add(rhs)
    }
}

impl fmt::Display for Duration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}s", self.0)
    }
}
