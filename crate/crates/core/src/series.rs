//! Uniformly sampled daily series.

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

/// Internal marker for a missing observation. Distinct from 0; serialized as
/// an empty CSV cell and as `null` in JSON.
pub const MISSING: f64 = f64::NAN;

/// Returns true when `v` is the missing-value marker.
pub fn is_missing(v: f64) -> bool {
    v.is_nan()
}

/// A labelled, uniformly sampled (one value per day) real sequence.
///
/// The sampling interval is fixed at one day; `t0` is the calendar day of
/// `values[0]` and index `i` corresponds to `t0 + i` days.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub label: String,
    pub t0: NaiveDate,
    pub values: Vec<f64>,
}

/// Calendar day used for synthetic series that have no real origin.
pub fn synthetic_epoch() -> NaiveDate {
    NaiveDate::from_ymd_opt(2000, 1, 1).unwrap()
}

impl TimeSeries {
    pub fn new(label: impl Into<String>, t0: NaiveDate, values: Vec<f64>) -> Self {
        Self {
            label: label.into(),
            t0,
            values,
        }
    }

    /// Synthetic series anchored at the conventional epoch.
    pub fn synthetic(label: impl Into<String>, values: Vec<f64>) -> Self {
        Self::new(label, synthetic_epoch(), values)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Calendar day of sample `i`.
    pub fn date_at(&self, i: usize) -> NaiveDate {
        self.t0 + chrono::Days::new(i as u64)
    }

    /// True when any sample carries the missing-value marker.
    pub fn has_missing(&self) -> bool {
        self.values.iter().copied().any(is_missing)
    }

    /// Same dates and same length as `other`.
    pub fn aligned_with(&self, other: &TimeSeries) -> bool {
        self.t0 == other.t0 && self.len() == other.len()
    }

    /// Derived series sharing this one's origin.
    pub fn derived(&self, label: impl Into<String>, values: Vec<f64>) -> Self {
        Self::new(label, self.t0, values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn date_indexing() {
        let s = TimeSeries::synthetic("s", vec![1.0, 2.0, 3.0]);
        assert_eq!(s.date_at(0), synthetic_epoch());
        assert_eq!(s.date_at(2), NaiveDate::from_ymd_opt(2000, 1, 3).unwrap());
    }

    #[test]
    fn missing_marker_is_not_zero() {
        assert!(is_missing(MISSING));
        assert!(!is_missing(0.0));
    }
}
