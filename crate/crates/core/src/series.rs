//! Core series containers: timestamped observations and time-aligned pairs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Minimum aligned length accepted for pairwise analysis: five times the
/// smallest scale of 30 observations.
pub const MIN_ALIGNED_LEN: usize = 150;

/// What the values of a series represent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesKind {
    Price,
    Return,
    Volume,
    VolumeChange,
    Generic,
}

impl std::fmt::Display for SeriesKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            SeriesKind::Price => "price",
            SeriesKind::Return => "return",
            SeriesKind::Volume => "volume",
            SeriesKind::VolumeChange => "volume_change",
            SeriesKind::Generic => "generic",
        };
        f.write_str(s)
    }
}

/// A labelled, timestamped series of finite real observations.
///
/// Timestamps are UTC epoch seconds, strictly increasing. Both invariants are
/// enforced at construction so downstream code can rely on them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    timestamps: Vec<i64>,
    values: Vec<f64>,
    pub label: String,
    pub kind: SeriesKind,
}

impl TimeSeries {
    pub fn new(
        label: impl Into<String>,
        kind: SeriesKind,
        timestamps: Vec<i64>,
        values: Vec<f64>,
    ) -> Result<Self> {
        let label = label.into();
        if timestamps.len() != values.len() {
            return Err(Error::InvalidSeries {
                label,
                reason: format!(
                    "{} timestamps but {} values",
                    timestamps.len(),
                    values.len()
                ),
            });
        }
        if let Some(w) = timestamps.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::InvalidSeries {
                label,
                reason: format!(
                    "timestamps not strictly increasing at {} -> {}",
                    w[0], w[1]
                ),
            });
        }
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidSeries {
                label,
                reason: format!("non-finite value {v} at index {i}"),
            });
        }
        Ok(Self {
            timestamps,
            values,
            label,
            kind,
        })
    }

    /// Build a series from values alone, on a synthetic 1-second grid.
    pub fn from_values(label: impl Into<String>, kind: SeriesKind, values: Vec<f64>) -> Result<Self> {
        let timestamps = (0..values.len() as i64).collect();
        Self::new(label, kind, timestamps, values)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn timestamps(&self) -> &[i64] {
        &self.timestamps
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Replace the values while keeping timestamps, label and kind.
    /// The new values must be finite and of equal length.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Self::new(self.label.clone(), self.kind, self.timestamps.clone(), values)
    }

    /// Restrict the series to timestamps within `[start, end]` (inclusive).
    pub fn slice_time(&self, start: i64, end: i64) -> Result<Self> {
        let pairs: (Vec<i64>, Vec<f64>) = self
            .timestamps
            .iter()
            .zip(&self.values)
            .filter(|(t, _)| **t >= start && **t <= end)
            .map(|(t, v)| (*t, *v))
            .unzip();
        Self::new(self.label.clone(), self.kind, pairs.0, pairs.1)
    }
}

/// Two series restricted to their exact common timestamps.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AlignedPair {
    x: TimeSeries,
    y: TimeSeries,
    common_timestamps: Vec<i64>,
}

impl AlignedPair {
    /// Construct from already-aligned members; verifies the alignment.
    pub(crate) fn from_aligned(x: TimeSeries, y: TimeSeries) -> Result<Self> {
        if x.timestamps() != y.timestamps() {
            return Err(Error::InvalidSeries {
                label: format!("{}/{}", x.label, y.label),
                reason: "pair members have different timestamps".into(),
            });
        }
        if x.len() < MIN_ALIGNED_LEN {
            return Err(Error::InsufficientOverlap {
                x_len: x.len(),
                y_len: y.len(),
                overlap: x.len(),
                required: MIN_ALIGNED_LEN,
            });
        }
        let common_timestamps = x.timestamps().to_vec();
        Ok(Self {
            x,
            y,
            common_timestamps,
        })
    }

    pub fn x(&self) -> &TimeSeries {
        &self.x
    }

    pub fn y(&self) -> &TimeSeries {
        &self.y
    }

    pub fn common_timestamps(&self) -> &[i64] {
        &self.common_timestamps
    }

    pub fn len(&self) -> usize {
        self.common_timestamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.common_timestamps.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_unsorted_timestamps() {
        let err = TimeSeries::new("t", SeriesKind::Generic, vec![3, 2, 5], vec![1.0, 2.0, 3.0]);
        assert!(matches!(err, Err(Error::InvalidSeries { .. })));
    }

    #[test]
    fn rejects_duplicate_timestamps() {
        let err = TimeSeries::new("t", SeriesKind::Generic, vec![1, 1], vec![1.0, 2.0]);
        assert!(matches!(err, Err(Error::InvalidSeries { .. })));
    }

    #[test]
    fn rejects_non_finite_values() {
        let err = TimeSeries::new("t", SeriesKind::Generic, vec![1, 2], vec![1.0, f64::NAN]);
        assert!(matches!(err, Err(Error::InvalidSeries { .. })));
    }

    #[test]
    fn slice_time_keeps_inclusive_bounds() {
        let s = TimeSeries::new(
            "t",
            SeriesKind::Generic,
            vec![10, 20, 30, 40],
            vec![1.0, 2.0, 3.0, 4.0],
        )
        .unwrap();
        let cut = s.slice_time(20, 30).unwrap();
        assert_eq!(cut.timestamps(), &[20, 30]);
        assert_eq!(cut.values(), &[2.0, 3.0]);
    }
}
