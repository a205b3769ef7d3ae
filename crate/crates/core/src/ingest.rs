//! Loading, transforming and time-aligning raw series.
//!
//! All transforms are pure value functions; they can be called from
//! concurrent tasks without coordination.

use std::collections::HashSet;
use std::path::Path;

use chrono::{DateTime, NaiveDateTime};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{AlignedPair, SeriesKind, TimeSeries, MIN_ALIGNED_LEN};

/// Log returns of a strictly positive price series: `ln p[i+1] - ln p[i]`,
/// stamped at the later observation.
pub fn log_returns(prices: &TimeSeries) -> Result<TimeSeries> {
    if prices.kind != SeriesKind::Price {
        return Err(Error::InvalidSeries {
            label: prices.label.clone(),
            reason: format!("log_returns expects kind=price, got {}", prices.kind),
        });
    }
    log_differences(prices, SeriesKind::Return)
}

/// Log changes of a trading-volume series, computed like log returns.
///
/// Bars with zero or negative volume are dropped (and counted) before
/// differencing rather than imputed; a log cannot be taken of them and
/// dropping preserves the multiset of valid observations.
pub fn volume_changes(volume: &TimeSeries) -> Result<TimeSeries> {
    if volume.kind != SeriesKind::Volume {
        return Err(Error::InvalidSeries {
            label: volume.label.clone(),
            reason: format!("volume_changes expects kind=volume, got {}", volume.kind),
        });
    }
    let dropped: Vec<i64> = volume
        .timestamps()
        .iter()
        .zip(volume.values())
        .filter(|(_, v)| **v <= 0.0)
        .map(|(t, _)| *t)
        .collect();
    if dropped.is_empty() {
        return log_differences(volume, SeriesKind::VolumeChange);
    }
    log::warn!(
        "`{}`: dropping {} non-positive volume bars before differencing",
        volume.label,
        dropped.len()
    );
    let (ts, vs): (Vec<i64>, Vec<f64>) = volume
        .timestamps()
        .iter()
        .zip(volume.values())
        .filter(|(_, v)| **v > 0.0)
        .map(|(t, v)| (*t, *v))
        .unzip();
    if ts.len() < 2 {
        return Err(Error::InvalidSeries {
            label: volume.label.clone(),
            reason: format!(
                "fewer than 2 positive volume bars remain; offending timestamps {dropped:?}"
            ),
        });
    }
    let cleaned = TimeSeries::new(volume.label.clone(), SeriesKind::Volume, ts, vs)?;
    log_differences(&cleaned, SeriesKind::VolumeChange)
}

fn log_differences(series: &TimeSeries, out_kind: SeriesKind) -> Result<TimeSeries> {
    if series.len() < 2 {
        return Err(Error::InsufficientData {
            required: 2,
            actual: series.len(),
            context: format!("log differences of `{}`", series.label),
        });
    }
    if let Some((i, v)) = series
        .values()
        .iter()
        .enumerate()
        .find(|(_, v)| **v <= 0.0)
    {
        return Err(Error::NonPositiveValue {
            label: series.label.clone(),
            index: i,
            value: *v,
            context: "log differences require strictly positive values".into(),
        });
    }
    let values: Vec<f64> = series
        .values()
        .windows(2)
        .map(|w| w[1].ln() - w[0].ln())
        .collect();
    let timestamps = series.timestamps()[1..].to_vec();
    TimeSeries::new(series.label.clone(), out_kind, timestamps, values)
}

/// Restrict two series to their exact common timestamps, order preserved.
///
/// Rejects pairs whose overlap is shorter than [`MIN_ALIGNED_LEN`].
pub fn align(x: &TimeSeries, y: &TimeSeries) -> Result<AlignedPair> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::InsufficientData {
            required: 1,
            actual: 0,
            context: format!("align `{}` with `{}`", x.label, y.label),
        });
    }
    let y_times: HashSet<i64> = y.timestamps().iter().copied().collect();
    let common: Vec<i64> = x
        .timestamps()
        .iter()
        .copied()
        .filter(|t| y_times.contains(t))
        .collect();
    if common.len() < MIN_ALIGNED_LEN {
        return Err(Error::InsufficientOverlap {
            x_len: x.len(),
            y_len: y.len(),
            overlap: common.len(),
            required: MIN_ALIGNED_LEN,
        });
    }
    let keep: HashSet<i64> = common.iter().copied().collect();
    let restrict = |s: &TimeSeries| -> Result<TimeSeries> {
        let (ts, vs): (Vec<i64>, Vec<f64>) = s
            .timestamps()
            .iter()
            .zip(s.values())
            .filter(|(t, _)| keep.contains(t))
            .map(|(t, v)| (*t, *v))
            .unzip();
        TimeSeries::new(s.label.clone(), s.kind, ts, vs)
    };
    AlignedPair::from_aligned(restrict(x)?, restrict(y)?)
}

/// How to read one series from a delimited text file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CsvSpec {
    pub timestamp_column: String,
    pub value_column: String,
    /// Field delimiter, a single byte (default `,`).
    pub delimiter: u8,
    /// Fixed offset added to naive timestamps to normalize them to UTC,
    /// in seconds. Timestamps that carry an explicit zone ignore it.
    pub utc_offset_seconds: i64,
    /// Optional DST windows `(start_utc, end_utc, extra_offset_seconds)`
    /// applied on top of the fixed offset for naive timestamps.
    pub dst_windows: Vec<(i64, i64, i64)>,
}

impl Default for CsvSpec {
    fn default() -> Self {
        Self {
            timestamp_column: "timestamp".into(),
            value_column: "value".into(),
            delimiter: b',',
            utc_offset_seconds: 0,
            dst_windows: Vec::new(),
        }
    }
}

/// Read one series from a CSV file with a header row.
///
/// Timestamps may be epoch seconds or ISO-8601 (with or without an explicit
/// zone). Unparseable rows abort the read and are reported with their
/// 1-based line numbers.
pub fn read_csv(path: &Path, label: &str, kind: SeriesKind, spec: &CsvSpec) -> Result<TimeSeries> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(spec.delimiter)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let headers = reader.headers()?.clone();
    let find = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::CsvColumn {
                path: path.display().to_string(),
                column: name.to_string(),
                available: headers.iter().map(|s| s.to_string()).collect(),
            })
    };
    let t_idx = find(&spec.timestamp_column)?;
    let v_idx = find(&spec.value_column)?;

    let mut timestamps = Vec::new();
    let mut values = Vec::new();
    let mut bad_lines = Vec::new();
    let mut detail = String::new();
    for (row_idx, record) in reader.records().enumerate() {
        let line = row_idx + 2; // header is line 1
        let record = record?;
        let t_raw = record.get(t_idx).unwrap_or("");
        let v_raw = record.get(v_idx).unwrap_or("");
        match (parse_timestamp(t_raw, spec), v_raw.parse::<f64>()) {
            (Some(t), Ok(v)) if v.is_finite() => {
                timestamps.push(t);
                values.push(v);
            }
            _ => {
                if bad_lines.is_empty() {
                    detail = format!("first bad row: timestamp={t_raw:?} value={v_raw:?}");
                }
                bad_lines.push(line);
            }
        }
    }
    if !bad_lines.is_empty() {
        return Err(Error::CsvParse {
            path: path.display().to_string(),
            lines: bad_lines,
            detail,
        });
    }

    // Sources may export rows in any order; sort before the invariant check
    // so only true duplicates are rejected.
    let mut order: Vec<usize> = (0..timestamps.len()).collect();
    order.sort_by_key(|&i| timestamps[i]);
    let timestamps: Vec<i64> = order.iter().map(|&i| timestamps[i]).collect();
    let values: Vec<f64> = order.iter().map(|&i| values[i]).collect();
    TimeSeries::new(label, kind, timestamps, values)
}

/// Write a series as `timestamp,value` CSV.
pub fn write_csv(path: &Path, series: &TimeSeries) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["timestamp", "value"])?;
    for (t, v) in series.timestamps().iter().zip(series.values()) {
        w.write_record([t.to_string(), format!("{v:.17e}")])?;
    }
    w.flush()?;
    Ok(())
}

fn parse_timestamp(raw: &str, spec: &CsvSpec) -> Option<i64> {
    if raw.is_empty() {
        return None;
    }
    if let Ok(epoch) = raw.parse::<i64>() {
        return Some(epoch);
    }
    // Zone-aware forms are taken at face value.
    if let Ok(dt) = DateTime::parse_from_rfc3339(raw) {
        return Some(dt.timestamp());
    }
    if let Ok(dt) = DateTime::parse_from_str(raw, "%Y-%m-%d %H:%M:%S%z") {
        return Some(dt.timestamp());
    }
    // Naive forms are local to the source; apply the configured offset.
    let naive = NaiveDateTime::parse_from_str(raw, "%Y-%m-%dT%H:%M:%S")
        .or_else(|_| NaiveDateTime::parse_from_str(raw, "%Y-%m-%d %H:%M:%S"))
        .ok()?;
    let local = naive.and_utc().timestamp();
    let mut utc = local - spec.utc_offset_seconds;
    for &(start, end, extra) in &spec.dst_windows {
        if utc >= start && utc < end {
            utc -= extra;
            break;
        }
    }
    Some(utc)
}
