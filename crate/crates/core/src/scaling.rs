//! Shared numerical engine for (MF-)DFA and (MF-)DCCA: profile construction,
//! segmentation, polynomial detrending, q-order fluctuation surfaces and the
//! log-log scaling regression.
//!
//! A single-series surface is computed by the cross-correlation kernel with
//! both inputs bound to the same series, so the single and cross paths cannot
//! diverge.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polyfit;
use crate::series::{AlignedPair, TimeSeries};

/// Tolerance for recognizing the q = 0 branch on a real-valued grid.
const Q_ZERO_EPS: f64 = 1e-12;

/// Smallest number of valid scales a per-q regression will accept.
const MIN_FIT_SCALES: usize = 4;

/// Paper-convention segment sizes: 30 observations up to one fifth of the
/// series length.
pub const DEFAULT_MIN_SCALE: usize = 30;
pub const DEFAULT_SCALE_COUNT: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    LogSpaced,
    Explicit,
}

/// Strictly increasing segment sizes used for the fluctuation surface.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScaleGrid {
    scales: Vec<usize>,
    pub spacing: Spacing,
    /// Permit scales beyond N/5; set by [`ScaleGrid::allow_large_scales`].
    max_override: bool,
}

impl ScaleGrid {
    /// `count` log-spaced integer scales between `s_min` and `s_max`
    /// (inclusive), deduplicated after rounding.
    pub fn log_spaced(s_min: usize, s_max: usize, count: usize) -> Result<Self> {
        if s_min < 4 {
            return Err(Error::InvalidGrid(format!(
                "minimum scale {s_min} < 4 cannot overdetermine any detrend"
            )));
        }
        if s_max < s_min {
            return Err(Error::InvalidGrid(format!(
                "scale range inverted: {s_min}..{s_max}"
            )));
        }
        if count < 2 {
            return Err(Error::InvalidGrid("need at least 2 scales".into()));
        }
        let (a, b) = ((s_min as f64).ln(), (s_max as f64).ln());
        let mut scales: Vec<usize> = (0..count)
            .map(|i| {
                let t = i as f64 / (count - 1) as f64;
                (a + t * (b - a)).exp().round() as usize
            })
            .collect();
        scales.dedup();
        Ok(Self {
            scales,
            spacing: Spacing::LogSpaced,
            max_override: false,
        })
    }

    /// An explicit, strictly increasing list of scales.
    pub fn explicit(scales: Vec<usize>) -> Result<Self> {
        if scales.is_empty() {
            return Err(Error::InvalidGrid("need at least 1 scale".into()));
        }
        if scales.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidGrid(
                "scales must be strictly increasing".into(),
            ));
        }
        if scales[0] < 4 {
            return Err(Error::InvalidGrid(format!(
                "minimum scale {} < 4 cannot overdetermine any detrend",
                scales[0]
            )));
        }
        Ok(Self {
            scales,
            spacing: Spacing::Explicit,
            max_override: false,
        })
    }

    /// The paper-convention grid for a series of length `n`:
    /// ~20 log-spaced scales from 30 to n/5.
    pub fn default_for_length(n: usize) -> Result<Self> {
        let s_max = n / 5;
        if s_max <= DEFAULT_MIN_SCALE {
            return Err(Error::InsufficientData {
                required: 5 * (DEFAULT_MIN_SCALE + 1),
                actual: n,
                context: "default scale grid (30 .. n/5)".into(),
            });
        }
        Self::log_spaced(DEFAULT_MIN_SCALE, s_max, DEFAULT_SCALE_COUNT)
    }

    /// Permit scales beyond the n/5 convention (validation still requires
    /// every scale to fit the series).
    pub fn allow_large_scales(mut self) -> Self {
        self.max_override = true;
        self
    }

    pub fn scales(&self) -> &[usize] {
        &self.scales
    }

    pub fn min(&self) -> usize {
        self.scales[0]
    }

    pub fn max(&self) -> usize {
        *self.scales.last().unwrap()
    }

    /// Check the grid against a concrete series length and detrend order.
    pub fn validate(&self, n: usize, detrend_order: usize) -> Result<()> {
        let min_required = 4.max(detrend_order + 2);
        if self.min() < min_required {
            return Err(Error::InvalidGrid(format!(
                "minimum scale {} < {} required for detrend order {}",
                self.min(),
                min_required,
                detrend_order
            )));
        }
        if self.max() > n {
            return Err(Error::InvalidGrid(format!(
                "maximum scale {} exceeds series length {}",
                self.max(),
                n
            )));
        }
        if !self.max_override && self.max() > n / 5 {
            return Err(Error::InvalidGrid(format!(
                "maximum scale {} exceeds n/5 = {} (use allow_large_scales to override)",
                self.max(),
                n / 5
            )));
        }
        Ok(())
    }
}

/// Strictly increasing moment orders; must contain q = 0 and q = 2.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QGrid {
    orders: Vec<f64>,
    pub symmetric: bool,
}

impl QGrid {
    /// Build from an explicit list. Entries within 1e-9 of 0 or 2 are snapped
    /// to those values exactly so the q = 0 branch and h(2) extraction are
    /// unambiguous.
    pub fn new(mut orders: Vec<f64>) -> Result<Self> {
        if orders.len() < 2 {
            return Err(Error::InvalidGrid("need at least 2 q orders".into()));
        }
        if orders.iter().any(|q| !q.is_finite()) {
            return Err(Error::InvalidGrid("non-finite q order".into()));
        }
        if orders.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidGrid("q orders must be strictly increasing".into()));
        }
        for q in orders.iter_mut() {
            if (*q).abs() < 1e-9 {
                *q = 0.0;
            } else if (*q - 2.0).abs() < 1e-9 {
                *q = 2.0;
            }
        }
        if !orders.contains(&0.0) || !orders.contains(&2.0) {
            return Err(Error::InvalidGrid(
                "q grid must contain q = 0 and q = 2".into(),
            ));
        }
        let symmetric = (orders[0] + orders[orders.len() - 1]).abs() < 1e-9;
        Ok(Self { orders, symmetric })
    }

    /// Symmetric grid from `-q_max` to `q_max` in steps of `step`.
    pub fn symmetric_range(q_max: f64, step: f64) -> Result<Self> {
        if q_max <= 0.0 || step <= 0.0 || q_max.is_nan() || step.is_nan() {
            return Err(Error::InvalidGrid(format!(
                "symmetric q grid needs positive q_max and step, got {q_max}, {step}"
            )));
        }
        let half = (q_max / step).round() as i64;
        if ((half as f64) * step - q_max).abs() > 1e-9 {
            return Err(Error::InvalidGrid(format!(
                "step {step} does not divide q_max {q_max}"
            )));
        }
        let orders: Vec<f64> = (-half..=half).map(|i| i as f64 * step).collect();
        Self::new(orders)
    }

    /// The paper-default grid: q from -4 to 4 in steps of 0.25.
    pub fn default_grid() -> Self {
        Self::symmetric_range(4.0, 0.25).expect("default grid is valid")
    }

    pub fn orders(&self) -> &[f64] {
        &self.orders
    }

    pub fn len(&self) -> usize {
        self.orders.len()
    }

    pub fn is_empty(&self) -> bool {
        self.orders.is_empty()
    }

    pub fn index_of(&self, q: f64) -> Option<usize> {
        self.orders.iter().position(|&x| (x - q).abs() < 1e-12)
    }
}

/// Cumulative deviations from the mean: `out[k] = sum_{i<=k} (x[i] - mean)`.
/// This is the object that gets segmented and detrended.
pub fn profile(values: &[f64]) -> Result<Vec<f64>> {
    if values.len() < 2 {
        return Err(Error::InsufficientData {
            required: 2,
            actual: values.len(),
            context: "profile".into(),
        });
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let mut acc = 0.0;
    Ok(values
        .iter()
        .map(|v| {
            acc += v - mean;
            acc
        })
        .collect())
}

/// Half-open index ranges of the non-overlapping segments of size `s`:
/// `floor(n/s)` from the front and, if `bidirectional`, as many again from
/// the back.
pub(crate) fn segment_ranges(
    n: usize,
    s: usize,
    bidirectional: bool,
) -> Result<Vec<(usize, usize)>> {
    if s > n {
        return Err(Error::InvalidParameter {
            name: "scale",
            value: s as f64,
            constraint: format!("segment size exceeds series length {n}"),
        });
    }
    if s == 0 {
        return Err(Error::InvalidParameter {
            name: "scale",
            value: 0.0,
            constraint: "segment size must be positive".into(),
        });
    }
    let n_s = n / s;
    let mut ranges = Vec::with_capacity(if bidirectional { 2 * n_s } else { n_s });
    for v in 0..n_s {
        ranges.push((v * s, (v + 1) * s));
    }
    if bidirectional {
        for v in 0..n_s {
            ranges.push((n - (v + 1) * s, n - v * s));
        }
    }
    Ok(ranges)
}

/// Split `seq` into non-overlapping segments of size `s`.
pub fn segment(seq: &[f64], s: usize, bidirectional: bool) -> Result<Vec<&[f64]>> {
    Ok(segment_ranges(seq.len(), s, bidirectional)?
        .into_iter()
        .map(|(a, b)| &seq[a..b])
        .collect())
}

/// Remove each segment's own order-`m` polynomial trend; returns both
/// residual vectors.
pub fn detrend_residuals(
    segment_x: &[f64],
    segment_y: &[f64],
    m: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if segment_x.len() != segment_y.len() {
        return Err(Error::InvalidParameter {
            name: "segment_len",
            value: segment_y.len() as f64,
            constraint: format!("segments differ in length: {}", segment_x.len()),
        });
    }
    Ok((polyfit::detrend(segment_x, m)?, polyfit::detrend(segment_y, m)?))
}

/// Detrended covariance of one segment: `(1/s) * sum_k rx[k] * ry[k]`.
/// Signed in cross mode; equals the mean squared residual in single mode.
pub fn segment_covariance(residuals_x: &[f64], residuals_y: &[f64]) -> f64 {
    let s = residuals_x.len();
    let dot: f64 = residuals_x
        .iter()
        .zip(residuals_y)
        .map(|(a, b)| a * b)
        .sum();
    dot / s as f64
}

/// Per-segment second moments at one scale.
#[derive(Debug, Clone, Copy)]
pub(crate) struct SegmentMoments {
    pub xy: f64,
    pub xx: f64,
    pub yy: f64,
}

/// Detrend every segment of both profiles at scale `s` and collect the
/// cross and self covariances. When `py` aliases `px` the residuals are
/// computed once, so single mode is exactly cross mode with y = x.
pub(crate) fn scale_moments(
    px: &[f64],
    py: &[f64],
    s: usize,
    m: usize,
    bidirectional: bool,
) -> Result<Vec<SegmentMoments>> {
    let same = std::ptr::eq(px, py);
    let ranges = segment_ranges(px.len(), s, bidirectional)?;
    let mut rx = Vec::new();
    let mut ry = Vec::new();
    let mut out = Vec::with_capacity(ranges.len());
    for (idx, (a, b)) in ranges.into_iter().enumerate() {
        polyfit::detrend_into(&px[a..b], m, &mut rx).map_err(|e| Error::Numerical {
            context: format!("detrend failed in segment {idx} at scale {s}: {e}"),
        })?;
        let ry_slice: &[f64] = if same {
            &rx
        } else {
            polyfit::detrend_into(&py[a..b], m, &mut ry).map_err(|e| Error::Numerical {
                context: format!("detrend failed in segment {idx} at scale {s}: {e}"),
            })?;
            &ry
        };
        let mut xy = 0.0;
        let mut xx = 0.0;
        let mut yy = 0.0;
        for (u, v) in rx.iter().zip(ry_slice) {
            xy += u * v;
            xx += u * u;
            yy += v * v;
        }
        let len = (b - a) as f64;
        out.push(SegmentMoments {
            xy: xy / len,
            xx: xx / len,
            yy: yy / len,
        });
    }
    Ok(out)
}

/// q-order aggregation of per-segment covariances `f_v` into F(q, s).
///
/// Segments with `f_v` exactly zero contribute nothing to q > 0 sums and are
/// excluded from the q <= 0 aggregation entirely (their count is reported on
/// the surface). Returns `None` when the cell has no usable value.
pub(crate) fn aggregate_q(covariances: &[f64], q: f64) -> Option<f64> {
    let n_all = covariances.len();
    if n_all == 0 {
        return None;
    }
    let value = if q.abs() < Q_ZERO_EPS {
        let (sum_ln, n_nz) = covariances
            .iter()
            .filter(|f| **f != 0.0)
            .fold((0.0, 0usize), |(s, c), f| (s + f.abs().ln(), c + 1));
        if n_nz == 0 {
            return None;
        }
        (sum_ln / (2.0 * n_nz as f64)).exp()
    } else if q > 0.0 {
        let sum: f64 = covariances.iter().map(|f| f.abs().powf(q / 2.0)).sum();
        let mean = sum / n_all as f64;
        root_q(mean, q)
    } else {
        let (sum, n_nz) = covariances
            .iter()
            .filter(|f| **f != 0.0)
            .fold((0.0, 0usize), |(s, c), f| (s + f.abs().powf(q / 2.0), c + 1));
        if n_nz == 0 {
            return None;
        }
        root_q(sum / n_nz as f64, q)
    };
    (value.is_finite() && value > 0.0).then_some(value)
}

/// `x^(1/q)`, routed through `sqrt` at q = 2 so the q = 2 column is
/// bit-identical to a dedicated variance path.
fn root_q(x: f64, q: f64) -> f64 {
    if q == 2.0 {
        x.sqrt()
    } else {
        x.powf(1.0 / q)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SurfaceMode {
    Single,
    Cross,
}

/// F(q, s) over a (QGrid x ScaleGrid) lattice, with per-scale segment
/// diagnostics. Cells that could not be computed are `None`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FluctuationSurface {
    q_orders: Vec<f64>,
    scales: Vec<usize>,
    /// Row-major: `values[s_idx * n_q + q_idx]`.
    values: Vec<Option<f64>>,
    /// Total segments per scale (2 * floor(N/s) when bidirectional).
    pub segment_counts: Vec<usize>,
    /// Segments with exactly zero covariance per scale, excluded from the
    /// q <= 0 aggregation.
    pub zero_segments: Vec<usize>,
    pub detrend_order: usize,
    pub bidirectional: bool,
    pub mode: SurfaceMode,
}

impl FluctuationSurface {
    pub fn q_orders(&self) -> &[f64] {
        &self.q_orders
    }

    pub fn scales(&self) -> &[usize] {
        &self.scales
    }

    pub fn value(&self, q_idx: usize, s_idx: usize) -> Option<f64> {
        self.values[s_idx * self.q_orders.len() + q_idx]
    }

    /// All (scale, F) pairs with a valid cell at q index `q_idx`.
    pub fn column(&self, q_idx: usize) -> Vec<(usize, f64)> {
        self.scales
            .iter()
            .enumerate()
            .filter_map(|(s_idx, &s)| self.value(q_idx, s_idx).map(|f| (s, f)))
            .collect()
    }

    /// Export as CSV: one row per scale, one column per q order.
    pub fn write_csv<W: std::io::Write>(&self, writer: W, ln_values: bool) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["s".to_string()];
        header.extend(self.q_orders.iter().map(|q| format!("q={q}")));
        w.write_record(&header)?;
        for (s_idx, s) in self.scales.iter().enumerate() {
            let mut row = vec![s.to_string()];
            for q_idx in 0..self.q_orders.len() {
                row.push(match self.value(q_idx, s_idx) {
                    Some(f) => {
                        let v = if ln_values { f.ln() } else { f };
                        format!("{v:.17e}")
                    }
                    None => String::new(),
                });
            }
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// MF-DFA fluctuation surface of a single series.
pub fn mfdfa_surface(
    series: &TimeSeries,
    qs: &QGrid,
    ss: &ScaleGrid,
    detrend_order: usize,
    bidirectional: bool,
) -> Result<FluctuationSurface> {
    let p = profile(series.values())?;
    surface_from_profiles(&p, None, qs, ss, detrend_order, bidirectional, SurfaceMode::Single)
}

/// MF-DCCA fluctuation surface of an aligned pair.
pub fn mfdcca_surface(
    pair: &AlignedPair,
    qs: &QGrid,
    ss: &ScaleGrid,
    detrend_order: usize,
    bidirectional: bool,
) -> Result<FluctuationSurface> {
    let px = profile(pair.x().values())?;
    let py = profile(pair.y().values())?;
    surface_from_profiles(
        &px,
        Some(&py),
        qs,
        ss,
        detrend_order,
        bidirectional,
        SurfaceMode::Cross,
    )
}

fn surface_from_profiles(
    px: &[f64],
    py: Option<&[f64]>,
    qs: &QGrid,
    ss: &ScaleGrid,
    detrend_order: usize,
    bidirectional: bool,
    mode: SurfaceMode,
) -> Result<FluctuationSurface> {
    if detrend_order == 0 || detrend_order > 3 {
        return Err(Error::InvalidParameter {
            name: "detrend_order",
            value: detrend_order as f64,
            constraint: "supported orders are 1..=3".into(),
        });
    }
    ss.validate(px.len(), detrend_order)?;

    // One row per scale: cell values plus (segment count, zero count).
    type ScaleRow = (Vec<Option<f64>>, usize, usize);

    // Scales are independent work items; the collect preserves grid order so
    // results do not depend on the worker count.
    let per_scale: Result<Vec<ScaleRow>> = ss
        .scales()
        .par_iter()
        .map(|&s| {
            let py_ref = py.unwrap_or(px);
            let moments = scale_moments(px, py_ref, s, detrend_order, bidirectional)?;
            let covs: Vec<f64> = moments.iter().map(|m| m.xy).collect();
            let zeros = covs.iter().filter(|f| **f == 0.0).count();
            if zeros == covs.len() {
                return Err(Error::DegenerateSurface {
                    scale: s,
                    segments: covs.len(),
                });
            }
            let row: Vec<Option<f64>> =
                qs.orders().iter().map(|&q| aggregate_q(&covs, q)).collect();
            Ok((row, covs.len(), zeros))
        })
        .collect();
    let per_scale = per_scale?;

    let mut values = Vec::with_capacity(ss.scales().len() * qs.len());
    let mut segment_counts = Vec::with_capacity(ss.scales().len());
    let mut zero_segments = Vec::with_capacity(ss.scales().len());
    let mut total_zero = 0usize;
    for (row, count, zeros) in per_scale {
        values.extend(row);
        segment_counts.push(count);
        zero_segments.push(zeros);
        total_zero += zeros;
    }
    if total_zero > 0 {
        log::debug!("{total_zero} zero-covariance segments excluded from q<=0 aggregation");
    }
    Ok(FluctuationSurface {
        q_orders: qs.orders().to_vec(),
        scales: ss.scales().to_vec(),
        values,
        segment_counts,
        zero_segments,
        detrend_order,
        bidirectional,
        mode,
    })
}

/// Generalized Hurst exponents from a fluctuation surface: per q, the OLS
/// slope of ln F(q, s) on ln s.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScalingResult {
    q_orders: Vec<f64>,
    /// Slope per q; `None` marks a q with fewer than 4 valid scales.
    pub h: Vec<Option<f64>>,
    pub intercept: Vec<Option<f64>>,
    pub r_squared: Vec<Option<f64>>,
    /// Scale endpoints actually present in the fit.
    pub fit_range: (usize, usize),
}

impl ScalingResult {
    /// Assemble a result from explicit per-q values (e.g. read back from an
    /// export). All vectors must be one entry per q order.
    pub fn from_parts(
        q_orders: Vec<f64>,
        h: Vec<Option<f64>>,
        intercept: Vec<Option<f64>>,
        r_squared: Vec<Option<f64>>,
        fit_range: (usize, usize),
    ) -> Result<Self> {
        let n = q_orders.len();
        if h.len() != n || intercept.len() != n || r_squared.len() != n {
            return Err(Error::InvalidParameter {
                name: "h_len",
                value: h.len() as f64,
                constraint: format!("expected one entry per q order ({n})"),
            });
        }
        Ok(Self {
            q_orders,
            h,
            intercept,
            r_squared,
            fit_range,
        })
    }

    pub fn q_orders(&self) -> &[f64] {
        &self.q_orders
    }

    pub fn h_at(&self, q: f64) -> Option<f64> {
        let idx = self
            .q_orders
            .iter()
            .position(|&x| (x - q).abs() < 1e-12)?;
        self.h[idx]
    }

    /// h(2), the Hurst exponent.
    pub fn hurst(&self) -> Option<f64> {
        self.h_at(2.0)
    }

    /// True when every q on the grid produced an exponent.
    pub fn complete(&self) -> bool {
        self.h.iter().all(|h| h.is_some())
    }
}

/// Ordinary least squares of y on x. Returns (slope, intercept, r_squared).
pub(crate) fn ols(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        sxy += (a - mx) * (b - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let mut ssr = 0.0;
    let mut sst = 0.0;
    for (a, b) in x.iter().zip(y) {
        let fit = intercept + slope * a;
        ssr += (b - fit) * (b - fit);
        sst += (b - my) * (b - my);
    }
    let r2 = if sst > 0.0 {
        (1.0 - ssr / sst).clamp(0.0, 1.0)
    } else if ssr.abs() < 1e-24 {
        1.0
    } else {
        0.0
    };
    (slope, intercept, r2)
}

/// Fit the power law F(q, s) ~ s^h(q) column by column.
pub fn fit_scaling(surface: &FluctuationSurface) -> ScalingResult {
    let n_q = surface.q_orders().len();
    let mut h = Vec::with_capacity(n_q);
    let mut intercept = Vec::with_capacity(n_q);
    let mut r_squared = Vec::with_capacity(n_q);
    let mut used_min = usize::MAX;
    let mut used_max = 0usize;
    for q_idx in 0..n_q {
        let col = surface.column(q_idx);
        if col.len() < MIN_FIT_SCALES {
            h.push(None);
            intercept.push(None);
            r_squared.push(None);
            continue;
        }
        used_min = used_min.min(col[0].0);
        used_max = used_max.max(col[col.len() - 1].0);
        let xs: Vec<f64> = col.iter().map(|(s, _)| (*s as f64).ln()).collect();
        let ys: Vec<f64> = col.iter().map(|(_, f)| f.ln()).collect();
        let (slope, icept, r2) = ols(&xs, &ys);
        h.push(Some(slope));
        intercept.push(Some(icept));
        r_squared.push(Some(r2));
    }
    if used_min == usize::MAX {
        used_min = 0;
    }
    ScalingResult {
        q_orders: surface.q_orders().to_vec(),
        h,
        intercept,
        r_squared,
        fit_range: (used_min, used_max),
    }
}

/// Plain DFA: the single-series h(2) with its fit diagnostics. This runs the
/// same surface and regression code as the full MF-DFA at q = 2.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DfaResult {
    pub h2: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn dfa(
    series: &TimeSeries,
    ss: &ScaleGrid,
    detrend_order: usize,
    bidirectional: bool,
) -> Result<DfaResult> {
    let qs = QGrid::new(vec![0.0, 2.0])?;
    let surface = mfdfa_surface(series, &qs, ss, detrend_order, bidirectional)?;
    let fit = fit_scaling(&surface);
    let idx = fit.q_orders().iter().position(|&q| q == 2.0).unwrap();
    match (fit.h[idx], fit.intercept[idx], fit.r_squared[idx]) {
        (Some(h2), Some(intercept), Some(r_squared)) => Ok(DfaResult {
            h2,
            intercept,
            r_squared,
        }),
        _ => Err(Error::Numerical {
            context: "DFA fit has fewer than 4 valid scales at q = 2".into(),
        }),
    }
}
