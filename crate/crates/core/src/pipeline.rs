//! Config-driven end-to-end runs: for every period and series, the
//! efficiency battery, the MF-DFA spectrum and the source attribution; for
//! every configured pair, the DCCA coefficient with its significance band
//! and the joint MF-DCCA spectrum. Outputs mirror the usual table and figure
//! layouts as plain CSV plus one JSON report.
//!
//! Reports are byte-identical for a fixed config and master seed under any
//! worker count: every randomized step derives its seed from the item
//! coordinates, and assembly is an ordered merge.

use std::path::{Path, PathBuf};

use chrono::{DateTime, NaiveDateTime};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dcca::{critical_band, rho_dcca, RhoProfile};
use crate::error::{Error, Result};
use crate::ingest::{self, CsvSpec};
use crate::multifractal::{
    attribute_sources, AttributionConfig, MultifractalSpectrum, SourceAttribution,
};
use crate::rwtests::{battery, BatteryConfig, TestReport};
use crate::scaling::{fit_scaling, mfdcca_surface, mfdfa_surface, QGrid, ScaleGrid, ScalingResult};
use crate::seeds::{derive_seed, Stream};
use crate::series::{SeriesKind, TimeSeries};

fn default_q_min() -> f64 {
    -4.0
}
fn default_q_max() -> f64 {
    4.0
}
fn default_q_step() -> f64 {
    0.25
}
fn default_s_min() -> usize {
    30
}
fn default_scale_count() -> usize {
    20
}
fn default_detrend_order() -> usize {
    1
}
fn default_true() -> bool {
    true
}
fn default_ensemble_size() -> usize {
    50
}
fn default_max_iterations() -> usize {
    1000
}
fn default_convergence_tol() -> f64 {
    1e-8
}
fn default_floor_members() -> usize {
    20
}
fn default_confidence() -> f64 {
    0.95
}
fn default_n_sims() -> usize {
    1000
}
fn default_delimiter() -> String {
    ",".into()
}
fn default_timestamp_column() -> String {
    "timestamp".into()
}
fn default_value_column() -> String {
    "value".into()
}

/// Grid settings shared by every analysis in a run. Units: scales in
/// observations per segment, q orders dimensionless.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridConfig {
    #[serde(default = "default_q_min")]
    pub q_min: f64,
    #[serde(default = "default_q_max")]
    pub q_max: f64,
    #[serde(default = "default_q_step")]
    pub q_step: f64,
    #[serde(default = "default_s_min")]
    pub s_min: usize,
    /// Largest scale; `None` means one fifth of each series length.
    #[serde(default)]
    pub s_max: Option<usize>,
    #[serde(default = "default_scale_count")]
    pub scale_count: usize,
    #[serde(default = "default_detrend_order")]
    pub detrend_order: usize,
    #[serde(default = "default_true")]
    pub bidirectional: bool,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            q_min: default_q_min(),
            q_max: default_q_max(),
            q_step: default_q_step(),
            s_min: default_s_min(),
            s_max: None,
            scale_count: default_scale_count(),
            detrend_order: default_detrend_order(),
            bidirectional: true,
        }
    }
}

impl GridConfig {
    pub fn q_grid(&self) -> Result<QGrid> {
        if self.q_step <= 0.0 || self.q_max <= self.q_min {
            return Err(Error::Config(format!(
                "invalid q grid: {} .. {} step {}",
                self.q_min, self.q_max, self.q_step
            )));
        }
        let count = ((self.q_max - self.q_min) / self.q_step).round() as usize;
        let orders: Vec<f64> = (0..=count)
            .map(|i| self.q_min + i as f64 * self.q_step)
            .collect();
        QGrid::new(orders)
    }

    pub fn scale_grid(&self, n: usize) -> Result<ScaleGrid> {
        match self.s_max {
            Some(s_max) => {
                let g = ScaleGrid::log_spaced(self.s_min, s_max, self.scale_count)?;
                // An explicit maximum is an explicit override of the n/5 rule.
                Ok(g.allow_large_scales())
            }
            None => {
                let s_max = n / 5;
                if s_max <= self.s_min {
                    return Err(Error::InsufficientData {
                        required: 5 * (self.s_min + 1),
                        actual: n,
                        context: "scale grid (s_min .. n/5)".into(),
                    });
                }
                ScaleGrid::log_spaced(self.s_min, s_max, self.scale_count)
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SurrogatePipelineConfig {
    #[serde(default = "default_ensemble_size")]
    pub ensemble_size: usize,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
    #[serde(default = "default_convergence_tol")]
    pub convergence_tol: f64,
    #[serde(default = "default_floor_members")]
    pub floor_members: usize,
}

impl Default for SurrogatePipelineConfig {
    fn default() -> Self {
        Self {
            ensemble_size: default_ensemble_size(),
            max_iterations: default_max_iterations(),
            convergence_tol: default_convergence_tol(),
            floor_members: default_floor_members(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RhoConfig {
    #[serde(default = "default_confidence")]
    pub confidence: f64,
    #[serde(default = "default_n_sims")]
    pub n_sims: usize,
}

impl Default for RhoConfig {
    fn default() -> Self {
        Self {
            confidence: default_confidence(),
            n_sims: default_n_sims(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InputConfig {
    pub path: String,
    pub label: String,
    pub kind: SeriesKind,
    #[serde(default = "default_timestamp_column")]
    pub timestamp_column: String,
    #[serde(default = "default_value_column")]
    pub value_column: String,
    #[serde(default = "default_delimiter")]
    pub delimiter: String,
    /// Fixed offset of naive timestamps from UTC, in seconds.
    #[serde(default)]
    pub utc_offset_seconds: i64,
    /// Optional DST windows `(start_utc, end_utc, extra_offset_seconds)`.
    #[serde(default)]
    pub dst_windows: Vec<(i64, i64, i64)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PeriodConfig {
    pub label: String,
    /// Epoch seconds or ISO-8601 (naive times are taken as UTC).
    pub start: String,
    pub end: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairConfig {
    pub x: String,
    pub y: String,
}

/// The full analysis configuration. Every effective value is echoed in the
/// report manifest, so defaults are never hidden.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnalysisConfig {
    pub master_seed: u64,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub surrogates: SurrogatePipelineConfig,
    #[serde(default)]
    pub rho: RhoConfig,
    pub inputs: Vec<InputConfig>,
    pub periods: Vec<PeriodConfig>,
    #[serde(default)]
    pub pairs: Vec<PairConfig>,
}

impl AnalysisConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(format!("config parse error: {e}")))
    }

    /// Load a config file; relative input paths resolve against its folder.
    pub fn from_toml_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg = Self::from_toml_str(&text)?;
        if let Some(dir) = path.parent() {
            for input in &mut cfg.inputs {
                let p = PathBuf::from(&input.path);
                if p.is_relative() {
                    input.path = dir.join(p).display().to_string();
                }
            }
        }
        Ok(cfg)
    }

    /// SHA-256 of the canonical JSON encoding of the effective config.
    pub fn hash(&self) -> Result<String> {
        let canonical = serde_json::to_string(self)?;
        let digest = Sha256::digest(canonical.as_bytes());
        Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
    }

    fn validate(&self) -> Result<Vec<(i64, i64)>> {
        if self.inputs.is_empty() {
            return Err(Error::Config("no inputs configured".into()));
        }
        if self.periods.is_empty() {
            return Err(Error::Config("no period splits configured".into()));
        }
        let mut labels = std::collections::HashSet::new();
        for input in &self.inputs {
            if !labels.insert(input.label.as_str()) {
                return Err(Error::Config(format!("duplicate input label `{}`", input.label)));
            }
            if input.delimiter.len() != 1 {
                return Err(Error::Config(format!(
                    "delimiter must be one character, got {:?}",
                    input.delimiter
                )));
            }
        }
        for pair in &self.pairs {
            for side in [&pair.x, &pair.y] {
                if !labels.contains(side.as_str()) {
                    return Err(Error::Config(format!("pair references unknown label `{side}`")));
                }
            }
        }
        let mut spans = Vec::with_capacity(self.periods.len());
        for p in &self.periods {
            let start = parse_instant(&p.start)
                .ok_or_else(|| Error::Config(format!("unparseable period start {:?}", p.start)))?;
            let end = parse_instant(&p.end)
                .ok_or_else(|| Error::Config(format!("unparseable period end {:?}", p.end)))?;
            if end <= start {
                return Err(Error::Config(format!("period `{}` is empty", p.label)));
            }
            spans.push((start, end));
        }
        let mut sorted = spans.clone();
        sorted.sort();
        if sorted.windows(2).any(|w| w[1].0 < w[0].1) {
            return Err(Error::Config("period ranges overlap".into()));
        }
        self.grid.q_grid()?;
        Ok(spans)
    }
}

fn parse_instant(raw: &str) -> Option<i64> {
    if let Ok(epoch) = raw.parse::<i64>() {
        return Some(epoch);
    }
    if let Ok(dt) = DateTime::parse_from_rfc3339(raw) {
        return Some(dt.timestamp());
    }
    let naive = NaiveDateTime::parse_from_str(raw, "%Y-%m-%dT%H:%M:%S")
        .or_else(|_| NaiveDateTime::parse_from_str(raw, "%Y-%m-%d %H:%M:%S"))
        .ok()?;
    Some(naive.and_utc().timestamp())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub config_hash: String,
    pub master_seed: u64,
    pub version: String,
    pub effective_config: AnalysisConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeriesReport {
    pub label: String,
    pub n: usize,
    pub tests: TestReport,
    pub scaling: ScalingResult,
    pub spectrum: MultifractalSpectrum,
    pub attribution: SourceAttribution,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairReport {
    pub x: String,
    pub y: String,
    pub n: usize,
    pub rho: RhoProfile,
    pub scaling: ScalingResult,
    pub spectrum: MultifractalSpectrum,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PeriodReport {
    pub label: String,
    pub series: Vec<SeriesReport>,
    pub pairs: Vec<PairReport>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ItemFailure {
    pub period: String,
    pub item: String,
    pub error: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub manifest: Manifest,
    pub periods: Vec<PeriodReport>,
    pub failures: Vec<ItemFailure>,
}

impl RunReport {
    pub fn any_failures(&self) -> bool {
        !self.failures.is_empty()
    }
}

/// Run the full pipeline. `workers` bounds the rayon pool (0 uses the
/// process default); it is an execution knob, not an analysis parameter, so
/// it does not enter the config hash and cannot change the report.
pub fn run_pipeline(config: &AnalysisConfig, workers: usize) -> Result<RunReport> {
    if workers > 0 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
        pool.install(|| run_inner(config))
    } else {
        run_inner(config)
    }
}

fn run_inner(config: &AnalysisConfig) -> Result<RunReport> {
    let spans = config.validate()?;
    let q_grid = config.grid.q_grid()?;

    // Load and transform all inputs once.
    let raw: Result<Vec<TimeSeries>> = config
        .inputs
        .iter()
        .map(|input| {
            let spec = CsvSpec {
                timestamp_column: input.timestamp_column.clone(),
                value_column: input.value_column.clone(),
                delimiter: input.delimiter.as_bytes()[0],
                utc_offset_seconds: input.utc_offset_seconds,
                dst_windows: input.dst_windows.clone(),
            };
            ingest::read_csv(Path::new(&input.path), &input.label, input.kind, &spec)
        })
        .collect();
    let raw = raw?;

    let outcomes: Vec<(PeriodReport, Vec<ItemFailure>)> = config
        .periods
        .par_iter()
        .zip(&spans)
        .enumerate()
        .map(|(p_idx, (period, &(start, end)))| {
            analyze_period(config, &q_grid, &raw, p_idx, period, start, end)
        })
        .collect();

    let mut periods = Vec::with_capacity(outcomes.len());
    let mut failures = Vec::new();
    for (report, mut fails) in outcomes {
        periods.push(report);
        failures.append(&mut fails);
    }

    Ok(RunReport {
        manifest: Manifest {
            config_hash: config.hash()?,
            master_seed: config.master_seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            effective_config: config.clone(),
        },
        periods,
        failures,
    })
}

/// Stable per-item seed: period and item index plus a role tag.
fn item_seed(master: u64, period_idx: usize, role: u64, item_idx: usize) -> u64 {
    derive_seed(
        master,
        Stream::Pipeline,
        ((period_idx as u64) << 32) | (role << 24) | item_idx as u64,
    )
}

fn transform(series: &TimeSeries) -> Result<TimeSeries> {
    match series.kind {
        SeriesKind::Price => ingest::log_returns(series),
        SeriesKind::Volume => ingest::volume_changes(series),
        _ => Ok(series.clone()),
    }
}

#[allow(clippy::too_many_arguments)]
fn analyze_period(
    config: &AnalysisConfig,
    q_grid: &QGrid,
    raw: &[TimeSeries],
    p_idx: usize,
    period: &PeriodConfig,
    start: i64,
    end: i64,
) -> (PeriodReport, Vec<ItemFailure>) {
    let series_results: Vec<(String, Result<SeriesReport>)> = raw
        .par_iter()
        .enumerate()
        .map(|(i, s)| {
            let seed = item_seed(config.master_seed, p_idx, 0, i);
            (
                s.label.clone(),
                analyze_series(config, q_grid, s, start, end, seed),
            )
        })
        .collect();

    let pair_results: Vec<(String, Result<PairReport>)> = config
        .pairs
        .par_iter()
        .enumerate()
        .map(|(i, pair)| {
            let seed = item_seed(config.master_seed, p_idx, 1, i);
            let name = format!("{}~{}", pair.x, pair.y);
            (
                name,
                analyze_pair(config, q_grid, raw, pair, start, end, seed),
            )
        })
        .collect();

    let mut failures = Vec::new();
    let mut series = Vec::new();
    for (label, res) in series_results {
        match res {
            Ok(r) => series.push(r),
            Err(e) => failures.push(ItemFailure {
                period: period.label.clone(),
                item: format!("series {label}"),
                error: e.to_string(),
            }),
        }
    }
    let mut pairs = Vec::new();
    for (name, res) in pair_results {
        match res {
            Ok(r) => pairs.push(r),
            Err(e) => failures.push(ItemFailure {
                period: period.label.clone(),
                item: format!("pair {name}"),
                error: e.to_string(),
            }),
        }
    }
    (
        PeriodReport {
            label: period.label.clone(),
            series,
            pairs,
        },
        failures,
    )
}

fn analyze_series(
    config: &AnalysisConfig,
    q_grid: &QGrid,
    raw: &TimeSeries,
    start: i64,
    end: i64,
    seed: u64,
) -> Result<SeriesReport> {
    let sliced = raw.slice_time(start, end)?;
    let series = transform(&sliced)?;
    let n = series.len();
    let scales = config.grid.scale_grid(n)?;

    let battery_config = BatteryConfig {
        detrend_order: config.grid.detrend_order,
        bidirectional: config.grid.bidirectional,
        dfa_scales: Some(scales.clone()),
        ..BatteryConfig::default()
    };
    let tests = battery(&series, &battery_config)?;

    let surface = mfdfa_surface(
        &series,
        q_grid,
        &scales,
        config.grid.detrend_order,
        config.grid.bidirectional,
    )?;
    let scaling = fit_scaling(&surface);
    let spectrum = MultifractalSpectrum::from_scaling(&scaling)?;

    let attribution_config = AttributionConfig {
        q: q_grid.clone(),
        scales: Some(scales),
        detrend_order: config.grid.detrend_order,
        bidirectional: config.grid.bidirectional,
        ensemble_size: config.surrogates.ensemble_size,
        iaaft_max_iterations: config.surrogates.max_iterations,
        iaaft_tol: config.surrogates.convergence_tol,
        floor_members: config.surrogates.floor_members,
        master_seed: seed,
    };
    let attribution = attribute_sources(&series, &attribution_config)?;

    Ok(SeriesReport {
        label: raw.label.clone(),
        n,
        tests,
        scaling,
        spectrum,
        attribution,
    })
}

fn analyze_pair(
    config: &AnalysisConfig,
    q_grid: &QGrid,
    raw: &[TimeSeries],
    pair: &PairConfig,
    start: i64,
    end: i64,
    seed: u64,
) -> Result<PairReport> {
    let find = |label: &str| {
        raw.iter()
            .find(|s| s.label == label)
            .ok_or_else(|| Error::Config(format!("pair references unknown label `{label}`")))
    };
    let x = transform(&find(&pair.x)?.slice_time(start, end)?)?;
    let y = transform(&find(&pair.y)?.slice_time(start, end)?)?;
    let aligned = ingest::align(&x, &y)?;
    let n = aligned.len();
    let scales = config.grid.scale_grid(n)?;

    let profile = rho_dcca(
        &aligned,
        &scales,
        config.grid.detrend_order,
        config.grid.bidirectional,
    )?;
    let band = critical_band(
        n,
        &scales,
        config.grid.detrend_order,
        config.grid.bidirectional,
        config.rho.confidence,
        config.rho.n_sims,
        seed,
    )?;
    let rho = profile.with_band(band)?;

    let surface = mfdcca_surface(
        &aligned,
        q_grid,
        &scales,
        config.grid.detrend_order,
        config.grid.bidirectional,
    )?;
    let scaling = fit_scaling(&surface);
    let spectrum = MultifractalSpectrum::from_scaling(&scaling)?;

    Ok(PairReport {
        x: pair.x.clone(),
        y: pair.y.clone(),
        n,
        rho,
        scaling,
        spectrum,
    })
}

fn sanitize(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_alphanumeric() || c == '-' || c == '.' { c } else { '_' })
        .collect()
}

fn star(p: f64, alpha: f64) -> &'static str {
    if p < alpha {
        "*"
    } else {
        ""
    }
}

/// Write `report.json`, the three table CSVs, the per-pair rho CSVs and the
/// per-series spectrum CSVs into `out_dir`. Wall-clock timing goes to a
/// separate `manifest.json` so `report.json` stays byte-reproducible.
pub fn write_outputs(report: &RunReport, out_dir: &Path, wall_clock_seconds: f64) -> Result<()> {
    std::fs::create_dir_all(out_dir)?;
    std::fs::write(
        out_dir.join("report.json"),
        serde_json::to_string_pretty(report)?,
    )?;
    let side = serde_json::json!({
        "config_hash": report.manifest.config_hash,
        "master_seed": report.manifest.master_seed,
        "version": report.manifest.version,
        "wall_clock_seconds": wall_clock_seconds,
    });
    std::fs::write(
        out_dir.join("manifest.json"),
        serde_json::to_string_pretty(&side)?,
    )?;

    // Table 1: battery p-values, DFA Hurst exponent, significance stars.
    {
        let mut w = csv::Writer::from_path(out_dir.join("table1_tests.csv"))?;
        w.write_record([
            "period",
            "series",
            "n",
            "runs",
            "ljung_box",
            "variance_ratio",
            "bds",
            "mann_kendall",
            "dfa_h2",
            "rejections",
        ])?;
        for period in &report.periods {
            for s in &period.series {
                let t = &s.tests;
                let a = t.alpha;
                let fmt_p = |p: Option<f64>| match p {
                    Some(p) => format!("{:.4}{}", p, star(p, a)),
                    None => "failed".into(),
                };
                w.write_record([
                    period.label.clone(),
                    s.label.clone(),
                    s.n.to_string(),
                    fmt_p(t.runs.outcome.as_ref().map(|r| r.p_value)),
                    fmt_p(t.ljung_box.outcome.as_ref().map(|r| r.p_value)),
                    fmt_p(t.variance_ratio.outcome.as_ref().map(|r| r.min_p)),
                    fmt_p(t.bds.outcome.as_ref().map(|r| r.min_p)),
                    fmt_p(t.mann_kendall.outcome.as_ref().map(|r| r.p_value)),
                    t.dfa
                        .outcome
                        .as_ref()
                        .map(|d| format!("{:.4}", d.h2))
                        .unwrap_or_else(|| "failed".into()),
                    t.rejections.to_string(),
                ])?;
            }
        }
        w.flush()?;
    }

    // Table 2: multifractal strength and MDM for original/shuffled/surrogate.
    {
        let mut w = csv::Writer::from_path(out_dir.join("table2_mfdfa.csv"))?;
        w.write_record([
            "period", "series", "variant", "h2", "delta_h", "delta_alpha", "mdm",
        ])?;
        for period in &report.periods {
            for s in &period.series {
                let a = &s.attribution;
                let rows = [
                    (
                        "original",
                        a.original.hurst,
                        a.original.delta_h,
                        a.original.delta_alpha,
                        a.original.mdm,
                    ),
                    (
                        "shuffled",
                        a.shuffled.hurst.mean,
                        a.shuffled.delta_h.mean,
                        a.shuffled.delta_alpha.mean,
                        a.shuffled.mdm.mean,
                    ),
                    (
                        "surrogate",
                        a.surrogate.hurst.mean,
                        a.surrogate.delta_h.mean,
                        a.surrogate.delta_alpha.mean,
                        a.surrogate.mdm.mean,
                    ),
                ];
                for (variant, h2, dh, da, m) in rows {
                    w.write_record([
                        period.label.clone(),
                        s.label.clone(),
                        variant.to_string(),
                        format!("{h2:.4}"),
                        format!("{dh:.4}"),
                        format!("{da:.4}"),
                        format!("{m:.4}"),
                    ])?;
                }
            }
        }
        w.flush()?;
    }

    // Table 3: joint multifractal cross-correlation summary per pair.
    {
        let mut w = csv::Writer::from_path(out_dir.join("table3_mfdcca.csv"))?;
        w.write_record(["period", "pair", "h_xy_2", "delta_h_xy", "delta_alpha_xy"])?;
        for period in &report.periods {
            for p in &period.pairs {
                w.write_record([
                    period.label.clone(),
                    format!("{}~{}", p.x, p.y),
                    format!("{:.4}", p.spectrum.hurst),
                    format!("{:.4}", p.spectrum.delta_h),
                    format!("{:.4}", p.spectrum.delta_alpha),
                ])?;
            }
        }
        w.flush()?;
    }

    let rho_dir = out_dir.join("fig_rho");
    let spec_dir = out_dir.join("fig_spectrum");
    std::fs::create_dir_all(&rho_dir)?;
    std::fs::create_dir_all(&spec_dir)?;
    for period in &report.periods {
        for p in &period.pairs {
            let name = format!(
                "{}__{}_{}.csv",
                sanitize(&period.label),
                sanitize(&p.x),
                sanitize(&p.y)
            );
            let file = std::fs::File::create(rho_dir.join(name))?;
            p.rho.write_csv(file, false)?;
        }
        for s in &period.series {
            let name = format!("{}__{}.csv", sanitize(&period.label), sanitize(&s.label));
            let file = std::fs::File::create(spec_dir.join(name))?;
            s.spectrum.write_csv(file, &s.scaling)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::write_csv;
    use crate::synth::{generate, SynthModel, SynthSpec};

    fn write_series(dir: &Path, name: &str, values: Vec<f64>) -> String {
        let ts = TimeSeries::from_values("tmp", SeriesKind::Generic, values).unwrap();
        let path = dir.join(name);
        write_csv(&path, &ts).unwrap();
        path.display().to_string()
    }

    fn small_config(dir: &Path, seed: u64) -> AnalysisConfig {
        let a = generate(&SynthSpec::new(SynthModel::GaussianIid, 1200, 7)).unwrap();
        let b = generate(&SynthSpec::new(SynthModel::GaussianIid, 1200, 8)).unwrap();
        let pa = write_series(dir, "a.csv", a.values().to_vec());
        let pb = write_series(dir, "b.csv", b.values().to_vec());
        AnalysisConfig {
            master_seed: seed,
            grid: GridConfig::default(),
            surrogates: SurrogatePipelineConfig {
                ensemble_size: 4,
                floor_members: 3,
                ..SurrogatePipelineConfig::default()
            },
            rho: RhoConfig {
                confidence: 0.95,
                n_sims: 120,
            },
            inputs: vec![
                InputConfig {
                    path: pa,
                    label: "A".into(),
                    kind: SeriesKind::Generic,
                    timestamp_column: default_timestamp_column(),
                    value_column: default_value_column(),
                    delimiter: default_delimiter(),
                    utc_offset_seconds: 0,
                    dst_windows: vec![],
                },
                InputConfig {
                    path: pb,
                    label: "B".into(),
                    kind: SeriesKind::Generic,
                    timestamp_column: default_timestamp_column(),
                    value_column: default_value_column(),
                    delimiter: default_delimiter(),
                    utc_offset_seconds: 0,
                    dst_windows: vec![],
                },
            ],
            periods: vec![PeriodConfig {
                label: "all".into(),
                start: "0".into(),
                end: "1200".into(),
            }],
            pairs: vec![PairConfig {
                x: "A".into(),
                y: "B".into(),
            }],
        }
    }

    #[test]
    fn empty_periods_fail_before_any_computation() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = small_config(dir.path(), 1);
        cfg.periods.clear();
        match run_pipeline(&cfg, 0).unwrap_err() {
            Error::Config(msg) => assert!(msg.contains("period")),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn overlapping_periods_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = small_config(dir.path(), 1);
        cfg.periods = vec![
            PeriodConfig {
                label: "p1".into(),
                start: "0".into(),
                end: "600".into(),
            },
            PeriodConfig {
                label: "p2".into(),
                start: "500".into(),
                end: "1200".into(),
            },
        ];
        assert!(matches!(run_pipeline(&cfg, 0), Err(Error::Config(_))));
    }

    #[test]
    fn hash_changes_iff_config_changes() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = small_config(dir.path(), 1);
        let h1 = cfg.hash().unwrap();
        assert_eq!(h1, cfg.clone().hash().unwrap());
        let mut changed = cfg.clone();
        changed.rho.n_sims += 1;
        assert_ne!(h1, changed.hash().unwrap());
        let mut changed = cfg;
        changed.grid.q_step = 0.5;
        assert_ne!(h1, changed.hash().unwrap());
    }

    #[test]
    fn self_pair_yields_unit_rho_rows() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = small_config(dir.path(), 3);
        // same file as both members of the pair
        cfg.pairs = vec![PairConfig {
            x: "A".into(),
            y: "A".into(),
        }];
        let report = run_pipeline(&cfg, 0).unwrap();
        assert!(report.failures.is_empty(), "{:?}", report.failures);
        let pair = &report.periods[0].pairs[0];
        for &r in &pair.rho.rho {
            assert!((r - 1.0).abs() < 1e-12);
        }
        let out = dir.path().join("out");
        write_outputs(&report, &out, 0.0).unwrap();
        assert!(out.join("report.json").exists());
        assert!(out.join("table1_tests.csv").exists());
        assert!(out.join("fig_rho").read_dir().unwrap().count() == 1);
    }

    #[test]
    fn toml_roundtrip_applies_defaults() {
        let text = r#"
            master_seed = 9
            [[inputs]]
            path = "x.csv"
            label = "X"
            kind = "price"
            [[periods]]
            label = "p"
            start = "2020-01-01T00:00:00"
            end = "2020-02-01T00:00:00"
        "#;
        let cfg = AnalysisConfig::from_toml_str(text).unwrap();
        assert_eq!(cfg.grid.q_step, 0.25);
        assert_eq!(cfg.surrogates.ensemble_size, 50);
        assert_eq!(cfg.rho.n_sims, 1000);
        assert_eq!(cfg.inputs[0].delimiter, ",");
        assert!(cfg.pairs.is_empty());
    }
}
