//! `multifract` command line: run the full pipeline from a config file, or
//! individual analyses (MF-DFA, MF-DCCA, DCCA rho, efficiency battery,
//! surrogate ensembles, synthetic generators) on CSV inputs.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use multifract::dcca::{critical_band, rho_dcca};
use multifract::ingest::{self, CsvSpec};
use multifract::multifractal::{attribute_sources, AttributionConfig, MultifractalSpectrum};
use multifract::pipeline::{run_pipeline, write_outputs, AnalysisConfig};
use multifract::rwtests::{battery, BatteryConfig};
use multifract::scaling::{fit_scaling, mfdcca_surface, mfdfa_surface, QGrid, ScaleGrid};
use multifract::series::{SeriesKind, TimeSeries};
use multifract::surrogates::{ensemble, write_ensemble_csv, SurrogateMethod, SurrogateSpec};
use multifract::synth::{generate, generate_pair, SynthModel, SynthSpec};

#[derive(Parser)]
#[command(name = "multifract", version, about = "Multifractal time-series analysis toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Price,
    Return,
    Volume,
    VolumeChange,
    Generic,
}

impl From<KindArg> for SeriesKind {
    fn from(value: KindArg) -> Self {
        match value {
            KindArg::Price => SeriesKind::Price,
            KindArg::Return => SeriesKind::Return,
            KindArg::Volume => SeriesKind::Volume,
            KindArg::VolumeChange => SeriesKind::VolumeChange,
            KindArg::Generic => SeriesKind::Generic,
        }
    }
}

#[derive(Args)]
struct CsvArgs {
    /// Column holding timestamps (epoch seconds or ISO-8601).
    #[arg(long, default_value = "timestamp")]
    timestamp_column: String,
    /// Column holding the values.
    #[arg(long, default_value = "value")]
    value_column: String,
    /// Field delimiter (one character).
    #[arg(long, default_value = ",")]
    delimiter: String,
    /// What the values are; prices and volumes are log-differenced before
    /// analysis.
    #[arg(long, value_enum, default_value = "generic")]
    kind: KindArg,
    /// Offset of naive timestamps from UTC, in seconds.
    #[arg(long, default_value_t = 0)]
    utc_offset_seconds: i64,
}

impl CsvArgs {
    fn spec(&self) -> Result<CsvSpec> {
        if self.delimiter.len() != 1 {
            bail!("--delimiter must be a single character");
        }
        Ok(CsvSpec {
            timestamp_column: self.timestamp_column.clone(),
            value_column: self.value_column.clone(),
            delimiter: self.delimiter.as_bytes()[0],
            utc_offset_seconds: self.utc_offset_seconds,
            dst_windows: Vec::new(),
        })
    }

    fn load(&self, path: &Path, label: &str) -> Result<TimeSeries> {
        let raw = ingest::read_csv(path, label, self.kind.into(), &self.spec()?)?;
        let transformed = match raw.kind {
            SeriesKind::Price => ingest::log_returns(&raw)?,
            SeriesKind::Volume => ingest::volume_changes(&raw)?,
            _ => raw,
        };
        Ok(transformed)
    }
}

#[derive(Args)]
struct GridArgs {
    #[arg(long, default_value_t = -4.0)]
    q_min: f64,
    #[arg(long, default_value_t = 4.0)]
    q_max: f64,
    #[arg(long, default_value_t = 0.25)]
    q_step: f64,
    #[arg(long, default_value_t = 30)]
    s_min: usize,
    /// Largest scale; defaults to one fifth of the series length.
    #[arg(long)]
    s_max: Option<usize>,
    #[arg(long, default_value_t = 20)]
    scale_count: usize,
    /// Detrending polynomial order (1..=3).
    #[arg(long, default_value_t = 1)]
    order: usize,
    /// Only use forward segments instead of both ends.
    #[arg(long)]
    forward_only: bool,
}

impl GridArgs {
    fn q_grid(&self) -> Result<QGrid> {
        if self.q_step <= 0.0 || self.q_max <= self.q_min {
            bail!("invalid q grid {} .. {} step {}", self.q_min, self.q_max, self.q_step);
        }
        let count = ((self.q_max - self.q_min) / self.q_step).round() as usize;
        let orders = (0..=count)
            .map(|i| self.q_min + i as f64 * self.q_step)
            .collect();
        Ok(QGrid::new(orders)?)
    }

    fn scale_grid(&self, n: usize) -> Result<ScaleGrid> {
        let grid = match self.s_max {
            Some(s_max) => ScaleGrid::log_spaced(self.s_min, s_max, self.scale_count)?
                .allow_large_scales(),
            None => {
                let s_max = n / 5;
                if s_max <= self.s_min {
                    bail!("series too short ({n}) for s_min {}", self.s_min);
                }
                ScaleGrid::log_spaced(self.s_min, s_max, self.scale_count)?
            }
        };
        Ok(grid)
    }

    fn bidirectional(&self) -> bool {
        !self.forward_only
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Fgn,
    Cascade,
    Ar1,
    Ma1,
    CoupledPair,
    GaussianIid,
    StudentT,
    LogisticMap,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline described by a TOML config file.
    Analyze {
        config: PathBuf,
        /// Output directory (report.json, table CSVs, figure data).
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Worker threads (0 = all cores).
        #[arg(long, default_value_t = 0)]
        workers: usize,
    },
    /// MF-DFA spectrum of one series.
    Mfdfa {
        input: PathBuf,
        #[command(flatten)]
        csv: CsvArgs,
        #[command(flatten)]
        grid: GridArgs,
        /// Output directory (spectrum.csv, surface.csv, spectrum.json).
        #[arg(long, default_value = "mfdfa_out")]
        out: PathBuf,
        /// Also run the shuffle/surrogate source attribution.
        #[arg(long)]
        attribute: bool,
        /// Surrogate ensemble size for --attribute.
        #[arg(long, default_value_t = 50)]
        ensemble: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Joint MF-DCCA spectrum of a pair of series.
    Mfdcca {
        x: PathBuf,
        y: PathBuf,
        #[command(flatten)]
        csv: CsvArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, default_value = "mfdcca_out")]
        out: PathBuf,
    },
    /// DCCA correlation coefficient with its Monte-Carlo significance band.
    Rho {
        x: PathBuf,
        y: PathBuf,
        #[command(flatten)]
        csv: CsvArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, default_value_t = 0.95)]
        confidence: f64,
        /// Null-model simulations for the band.
        #[arg(long, default_value_t = 1000)]
        sims: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Decide against the upper tail only.
        #[arg(long)]
        one_sided: bool,
        #[arg(long, default_value = "rho_out")]
        out: PathBuf,
    },
    /// Weak-form efficiency battery (Runs, Ljung-Box, VR, BDS, MK, DFA).
    Tests {
        input: PathBuf,
        #[command(flatten)]
        csv: CsvArgs,
        /// Ljung-Box lag (default min(10, n/5)).
        #[arg(long)]
        lags: Option<usize>,
        #[arg(long, default_value = "tests.json")]
        out: PathBuf,
    },
    /// Generate a surrogate ensemble (wide CSV, member index in the header).
    Surrogate {
        input: PathBuf,
        #[command(flatten)]
        csv: CsvArgs,
        #[arg(long, value_enum, default_value = "iaaft")]
        method: MethodArg,
        #[arg(long, default_value_t = 50)]
        ensemble: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        max_iter: usize,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        /// Write one CSV per member into this directory instead of one wide
        /// CSV file.
        #[arg(long)]
        split_dir: Option<PathBuf>,
        #[arg(long, default_value = "surrogates.csv")]
        out: PathBuf,
    },
    /// Generate a synthetic series to CSV.
    Synth {
        #[arg(long, value_enum)]
        model: ModelArg,
        #[arg(long, default_value_t = 4096)]
        n: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// fGn Hurst exponent.
        #[arg(long)]
        hurst: Option<f64>,
        /// Cascade weight.
        #[arg(long)]
        p: Option<f64>,
        /// Cascade depth (series length is 2^depth).
        #[arg(long)]
        depth: Option<u32>,
        #[arg(long)]
        phi: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
        #[arg(long)]
        theta: Option<f64>,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        noise_sd: f64,
        #[arg(long)]
        dof: Option<f64>,
        /// Logistic-map parameter.
        #[arg(long)]
        r: Option<f64>,
        #[arg(long, default_value = "synth.csv")]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Shuffle,
    Iaaft,
}

fn label_of(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().to_string())
        .unwrap_or_else(|| "series".into())
}

fn write_spectrum(
    out: &Path,
    surface: &multifract::scaling::FluctuationSurface,
    scaling: &multifract::scaling::ScalingResult,
    spectrum: &MultifractalSpectrum,
) -> Result<()> {
    std::fs::create_dir_all(out)?;
    spectrum.write_csv(std::fs::File::create(out.join("spectrum.csv"))?, scaling)?;
    surface.write_csv(std::fs::File::create(out.join("surface.csv"))?, false)?;
    std::fs::write(
        out.join("spectrum.json"),
        serde_json::to_string_pretty(&serde_json::json!({
            "scaling": scaling,
            "spectrum": spectrum,
        }))?,
    )?;
    println!(
        "h(2) = {:.4}  delta_h = {:.4}  delta_alpha = {:.4}  MDM = {:.4}",
        spectrum.hurst, spectrum.delta_h, spectrum.delta_alpha, spectrum.mdm
    );
    println!("wrote {}", out.display());
    Ok(())
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Analyze { config, out, workers } => {
            let cfg = AnalysisConfig::from_toml_path(&config)
                .with_context(|| format!("loading {}", config.display()))?;
            let started = std::time::Instant::now();
            let report = run_pipeline(&cfg, workers)?;
            write_outputs(&report, &out, started.elapsed().as_secs_f64())?;
            println!(
                "analyzed {} periods, {} failures; wrote {}",
                report.periods.len(),
                report.failures.len(),
                out.display()
            );
            for failure in &report.failures {
                eprintln!(
                    "failed: period {} {}: {}",
                    failure.period, failure.item, failure.error
                );
            }
            Ok(if report.any_failures() { 1 } else { 0 })
        }
        Command::Mfdfa {
            input,
            csv,
            grid,
            out,
            attribute,
            ensemble: ensemble_size,
            seed,
        } => {
            let series = csv.load(&input, &label_of(&input))?;
            let qs = grid.q_grid()?;
            let ss = grid.scale_grid(series.len())?;
            let surface = mfdfa_surface(&series, &qs, &ss, grid.order, grid.bidirectional())?;
            let scaling = fit_scaling(&surface);
            let spectrum = MultifractalSpectrum::from_scaling(&scaling)?;
            write_spectrum(&out, &surface, &scaling, &spectrum)?;
            if attribute {
                let cfg = AttributionConfig {
                    q: qs,
                    scales: Some(ss),
                    detrend_order: grid.order,
                    bidirectional: grid.bidirectional(),
                    ensemble_size,
                    master_seed: seed,
                    ..AttributionConfig::new(seed)
                };
                let attribution = attribute_sources(&series, &cfg)?;
                std::fs::write(
                    out.join("attribution.json"),
                    serde_json::to_string_pretty(&attribution)?,
                )?;
                let v = &attribution.verdicts;
                println!(
                    "sources: temporal={} distribution={} nonlinear={} linear={}",
                    v.temporal_correlation_contributes.active,
                    v.distribution_contributes.active,
                    v.nonlinear_correlation_contributes.active,
                    v.linear_correlation_contributes.active
                );
            }
            Ok(0)
        }
        Command::Mfdcca { x, y, csv, grid, out } => {
            let sx = csv.load(&x, &label_of(&x))?;
            let sy = csv.load(&y, &label_of(&y))?;
            let pair = ingest::align(&sx, &sy)?;
            let qs = grid.q_grid()?;
            let ss = grid.scale_grid(pair.len())?;
            let surface = mfdcca_surface(&pair, &qs, &ss, grid.order, grid.bidirectional())?;
            let scaling = fit_scaling(&surface);
            let spectrum = MultifractalSpectrum::from_scaling(&scaling)?;
            write_spectrum(&out, &surface, &scaling, &spectrum)?;
            Ok(0)
        }
        Command::Rho {
            x,
            y,
            csv,
            grid,
            confidence,
            sims,
            seed,
            one_sided,
            out,
        } => {
            let sx = csv.load(&x, &label_of(&x))?;
            let sy = csv.load(&y, &label_of(&y))?;
            let pair = ingest::align(&sx, &sy)?;
            let ss = grid.scale_grid(pair.len())?;
            let profile = rho_dcca(&pair, &ss, grid.order, grid.bidirectional())?;
            let band = critical_band(
                pair.len(),
                &ss,
                grid.order,
                grid.bidirectional(),
                confidence,
                sims,
                seed,
            )?;
            let profile = profile.with_band(band)?;
            std::fs::create_dir_all(&out)?;
            profile.write_csv(std::fs::File::create(out.join("rho.csv"))?, one_sided)?;
            std::fs::write(
                out.join("rho.json"),
                serde_json::to_string_pretty(&profile)?,
            )?;
            for (i, &s) in profile.scales().iter().enumerate() {
                println!(
                    "s = {s:6}  rho = {:+.4}  band = [{:+.4}, {:+.4}]",
                    profile.rho[i],
                    profile.band.as_ref().unwrap().lower[i],
                    profile.band.as_ref().unwrap().upper[i]
                );
            }
            println!("wrote {}", out.display());
            Ok(0)
        }
        Command::Tests { input, csv, lags, out } => {
            let series = csv.load(&input, &label_of(&input))?;
            let config = BatteryConfig {
                ljung_box_lags: lags,
                ..BatteryConfig::default()
            };
            let report = battery(&series, &config)?;
            std::fs::write(&out, serde_json::to_string_pretty(&report)?)?;
            let fmt = |p: Option<f64>| p.map(|p| format!("{p:.4}")).unwrap_or("failed".into());
            println!(
                "runs: p = {}", fmt(report.runs.outcome.as_ref().map(|t| t.p_value))
            );
            println!(
                "ljung_box: p = {}",
                fmt(report.ljung_box.outcome.as_ref().map(|t| t.p_value))
            );
            println!(
                "variance_ratio: min p = {}",
                fmt(report.variance_ratio.outcome.as_ref().map(|t| t.min_p))
            );
            println!("bds: min p = {}", fmt(report.bds.outcome.as_ref().map(|t| t.min_p)));
            println!(
                "mann_kendall: p = {}",
                fmt(report.mann_kendall.outcome.as_ref().map(|t| t.p_value))
            );
            println!(
                "dfa: h(2) = {}",
                fmt(report.dfa.outcome.as_ref().map(|t| t.h2))
            );
            println!("rejections at {}%: {}", report.alpha * 100.0, report.rejections);
            println!("wrote {}", out.display());
            Ok(0)
        }
        Command::Surrogate {
            input,
            csv,
            method,
            ensemble: size,
            seed,
            max_iter,
            tol,
            split_dir,
            out,
        } => {
            let series = csv.load(&input, &label_of(&input))?;
            let spec = SurrogateSpec {
                method: match method {
                    MethodArg::Shuffle => SurrogateMethod::Shuffle,
                    MethodArg::Iaaft => SurrogateMethod::Iaaft,
                },
                master_seed: seed,
                ensemble_size: size,
                max_iterations: max_iter,
                convergence_tol: tol,
            };
            let members = ensemble(&series, &spec)?;
            match split_dir {
                Some(dir) => {
                    std::fs::create_dir_all(&dir)?;
                    for (i, member) in members.iter().enumerate() {
                        ingest::write_csv(&dir.join(format!("m{i:03}.csv")), member)?;
                    }
                    println!("wrote {} members to {}", members.len(), dir.display());
                }
                None => {
                    write_ensemble_csv(std::fs::File::create(&out)?, &members)?;
                    println!("wrote {} members to {}", members.len(), out.display());
                }
            }
            Ok(0)
        }
        Command::Synth {
            model,
            n,
            seed,
            hurst,
            p,
            depth,
            phi,
            sigma,
            theta,
            beta,
            noise_sd,
            dof,
            r,
            out,
        } => {
            let need = |opt: Option<f64>, name: &str| {
                opt.with_context(|| format!("--model requires --{name}"))
            };
            let model = match model {
                ModelArg::Fgn => SynthModel::Fgn {
                    hurst: need(hurst, "hurst")?,
                },
                ModelArg::Cascade => {
                    let depth = depth.context("--model cascade requires --depth")?;
                    SynthModel::Cascade {
                        p: need(p, "p")?,
                        depth,
                    }
                }
                ModelArg::Ar1 => SynthModel::Ar1 {
                    phi: need(phi, "phi")?,
                    sigma,
                },
                ModelArg::Ma1 => SynthModel::Ma1 {
                    theta: need(theta, "theta")?,
                },
                ModelArg::CoupledPair => SynthModel::CoupledPair {
                    beta: need(beta, "beta")?,
                    noise_sd,
                },
                ModelArg::GaussianIid => SynthModel::GaussianIid,
                ModelArg::StudentT => SynthModel::StudentT {
                    dof: need(dof, "dof")?,
                },
                ModelArg::LogisticMap => SynthModel::LogisticMap { r: need(r, "r")? },
            };
            let n = match model {
                SynthModel::Cascade { depth, .. } => 1usize << depth,
                _ => n,
            };
            let spec = SynthSpec::new(model, n, seed);
            if let SynthModel::CoupledPair { .. } = model {
                let (x, y) = generate_pair(&spec)?;
                let stem = out.file_stem().unwrap_or_default().to_string_lossy();
                let ext = out.extension().unwrap_or_default().to_string_lossy();
                let dir = out.parent().unwrap_or(Path::new("."));
                let px = dir.join(format!("{stem}_x.{ext}"));
                let py = dir.join(format!("{stem}_y.{ext}"));
                ingest::write_csv(&px, &x)?;
                ingest::write_csv(&py, &y)?;
                println!("wrote {} and {}", px.display(), py.display());
            } else {
                let series = generate(&spec)?;
                ingest::write_csv(&out, &series)?;
                println!("wrote {} ({} points)", out.display(), series.len());
            }
            Ok(0)
        }
    }
}

fn exit_code_for(err: &anyhow::Error) -> u8 {
    if let Some(e) = err.downcast_ref::<multifract::Error>() {
        match e {
            multifract::Error::Config(_)
            | multifract::Error::CsvColumn { .. }
            | multifract::Error::CsvParse { .. }
            | multifract::Error::Csv(_)
            | multifract::Error::InvalidParameter { .. }
            | multifract::Error::InvalidGrid(_)
            | multifract::Error::Io(_) => 2,
            _ => 1,
        }
    } else {
        2
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
