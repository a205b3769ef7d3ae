//! Multifractal quantities derived from scaling exponents — mass exponents,
//! the Legendre singularity spectrum, multifractality widths, the market
//! deficiency measure — and the shuffle/surrogate decomposition of where the
//! multifractality comes from.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scaling::{fit_scaling, mfdfa_surface, QGrid, ScaleGrid, ScalingResult};
use crate::seeds::{derive_seed, member_rng, Stream};
use crate::series::TimeSeries;
use crate::surrogates::{self, SurrogateMethod, SurrogateSpec};


/// Fractal dimension of the support; 1 for time series.
const SUPPORT_DIMENSION: f64 = 1.0;

/// Singularity strengths and spectrum values, one entry per q order.
pub type SpectrumCurves = (Vec<Option<f64>>, Vec<Option<f64>>);

/// Mass exponents `tau(q) = q * h(q) - 1` on the full q grid.
pub fn mass_exponents(scaling: &ScalingResult) -> Result<Vec<f64>> {
    scaling
        .q_orders()
        .iter()
        .zip(&scaling.h)
        .map(|(&q, h)| match h {
            Some(h) => Ok(q * h - SUPPORT_DIMENSION),
            None => Err(Error::Numerical {
                context: format!("h({q}) unavailable; mass exponents need the full q grid"),
            }),
        })
        .collect()
}

/// Legendre transform of the mass exponents: singularity strengths
/// `alpha = dtau/dq` (central differences, one-sided at the endpoints) and
/// spectrum values `f(alpha) = q * alpha - tau`, which is Eq-for-Eq the
/// classical `q (alpha - h) + 1` given `tau = q h - 1`.
///
/// Entries are `None` where the derivative is not finite.
pub fn legendre_spectrum(tau: &[f64], qs: &QGrid) -> Result<SpectrumCurves> {
    let q = qs.orders();
    if tau.len() != q.len() {
        return Err(Error::InvalidParameter {
            name: "tau_len",
            value: tau.len() as f64,
            constraint: format!("expected one tau per q order ({})", q.len()),
        });
    }
    if q.len() < 3 {
        return Err(Error::InvalidGrid(
            "Legendre transform needs at least 3 q points".into(),
        ));
    }
    let n = q.len();
    let mut alpha = Vec::with_capacity(n);
    for i in 0..n {
        let d = if i == 0 {
            (tau[1] - tau[0]) / (q[1] - q[0])
        } else if i == n - 1 {
            (tau[n - 1] - tau[n - 2]) / (q[n - 1] - q[n - 2])
        } else {
            (tau[i + 1] - tau[i - 1]) / (q[i + 1] - q[i - 1])
        };
        alpha.push(d.is_finite().then_some(d));
    }
    let f_alpha = alpha
        .iter()
        .zip(q)
        .zip(tau)
        .map(|((a, &q), &t)| a.map(|a| q * a - t))
        .collect();
    Ok((alpha, f_alpha))
}

/// Literal and absolute multifractality widths.
///
/// `delta_h = h(q_max) - h(q_min)` and `delta_alpha = alpha(q_max) -
/// alpha(q_min)` as printed; both are negative for the usual decreasing h(q),
/// so the absolute values are carried alongside for summaries.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Widths {
    pub delta_h: f64,
    pub delta_alpha: f64,
    pub delta_h_abs: f64,
    pub delta_alpha_abs: f64,
}

pub fn widths(scaling: &ScalingResult, alpha: &[Option<f64>]) -> Result<Widths> {
    let n = scaling.q_orders().len();
    let (h_min, h_max) = match (scaling.h[0], scaling.h[n - 1]) {
        (Some(a), Some(b)) => (a, b),
        _ => {
            return Err(Error::Numerical {
                context: "h(q) missing at a q endpoint".into(),
            })
        }
    };
    let (a_min, a_max) = match (alpha[0], alpha[n - 1]) {
        (Some(a), Some(b)) => (a, b),
        _ => {
            return Err(Error::Numerical {
                context: "alpha(q) missing at a q endpoint".into(),
            })
        }
    };
    let delta_h = h_max - h_min;
    let delta_alpha = a_max - a_min;
    Ok(Widths {
        delta_h,
        delta_alpha,
        delta_h_abs: delta_h.abs(),
        delta_alpha_abs: delta_alpha.abs(),
    })
}

/// Market deficiency measure: `0.5 (|h(q_min) - 0.5| + |h(q_max) - 0.5|)`.
/// Higher values mean lower market efficiency.
pub fn mdm(h_qmin: f64, h_qmax: f64) -> f64 {
    0.5 * ((h_qmin - 0.5).abs() + (h_qmax - 0.5).abs())
}

/// The assembled multifractal description of one scaling result.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MultifractalSpectrum {
    q_orders: Vec<f64>,
    pub tau: Vec<f64>,
    pub alpha: Vec<Option<f64>>,
    pub f_alpha: Vec<Option<f64>>,
    /// Spectrum width |alpha(q_max) - alpha(q_min)|.
    pub delta_alpha: f64,
    /// Exponent range |h(q_max) - h(q_min)|.
    pub delta_h: f64,
    /// The literal signed differences as printed in the defining equations.
    pub delta_alpha_signed: f64,
    pub delta_h_signed: f64,
    pub mdm: f64,
    /// h(2).
    pub hurst: f64,
    /// Set when h(q) increases anywhere on the grid; noisy estimates can be
    /// locally non-monotone, so this is a quality flag rather than an error.
    pub monotone_warning: bool,
}

impl MultifractalSpectrum {
    /// Build from a complete scaling result (every q must have an exponent).
    pub fn from_scaling(scaling: &ScalingResult) -> Result<Self> {
        let qs = QGrid::new(scaling.q_orders().to_vec())?;
        let tau = mass_exponents(scaling)?;
        let (alpha, f_alpha) = legendre_spectrum(&tau, &qs)?;
        let w = widths(scaling, &alpha)?;
        let n = scaling.q_orders().len();
        let hurst = scaling.hurst().ok_or_else(|| Error::Numerical {
            context: "h(2) unavailable".into(),
        })?;
        let h_ends = (scaling.h[0].unwrap(), scaling.h[n - 1].unwrap());
        let monotone_warning = scaling
            .h
            .windows(2)
            .any(|w| w[0].unwrap() < w[1].unwrap() - 1e-12);
        if monotone_warning {
            log::warn!("h(q) increases somewhere on the grid; spectrum may be unreliable");
        }
        Ok(Self {
            q_orders: scaling.q_orders().to_vec(),
            tau,
            alpha,
            f_alpha,
            delta_alpha: w.delta_alpha_abs,
            delta_h: w.delta_h_abs,
            delta_alpha_signed: w.delta_alpha,
            delta_h_signed: w.delta_h,
            mdm: mdm(h_ends.0, h_ends.1),
            hurst,
            monotone_warning,
        })
    }

    pub fn q_orders(&self) -> &[f64] {
        &self.q_orders
    }

    /// Per-q table (q, tau, alpha, f_alpha) as CSV, the data behind the
    /// three standard spectrum panels.
    pub fn write_csv<W: std::io::Write>(&self, writer: W, scaling: &ScalingResult) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["q", "h", "r_squared", "tau", "alpha", "f_alpha"])?;
        let fmt = |v: Option<f64>| v.map(|x| format!("{x:.12e}")).unwrap_or_default();
        for (i, &q) in self.q_orders.iter().enumerate() {
            w.write_record([
                format!("{q}"),
                fmt(scaling.h[i]),
                fmt(scaling.r_squared[i]),
                format!("{:.12e}", self.tau[i]),
                fmt(self.alpha[i]),
                fmt(self.f_alpha[i]),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Mean and standard deviation of one scalar across an ensemble.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MeanSd {
    pub mean: f64,
    pub sd: f64,
}

impl MeanSd {
    fn from_samples(samples: &[f64]) -> Self {
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let var = if samples.len() > 1 {
            samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        Self {
            mean,
            sd: var.sqrt(),
        }
    }
}

/// Ensemble statistics of the scalar multifractal summaries.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub n: usize,
    pub delta_alpha: MeanSd,
    pub delta_h: MeanSd,
    pub mdm: MeanSd,
    pub hurst: MeanSd,
}

/// One decision of the source analysis with the evidence behind it:
/// the compared difference and the margin it was tested against.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Verdict {
    pub active: bool,
    pub difference: f64,
    pub margin: f64,
}

fn verdict(difference: f64, margin: f64) -> Verdict {
    Verdict {
        active: difference > margin,
        difference,
        margin,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Verdicts {
    /// Shuffling collapses the spectrum width: temporal correlation was a
    /// source of the multifractality.
    pub temporal_correlation_contributes: Verdict,
    /// The shuffled ensemble keeps a width above the Gaussian finite-size
    /// floor: the value distribution itself is a source.
    pub distribution_contributes: Verdict,
    /// IAAFT surrogates collapse the width: nonlinear correlation is a
    /// source.
    pub nonlinear_correlation_contributes: Verdict,
    /// Shuffled and surrogate ensembles differ: linear correlation is not
    /// negligible.
    pub linear_correlation_contributes: Verdict,
}

/// Output of the source-attribution experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SourceAttribution {
    pub original: MultifractalSpectrum,
    pub shuffled: EnsembleSummary,
    pub surrogate: EnsembleSummary,
    /// Spectrum widths of i.i.d. Gaussian series of the same length under the
    /// same grids: the finite-size floor a monofractal series exhibits.
    pub gaussian_floor: EnsembleSummary,
    pub verdicts: Verdicts,
}

/// Settings for [`attribute_sources`]. Ensemble members derive their seeds
/// from `(master_seed, stream, index)`, so runs are scheduling-independent.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AttributionConfig {
    pub q: QGrid,
    /// Scale grid; `None` uses the 30..n/5 default for the series length.
    pub scales: Option<ScaleGrid>,
    pub detrend_order: usize,
    pub bidirectional: bool,
    pub ensemble_size: usize,
    pub iaaft_max_iterations: usize,
    pub iaaft_tol: f64,
    /// Gaussian reference members used to calibrate the finite-size floor.
    pub floor_members: usize,
    pub master_seed: u64,
}

impl AttributionConfig {
    pub fn new(master_seed: u64) -> Self {
        Self {
            q: QGrid::default_grid(),
            scales: None,
            detrend_order: 1,
            bidirectional: true,
            ensemble_size: surrogates::DEFAULT_ENSEMBLE_SIZE,
            iaaft_max_iterations: surrogates::DEFAULT_MAX_ITERATIONS,
            iaaft_tol: surrogates::DEFAULT_CONVERGENCE_TOL,
            floor_members: 20,
            master_seed,
        }
    }
}

/// Full MF-DFA spectrum of one series under the given grids.
pub fn mfdfa_spectrum(
    series: &TimeSeries,
    qs: &QGrid,
    ss: &ScaleGrid,
    detrend_order: usize,
    bidirectional: bool,
) -> Result<(ScalingResult, MultifractalSpectrum)> {
    let surface = mfdfa_surface(series, qs, ss, detrend_order, bidirectional)?;
    let scaling = fit_scaling(&surface);
    let spectrum = MultifractalSpectrum::from_scaling(&scaling)?;
    Ok((scaling, spectrum))
}

/// Decompose the sources of multifractality in `series`: run MF-DFA on the
/// original, on an ensemble of shuffles, and on an ensemble of IAAFT
/// surrogates, then compare spectrum widths with 2-pooled-sd margins.
///
/// The distribution verdict compares the shuffled ensemble against Gaussian
/// series of the same length (the finite-size floor): shuffling keeps only
/// the distribution, so a width above the floor means the distribution
/// itself contributes.
pub fn attribute_sources(
    series: &TimeSeries,
    cfg: &AttributionConfig,
) -> Result<SourceAttribution> {
    if cfg.ensemble_size < 2 {
        return Err(Error::InvalidParameter {
            name: "ensemble_size",
            value: cfg.ensemble_size as f64,
            constraint: "source attribution needs at least 2 members".into(),
        });
    }
    let scales = match &cfg.scales {
        Some(s) => s.clone(),
        None => ScaleGrid::default_for_length(series.len())?,
    };

    let spectrum_of = |s: &TimeSeries| -> Result<MultifractalSpectrum> {
        let (_, spec) = mfdfa_spectrum(s, &cfg.q, &scales, cfg.detrend_order, cfg.bidirectional)?;
        Ok(spec)
    };

    let original = spectrum_of(series)?;

    let summarize = |members: &[TimeSeries]| -> Result<EnsembleSummary> {
        let specs: Result<Vec<MultifractalSpectrum>> = members
            .par_iter()
            .enumerate()
            .map(|(i, m)| {
                spectrum_of(m).map_err(|e| Error::SurrogateMember {
                    index: i,
                    seed: 0,
                    source: Box::new(e),
                })
            })
            .collect();
        let specs = specs?;
        Ok(EnsembleSummary {
            n: specs.len(),
            delta_alpha: MeanSd::from_samples(
                &specs.iter().map(|s| s.delta_alpha).collect::<Vec<_>>(),
            ),
            delta_h: MeanSd::from_samples(&specs.iter().map(|s| s.delta_h).collect::<Vec<_>>()),
            mdm: MeanSd::from_samples(&specs.iter().map(|s| s.mdm).collect::<Vec<_>>()),
            hurst: MeanSd::from_samples(&specs.iter().map(|s| s.hurst).collect::<Vec<_>>()),
        })
    };

    let shuffle_spec = SurrogateSpec {
        method: SurrogateMethod::Shuffle,
        master_seed: cfg.master_seed,
        ensemble_size: cfg.ensemble_size,
        max_iterations: cfg.iaaft_max_iterations,
        convergence_tol: cfg.iaaft_tol,
    };
    let shuffled_members = surrogates::ensemble(series, &shuffle_spec)?;
    let shuffled = summarize(&shuffled_members)?;
    drop(shuffled_members);

    let iaaft_spec = SurrogateSpec {
        method: SurrogateMethod::Iaaft,
        ..shuffle_spec
    };
    let surrogate_members = surrogates::ensemble(series, &iaaft_spec)?;
    let surrogate = summarize(&surrogate_members)?;
    drop(surrogate_members);

    // Finite-size floor: same pipeline on i.i.d. Gaussian noise of the same
    // length, seeded from the master seed.
    let floor_members: Result<Vec<TimeSeries>> = (0..cfg.floor_members.max(2))
        .into_par_iter()
        .map(|i| {
            use rand::Rng;
            use rand_distr::StandardNormal;
            let mut rng = member_rng(cfg.master_seed, Stream::GaussianFloor, i as u64);
            let values: Vec<f64> = (0..series.len()).map(|_| rng.sample(StandardNormal)).collect();
            TimeSeries::from_values(format!("gaussian_floor:{i}"), series.kind, values)
        })
        .collect();
    let gaussian_floor = summarize(&floor_members?)?;

    let pooled = |a: MeanSd, b: MeanSd| ((a.sd * a.sd + b.sd * b.sd) / 2.0).sqrt();

    let temporal = verdict(
        original.delta_alpha - shuffled.delta_alpha.mean,
        2.0 * shuffled.delta_alpha.sd,
    );
    let nonlinear = verdict(
        original.delta_alpha - surrogate.delta_alpha.mean,
        2.0 * surrogate.delta_alpha.sd,
    );
    let linear = verdict(
        (shuffled.delta_alpha.mean - surrogate.delta_alpha.mean).abs(),
        2.0 * pooled(shuffled.delta_alpha, surrogate.delta_alpha),
    );
    // A shuffled series keeps only the value distribution, so its width
    // measures distribution-born multifractality -- but a monofractal series
    // of this length already shows a nonzero width from estimation noise.
    // "Contributes" therefore means: outside the floor's 2-sd range.
    let distribution = verdict(
        shuffled.delta_alpha.mean - gaussian_floor.delta_alpha.mean,
        2.0 * gaussian_floor.delta_alpha.sd,
    );

    Ok(SourceAttribution {
        original,
        shuffled,
        surrogate,
        gaussian_floor,
        verdicts: Verdicts {
            temporal_correlation_contributes: temporal,
            distribution_contributes: distribution,
            nonlinear_correlation_contributes: nonlinear,
            linear_correlation_contributes: linear,
        },
    })
}

/// Convenience used by tests and the attribution experiment: the seed of a
/// given shuffle member (exposed so failures can be reproduced standalone).
pub fn shuffle_member_seed(master_seed: u64, index: u64) -> u64 {
    derive_seed(master_seed, Stream::Shuffle, index)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{cascade_oracle, generate, SynthModel, SynthSpec};

    /// A synthetic complete ScalingResult with h(q) given by a closure.
    fn scaling_from(qs: &QGrid, h: impl Fn(f64) -> f64) -> ScalingResult {
        let q = qs.orders().to_vec();
        let hs: Vec<Option<f64>> = q.iter().map(|&q| Some(h(q))).collect();
        let n = q.len();
        ScalingResult::from_parts(q, hs, vec![Some(0.0); n], vec![Some(1.0); n], (30, 240))
            .unwrap()
    }

    #[test]
    fn tau_identity_and_endpoints() {
        let qs = QGrid::default_grid();
        let scaling = scaling_from(&qs, |q| 0.6 - 0.02 * q);
        let tau = mass_exponents(&scaling).unwrap();
        for (i, &q) in qs.orders().iter().enumerate() {
            let h = scaling.h[i].unwrap();
            assert!((tau[i] + 1.0 - q * h).abs() < 1e-12);
        }
        // tau(0) = -1 exactly
        let zero = qs.index_of(0.0).unwrap();
        assert_eq!(tau[zero], -1.0);
    }

    #[test]
    fn paper_arithmetic_tau_at_q2() {
        // h(2) = 0.3135 -> tau(2) = -0.373.
        let qs = QGrid::default_grid();
        let scaling = scaling_from(&qs, |_| 0.3135);
        let tau = mass_exponents(&scaling).unwrap();
        let two = qs.index_of(2.0).unwrap();
        assert!((tau[two] + 0.373).abs() < 1e-12);
    }

    #[test]
    fn monofractal_spectrum_is_degenerate() {
        let qs = QGrid::default_grid();
        let scaling = scaling_from(&qs, |_| 0.5);
        let spec = MultifractalSpectrum::from_scaling(&scaling).unwrap();
        for a in spec.alpha.iter().flatten() {
            assert!((a - 0.5).abs() < 1e-10);
        }
        for f in spec.f_alpha.iter().flatten() {
            assert!((f - 1.0).abs() < 1e-10);
        }
        assert!(spec.delta_alpha < 1e-10);
        assert!(spec.delta_h < 1e-10);
        assert_eq!(spec.mdm, 0.0);
        assert!(!spec.monotone_warning);
    }

    #[test]
    fn f_alpha_at_q0_is_exactly_one() {
        let qs = QGrid::default_grid();
        let scaling = scaling_from(&qs, |q| 0.7 - 0.03 * q + 0.001 * q * q);
        let spec = MultifractalSpectrum::from_scaling(&scaling).unwrap();
        let zero = qs.index_of(0.0).unwrap();
        assert_eq!(spec.f_alpha[zero].unwrap(), 1.0);
        assert_eq!(spec.tau[zero], -1.0);
    }

    #[test]
    fn cascade_alpha_matches_symbolic_derivative() {
        // tau(q) = -ln(p^q + r^q)/ln 2 for the binomial cascade; its exact
        // derivative is -(p^q ln p + r^q ln r) / ((p^q + r^q) ln 2).
        let p: f64 = 0.3;
        let r: f64 = 0.7;
        let qs = QGrid::default_grid();
        let scaling = scaling_from(&qs, |q| cascade_oracle(p, q));
        let tau = mass_exponents(&scaling).unwrap();
        let (alpha, _) = legendre_spectrum(&tau, &qs).unwrap();
        let ln2 = std::f64::consts::LN_2;
        for (i, &q) in qs.orders().iter().enumerate() {
            let exact =
                -(p.powf(q) * p.ln() + r.powf(q) * r.ln()) / ((p.powf(q) + r.powf(q)) * ln2);
            let approx = alpha[i].unwrap();
            assert!(
                (approx - exact).abs() < 2e-2,
                "q={q}: {approx} vs {exact}"
            );
        }
    }

    #[test]
    fn legendre_reconstruction_recovers_h() {
        let qs = QGrid::default_grid();
        let scaling = scaling_from(&qs, |q| cascade_oracle(0.3, q));
        let spec = MultifractalSpectrum::from_scaling(&scaling).unwrap();
        for (i, &q) in qs.orders().iter().enumerate() {
            if q == 0.0 {
                continue;
            }
            let alpha = spec.alpha[i].unwrap();
            let f = spec.f_alpha[i].unwrap();
            let h_back = alpha - (f - 1.0) / q;
            assert!(
                (h_back - scaling.h[i].unwrap()).abs() < 1e-12,
                "q={q}"
            );
        }
    }

    #[test]
    fn widths_follow_the_printed_equations() {
        // h decreasing from 0.9 to 0.3 across the grid.
        let qs = QGrid::default_grid();
        let scaling = scaling_from(&qs, |q| 0.6 - 0.075 * q);
        let tau = mass_exponents(&scaling).unwrap();
        let (alpha, _) = legendre_spectrum(&tau, &qs).unwrap();
        let w = widths(&scaling, &alpha).unwrap();
        assert!((w.delta_h - (-0.6)).abs() < 1e-12);
        assert!((w.delta_h_abs - 0.6).abs() < 1e-12);
        assert!(w.delta_alpha < 0.0);
        assert_eq!(w.delta_alpha_abs, -w.delta_alpha);
    }

    #[test]
    fn cascade_width_matches_closed_form_endpoints() {
        let qs = QGrid::default_grid();
        let scaling = scaling_from(&qs, |q| cascade_oracle(0.3, q));
        let spec = MultifractalSpectrum::from_scaling(&scaling).unwrap();
        let expected = cascade_oracle(0.3, -4.0) - cascade_oracle(0.3, 4.0);
        assert!((spec.delta_h - expected).abs() < 1e-12);
        assert!((spec.delta_h_signed + expected).abs() < 1e-12);
    }

    #[test]
    fn mdm_hand_values_and_bounds() {
        assert_eq!(mdm(0.5, 0.5), 0.0);
        assert!((mdm(0.9, 0.3) - 0.3).abs() < 1e-15);
        assert!((mdm(0.55, 0.45) - 0.05).abs() < 1e-15);
        // bounds: 0 <= MDM <= (|a| + |b|)/2 + 0.5, zero iff both are 0.5
        for (a, b) in [(0.1, 0.8), (-0.2, 0.4), (1.3, 0.5)] {
            let v: f64 = mdm(a, b);
            assert!(v >= 0.0);
            assert!(v <= 0.5 * (a.abs() + b.abs()) + 0.5);
            assert!(v > 0.0);
        }
    }

    #[test]
    fn increasing_h_sets_quality_warning() {
        let qs = QGrid::default_grid();
        let scaling = scaling_from(&qs, |q| 0.5 + 0.02 * q);
        let spec = MultifractalSpectrum::from_scaling(&scaling).unwrap();
        assert!(spec.monotone_warning);
        assert!(spec.delta_h_signed > 0.0);
    }

    #[test]
    fn attribution_all_off_for_gaussian_noise() {
        let series = generate(&SynthSpec::new(SynthModel::GaussianIid, 4096, 77)).unwrap();
        let mut cfg = AttributionConfig::new(101);
        cfg.ensemble_size = 20;
        cfg.floor_members = 10;
        let out = attribute_sources(&series, &cfg).unwrap();
        let v = &out.verdicts;
        assert!(!v.temporal_correlation_contributes.active);
        assert!(!v.distribution_contributes.active);
        assert!(!v.nonlinear_correlation_contributes.active);
        assert!(!v.linear_correlation_contributes.active);
        // shuffle neutrality: original width within 2 pooled sd of shuffles
        assert!(
            (out.original.delta_alpha - out.shuffled.delta_alpha.mean).abs()
                <= 2.0 * out.shuffled.delta_alpha.sd
                + 1e-12
        );
    }

    #[test]
    fn attribution_flags_temporal_source_for_cascade() {
        let series = generate(&SynthSpec::new(
            SynthModel::Cascade { p: 0.3, depth: 12 },
            4096,
            5,
        ))
        .unwrap();
        let mut cfg = AttributionConfig::new(7);
        cfg.ensemble_size = 20;
        cfg.floor_members = 10;
        let out = attribute_sources(&series, &cfg).unwrap();
        assert!(out.verdicts.temporal_correlation_contributes.active);
        assert!(out.original.delta_alpha > out.shuffled.delta_alpha.mean);
    }

    #[test]
    fn attribution_flags_distribution_for_heavy_tails() {
        // Heavy tails need some length before the spurious width clears the
        // Gaussian floor; 10^4 matches the scale the estimator is used at.
        let series =
            generate(&SynthSpec::new(SynthModel::StudentT { dof: 3.0 }, 10_000, 15)).unwrap();
        let mut cfg = AttributionConfig::new(23);
        cfg.ensemble_size = 20;
        cfg.floor_members = 10;
        let out = attribute_sources(&series, &cfg).unwrap();
        assert!(out.verdicts.distribution_contributes.active);
        assert!(!out.verdicts.temporal_correlation_contributes.active);
    }

    #[test]
    fn attribution_requires_two_members() {
        let series = generate(&SynthSpec::new(SynthModel::GaussianIid, 1024, 1)).unwrap();
        let mut cfg = AttributionConfig::new(1);
        cfg.ensemble_size = 1;
        assert!(attribute_sources(&series, &cfg).is_err());
    }
}
