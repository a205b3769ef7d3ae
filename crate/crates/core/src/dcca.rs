//! Multiscale DCCA cross-correlation coefficient and its Monte-Carlo
//! significance band under the no-cross-correlation null.
//!
//! `rho(s) = F2_xy(s) / (F_x(s) F_y(s))`: the signed mean detrended
//! covariance over all segments, normalized by the two single-series DFA
//! fluctuation functions at the same scale. Numerator and denominators share
//! the segment structure, so the value lands in [-1, 1] without clamping.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scaling::{aggregate_q, profile, scale_moments, ScaleGrid};
use crate::seeds::{member_rng, Stream};
use crate::series::AlignedPair;

/// Empirical quantile band of the null distribution of rho per scale.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CriticalBand {
    pub confidence: f64,
    pub n_sims: usize,
    pub seed: u64,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Significance {
    SignificantPositive,
    SignificantNegative,
    NotSignificant,
}

/// rho(s) over a scale grid, optionally with its critical band.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RhoProfile {
    scales: Vec<usize>,
    pub rho: Vec<f64>,
    pub band: Option<CriticalBand>,
    /// Length of the aligned pair behind the profile.
    pub n_effective: usize,
    pub detrend_order: usize,
    pub bidirectional: bool,
}

impl RhoProfile {
    pub fn scales(&self) -> &[usize] {
        &self.scales
    }

    /// Attach a band computed for the same grid.
    pub fn with_band(mut self, band: CriticalBand) -> Result<Self> {
        if band.lower.len() != self.scales.len() || band.upper.len() != self.scales.len() {
            return Err(Error::InvalidParameter {
                name: "band_len",
                value: band.lower.len() as f64,
                constraint: format!("band must cover all {} scales", self.scales.len()),
            });
        }
        self.band = Some(band);
        Ok(self)
    }

    /// CSV rows `s, rho, lower, upper, decision`.
    pub fn write_csv<W: std::io::Write>(&self, writer: W, one_sided: bool) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["s", "rho", "lower", "upper", "decision"])?;
        let decisions = self.band.as_ref().map(|_| self.significance(one_sided));
        for (i, &s) in self.scales.iter().enumerate() {
            let (lo, hi, dec) = match (&self.band, &decisions) {
                (Some(b), Some(d)) => (
                    format!("{:.12e}", b.lower[i]),
                    format!("{:.12e}", b.upper[i]),
                    format!("{:?}", d[i]),
                ),
                _ => (String::new(), String::new(), String::new()),
            };
            w.write_record([s.to_string(), format!("{:.12e}", self.rho[i]), lo, hi, dec])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Per-scale decision against the attached band. Two-sided by default;
    /// `one_sided` only tests the upper tail.
    pub fn significance(&self, one_sided: bool) -> Vec<Significance> {
        let Some(band) = &self.band else {
            return vec![Significance::NotSignificant; self.scales.len()];
        };
        self.rho
            .iter()
            .enumerate()
            .map(|(i, &r)| {
                if r > band.upper[i] {
                    Significance::SignificantPositive
                } else if !one_sided && r < band.lower[i] {
                    Significance::SignificantNegative
                } else {
                    Significance::NotSignificant
                }
            })
            .collect()
    }
}

/// Per-scale decisions; requires a band on the profile.
pub fn significance(profile: &RhoProfile) -> Result<Vec<Significance>> {
    if profile.band.is_none() {
        return Err(Error::InvalidParameter {
            name: "band",
            value: 0.0,
            constraint: "significance needs a critical band; run critical_band first".into(),
        });
    }
    Ok(profile.significance(false))
}

/// rho over raw (return) values. Shared by the public entry point and the
/// null simulation.
fn rho_from_values(
    x: &[f64],
    y: &[f64],
    x_label: &str,
    y_label: &str,
    ss: &ScaleGrid,
    detrend_order: usize,
    bidirectional: bool,
) -> Result<Vec<f64>> {
    ss.validate(x.len(), detrend_order)?;
    let px = profile(x)?;
    let py = profile(y)?;
    ss.scales()
        .par_iter()
        .map(|&s| {
            let moments = scale_moments(&px, &py, s, detrend_order, bidirectional)?;
            let xy: Vec<f64> = moments.iter().map(|m| m.xy).collect();
            let xx: Vec<f64> = moments.iter().map(|m| m.xx).collect();
            let yy: Vec<f64> = moments.iter().map(|m| m.yy).collect();
            let numerator = xy.iter().sum::<f64>() / xy.len() as f64;
            // The q = 2 aggregation is exactly the single-series DFA
            // fluctuation function at this scale.
            let fx = aggregate_q(&xx, 2.0);
            let fy = aggregate_q(&yy, 2.0);
            match (fx, fy) {
                (Some(fx), Some(fy)) if fx > 0.0 && fy > 0.0 => Ok(numerator / (fx * fy)),
                (None | Some(_), Some(_)) => Err(Error::ZeroVariance {
                    label: x_label.to_string(),
                    context: format!("DFA fluctuation vanished at scale {s}"),
                }),
                _ => Err(Error::ZeroVariance {
                    label: y_label.to_string(),
                    context: format!("DFA fluctuation vanished at scale {s}"),
                }),
            }
        })
        .collect()
}

/// The DCCA coefficient per scale for an aligned pair (band not attached).
pub fn rho_dcca(
    pair: &AlignedPair,
    ss: &ScaleGrid,
    detrend_order: usize,
    bidirectional: bool,
) -> Result<RhoProfile> {
    let rho = rho_from_values(
        pair.x().values(),
        pair.y().values(),
        &pair.x().label,
        &pair.y().label,
        ss,
        detrend_order,
        bidirectional,
    )?;
    Ok(RhoProfile {
        scales: ss.scales().to_vec(),
        rho,
        band: None,
        n_effective: pair.len(),
        detrend_order,
        bidirectional,
    })
}

/// Simulate `n_sims` i.i.d. standard Gaussian pairs of length `n` and return
/// the empirical `(1 - confidence)/2` and `(1 + confidence)/2` quantiles of
/// rho per scale.
///
/// Each simulation derives its own generator from `(seed, index)`; the
/// quantile reduction is a deterministic sort, so the band is bit-identical
/// for a given `(seed, n, grid, n_sims)` regardless of worker count.
pub fn critical_band(
    n: usize,
    ss: &ScaleGrid,
    detrend_order: usize,
    bidirectional: bool,
    confidence: f64,
    n_sims: usize,
    seed: u64,
) -> Result<CriticalBand> {
    if n_sims < 100 {
        return Err(Error::InvalidParameter {
            name: "n_sims",
            value: n_sims as f64,
            constraint: "need at least 100 simulations".into(),
        });
    }
    if !(confidence > 0.5 && confidence < 1.0) {
        return Err(Error::InvalidParameter {
            name: "confidence",
            value: confidence,
            constraint: "confidence must lie in (0.5, 1)".into(),
        });
    }
    ss.validate(n, detrend_order)?;

    let sims: Result<Vec<Vec<f64>>> = (0..n_sims)
        .into_par_iter()
        .map(|i| {
            let mut rng = member_rng(seed, Stream::RhoNull, i as u64);
            let x: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
            let y: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
            rho_from_values(&x, &y, "null_x", "null_y", ss, detrend_order, bidirectional)
        })
        .collect();
    let sims = sims?;

    let p_lo = (1.0 - confidence) / 2.0;
    let p_hi = (1.0 + confidence) / 2.0;
    let mut lower = Vec::with_capacity(ss.scales().len());
    let mut upper = Vec::with_capacity(ss.scales().len());
    let mut column = vec![0.0; n_sims];
    for s_idx in 0..ss.scales().len() {
        for (sim_idx, sim) in sims.iter().enumerate() {
            column[sim_idx] = sim[s_idx];
        }
        column.sort_by(f64::total_cmp);
        lower.push(quantile_sorted(&column, p_lo));
        upper.push(quantile_sorted(&column, p_hi));
    }
    Ok(CriticalBand {
        confidence,
        n_sims,
        seed,
        lower,
        upper,
    })
}

/// Linearly interpolated quantile of an ascending-sorted sample.
fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    let pos = p * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let frac = pos - lo as f64;
    if lo + 1 >= n {
        sorted[n - 1]
    } else {
        sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
    }
}
