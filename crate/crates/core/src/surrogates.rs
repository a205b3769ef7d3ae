//! Null-model series: seeded random shuffles (destroy all temporal structure,
//! keep the value distribution) and IAAFT surrogates (keep the distribution
//! and the amplitude spectrum, destroy nonlinear structure).

use rand::seq::SliceRandom;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seeds::{derive_seed, Stream};
use crate::series::TimeSeries;

pub const DEFAULT_ENSEMBLE_SIZE: usize = 50;
pub const DEFAULT_MAX_ITERATIONS: usize = 1000;
pub const DEFAULT_CONVERGENCE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SurrogateMethod {
    Shuffle,
    Iaaft,
}

/// Parameters of a surrogate ensemble. Members are reproducible from
/// `(master_seed, index)` alone.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurrogateSpec {
    pub method: SurrogateMethod,
    pub master_seed: u64,
    pub ensemble_size: usize,
    /// IAAFT only.
    pub max_iterations: usize,
    /// IAAFT only: relative change of the spectrum RMSE that counts as
    /// converged.
    pub convergence_tol: f64,
}

impl SurrogateSpec {
    pub fn new(method: SurrogateMethod, master_seed: u64) -> Self {
        Self {
            method,
            master_seed,
            ensemble_size: DEFAULT_ENSEMBLE_SIZE,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            convergence_tol: DEFAULT_CONVERGENCE_TOL,
        }
    }

    pub fn with_size(mut self, ensemble_size: usize) -> Self {
        self.ensemble_size = ensemble_size;
        self
    }
}

/// Uniformly random permutation of the values (Fisher-Yates under a seeded
/// generator); timestamps stay in their original order.
pub fn shuffle(series: &TimeSeries, seed: u64) -> Result<TimeSeries> {
    let mut values = series.values().to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    values.shuffle(&mut rng);
    series.with_values(values)
}

/// Outcome of one IAAFT run. The surrogate's value multiset equals the
/// original's exactly; `converged` reports whether the spectrum RMSE settled
/// within tolerance before `max_iter`.
#[derive(Debug, Clone)]
pub struct IaaftOutcome {
    pub series: TimeSeries,
    pub converged: bool,
    pub iterations: usize,
    /// RMSE between the surrogate's and the target amplitude spectrum after
    /// the final rank adjustment.
    pub spectrum_rmse: f64,
}

/// Iterative amplitude adjusted Fourier transform surrogate.
///
/// Starting from a random permutation, each iteration imposes the original
/// amplitude spectrum (keeping phases) and then restores the exact value
/// multiset by rank remapping. The loop ends on the rank step, so
/// `sorted(output) == sorted(input)` bit-exactly.
pub fn iaaft(series: &TimeSeries, seed: u64, max_iter: usize, tol: f64) -> Result<IaaftOutcome> {
    let n = series.len();
    if n < 4 {
        return Err(Error::InsufficientData {
            required: 4,
            actual: n,
            context: "IAAFT surrogate".into(),
        });
    }
    let mut sorted_values = series.values().to_vec();
    sorted_values.sort_by(f64::total_cmp);

    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);

    let mut buf: Vec<Complex<f64>> = series
        .values()
        .iter()
        .map(|&v| Complex::new(v, 0.0))
        .collect();
    fwd.process(&mut buf);
    let target_amp: Vec<f64> = buf.iter().map(|c| c.norm()).collect();

    let mut current = series.values().to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    current.shuffle(&mut rng);

    let mut rank: Vec<usize> = (0..n).collect();
    let mut prev_rmse = f64::INFINITY;
    let mut rmse = f64::INFINITY;
    let mut converged = false;
    let mut iterations = 0;

    for iter in 1..=max_iter {
        iterations = iter;

        // Spectrum step: keep phases, impose target amplitudes.
        for (slot, &v) in buf.iter_mut().zip(&current) {
            *slot = Complex::new(v, 0.0);
        }
        fwd.process(&mut buf);
        for (slot, &amp) in buf.iter_mut().zip(&target_amp) {
            let norm = slot.norm();
            *slot = if norm > 0.0 {
                *slot * (amp / norm)
            } else {
                Complex::new(amp, 0.0)
            };
        }
        inv.process(&mut buf);
        for (v, c) in current.iter_mut().zip(&buf) {
            *v = c.re / n as f64;
        }

        // Amplitude step: restore the exact multiset by rank.
        rank.sort_by(|&a, &b| current[a].total_cmp(&current[b]));
        for (r, &i) in rank.iter().enumerate() {
            current[i] = sorted_values[r];
        }

        // Convergence: relative change of the spectrum RMSE.
        for (slot, &v) in buf.iter_mut().zip(&current) {
            *slot = Complex::new(v, 0.0);
        }
        fwd.process(&mut buf);
        let mse: f64 = buf
            .iter()
            .zip(&target_amp)
            .map(|(c, &amp)| {
                let d = c.norm() - amp;
                d * d
            })
            .sum::<f64>()
            / n as f64;
        rmse = mse.sqrt();
        if rmse == 0.0 || (prev_rmse.is_finite() && (prev_rmse - rmse).abs() <= tol * prev_rmse) {
            converged = true;
            break;
        }
        prev_rmse = rmse;
    }

    if !converged {
        log::warn!(
            "IAAFT did not converge in {max_iter} iterations (spectrum RMSE {rmse:.3e})"
        );
    }
    Ok(IaaftOutcome {
        series: series.with_values(current)?,
        converged,
        iterations,
        spectrum_rmse: rmse,
    })
}

/// Generate `spec.ensemble_size` surrogates; member `i` uses the seed derived
/// from `(master_seed, i)`, so the ensemble is identical under any scheduling.
pub fn ensemble(series: &TimeSeries, spec: &SurrogateSpec) -> Result<Vec<TimeSeries>> {
    if spec.ensemble_size < 1 {
        return Err(Error::InvalidParameter {
            name: "ensemble_size",
            value: spec.ensemble_size as f64,
            constraint: "need at least one member".into(),
        });
    }
    let stream = match spec.method {
        SurrogateMethod::Shuffle => Stream::Shuffle,
        SurrogateMethod::Iaaft => Stream::Iaaft,
    };
    (0..spec.ensemble_size)
        .into_par_iter()
        .map(|i| {
            let seed = derive_seed(spec.master_seed, stream, i as u64);
            let made = match spec.method {
                SurrogateMethod::Shuffle => shuffle(series, seed),
                SurrogateMethod::Iaaft => {
                    iaaft(series, seed, spec.max_iterations, spec.convergence_tol)
                        .map(|o| o.series)
                }
            };
            made.map_err(|e| Error::SurrogateMember {
                index: i,
                seed,
                source: Box::new(e),
            })
        })
        .collect()
}

/// Write an ensemble as one wide CSV: `timestamp,m000,m001,...`.
pub fn write_ensemble_csv<W: std::io::Write>(
    writer: W,
    members: &[TimeSeries],
) -> Result<()> {
    if members.is_empty() {
        return Err(Error::InvalidParameter {
            name: "members",
            value: 0.0,
            constraint: "nothing to write".into(),
        });
    }
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["timestamp".to_string()];
    header.extend((0..members.len()).map(|i| format!("m{i:03}")));
    w.write_record(&header)?;
    for (row, &t) in members[0].timestamps().iter().enumerate() {
        let mut record = vec![t.to_string()];
        record.extend(members.iter().map(|m| format!("{:.17e}", m.values()[row])));
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}
