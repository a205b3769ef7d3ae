//! Ground-truth synthetic series: fractional Gaussian noise with exact
//! covariance, binomial multifractal cascades with closed-form exponents,
//! AR/MA processes, coupled pairs, and deterministic chaos.
//!
//! Everything is reproducible from the spec alone: the same `SynthSpec`
//! always yields the bit-identical series.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal, StudentT};
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seeds::{member_rng, Stream};
use crate::series::{SeriesKind, TimeSeries};

const AR_BURN_IN: usize = 1000;
const LOGISTIC_BURN_IN: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum SynthModel {
    /// Fractional Gaussian noise with Hurst exponent `hurst` in (0, 1).
    Fgn { hurst: f64 },
    /// Binomial multifractal cascade of `2^depth` increments with weight `p`.
    Cascade { p: f64, depth: u32 },
    Ar1 { phi: f64, sigma: f64 },
    Ma1 { theta: f64 },
    /// A pair (X, Y) with Y = beta * X + noise_sd * eta; use
    /// [`generate_pair`].
    CoupledPair { beta: f64, noise_sd: f64 },
    GaussianIid,
    StudentT { dof: f64 },
    LogisticMap { r: f64 },
}

impl std::fmt::Display for SynthModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SynthModel::Fgn { hurst } => write!(f, "fgn(H={hurst})"),
            SynthModel::Cascade { p, depth } => write!(f, "cascade(p={p},depth={depth})"),
            SynthModel::Ar1 { phi, sigma } => write!(f, "ar1(phi={phi},sigma={sigma})"),
            SynthModel::Ma1 { theta } => write!(f, "ma1(theta={theta})"),
            SynthModel::CoupledPair { beta, noise_sd } => {
                write!(f, "coupled(beta={beta},sd={noise_sd})")
            }
            SynthModel::GaussianIid => write!(f, "gaussian_iid"),
            SynthModel::StudentT { dof } => write!(f, "student_t(dof={dof})"),
            SynthModel::LogisticMap { r } => write!(f, "logistic(r={r})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub model: SynthModel,
    pub n: usize,
    pub seed: u64,
}

impl SynthSpec {
    pub fn new(model: SynthModel, n: usize, seed: u64) -> Self {
        Self { model, n, seed }
    }
}

/// Generate a single series. `CoupledPair` must go through [`generate_pair`].
pub fn generate(spec: &SynthSpec) -> Result<TimeSeries> {
    let label = spec.model.to_string();
    let mut rng = member_rng(spec.seed, Stream::Synth, 0);
    let values = match spec.model {
        SynthModel::Fgn { hurst } => fgn(hurst, spec.n, &mut rng)?,
        SynthModel::Cascade { p, depth } => {
            if spec.n != (1usize << depth) {
                return Err(Error::InvalidParameter {
                    name: "n",
                    value: spec.n as f64,
                    constraint: format!(
                        "cascade of depth {depth} has exactly {} cells",
                        1usize << depth
                    ),
                });
            }
            cascade(p, depth, &mut rng)?
        }
        SynthModel::Ar1 { phi, sigma } => ar1(phi, sigma, spec.n, &mut rng)?,
        SynthModel::Ma1 { theta } => ma1(theta, spec.n, &mut rng),
        SynthModel::GaussianIid => (0..spec.n).map(|_| rng.sample(StandardNormal)).collect(),
        SynthModel::StudentT { dof } => {
            let dist = StudentT::new(dof).map_err(|e| Error::InvalidParameter {
                name: "dof",
                value: dof,
                constraint: e.to_string(),
            })?;
            (0..spec.n).map(|_| dist.sample(&mut rng)).collect()
        }
        SynthModel::LogisticMap { r } => logistic_map(r, spec.n, &mut rng)?,
        SynthModel::CoupledPair { .. } => {
            return Err(Error::InvalidParameter {
                name: "model",
                value: f64::NAN,
                constraint: "coupled_pair generates two series; call generate_pair".into(),
            })
        }
    };
    TimeSeries::from_values(label, SeriesKind::Generic, values)
}

/// Generate a coupled pair (X, Y) with Y_t = beta * X_t + noise_sd * eta_t.
pub fn generate_pair(spec: &SynthSpec) -> Result<(TimeSeries, TimeSeries)> {
    let SynthModel::CoupledPair { beta, noise_sd } = spec.model else {
        return Err(Error::InvalidParameter {
            name: "model",
            value: f64::NAN,
            constraint: "generate_pair only applies to coupled_pair".into(),
        });
    };
    let mut rng = member_rng(spec.seed, Stream::Synth, 0);
    let x: Vec<f64> = (0..spec.n).map(|_| rng.sample(StandardNormal)).collect();
    let y: Vec<f64> = x
        .iter()
        .map(|&v| beta * v + noise_sd * rng.sample::<f64, _>(StandardNormal))
        .collect();
    let label = spec.model.to_string();
    Ok((
        TimeSeries::from_values(format!("{label}:x"), SeriesKind::Generic, x)?,
        TimeSeries::from_values(format!("{label}:y"), SeriesKind::Generic, y)?,
    ))
}

/// Exact-covariance fGn via circulant embedding (Davies-Harte).
///
/// The circulant first row holds the target autocovariance
/// `gamma(k) = 0.5 (|k+1|^{2H} - 2|k|^{2H} + |k-1|^{2H})`; its FFT gives the
/// eigenvalues, which are non-negative for every H in (0, 1).
fn fgn<R: Rng>(hurst: f64, n: usize, rng: &mut R) -> Result<Vec<f64>> {
    if !(hurst > 0.0 && hurst < 1.0) {
        return Err(Error::InvalidParameter {
            name: "hurst",
            value: hurst,
            constraint: "fGn requires H in (0, 1)".into(),
        });
    }
    if n < 2 {
        return Err(Error::InsufficientData {
            required: 2,
            actual: n,
            context: "fGn generation".into(),
        });
    }
    let m = 2 * n;
    // First circulant row: gamma(0..=n) then the mirrored tail.
    let row_gamma = |k: usize| {
        let lag = if k <= n { k } else { m - k };
        Complex::new(fgn_autocovariance(hurst, lag), 0.0)
    };
    let mut row: Vec<Complex<f64>> = (0..m).map(row_gamma).collect();

    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(m).process(&mut row);

    let max_eig = row.iter().map(|c| c.re).fold(0.0f64, f64::max);
    let mut eigen = Vec::with_capacity(m);
    for c in &row {
        let lambda = c.re;
        if lambda < -1e-8 * max_eig.max(1.0) {
            return Err(Error::Numerical {
                context: format!("circulant embedding eigenvalue {lambda} < 0 for H={hurst}"),
            });
        }
        eigen.push(lambda.max(0.0));
    }

    // Hermitian-symmetric Gaussian spectrum: real at k = 0 and k = n,
    // conjugate pairs elsewhere. Draw order is fixed for reproducibility.
    let mut spec: Vec<Complex<f64>> = vec![Complex::new(0.0, 0.0); m];
    let sqrt2_inv = std::f64::consts::FRAC_1_SQRT_2;
    spec[0] = Complex::new(rng.sample(StandardNormal), 0.0) * eigen[0].sqrt();
    for k in 1..n {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        let z = Complex::new(re * sqrt2_inv, im * sqrt2_inv) * eigen[k].sqrt();
        spec[k] = z;
        spec[m - k] = z.conj();
    }
    spec[n] = Complex::new(rng.sample(StandardNormal), 0.0) * eigen[n].sqrt();

    planner.plan_fft_inverse(m).process(&mut spec);
    let scale = 1.0 / (m as f64).sqrt();
    Ok(spec.iter().take(n).map(|c| c.re * scale).collect())
}

/// Increments of a binomial multifractal measure: recursive mass splitting
/// with weights {p, 1-p} assigned to left/right at random per branch.
fn cascade<R: Rng>(p: f64, depth: u32, rng: &mut R) -> Result<Vec<f64>> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParameter {
            name: "p",
            value: p,
            constraint: "cascade weight must lie in (0, 1)".into(),
        });
    }
    let mut masses = vec![1.0f64];
    for _ in 0..depth {
        let mut next = Vec::with_capacity(masses.len() * 2);
        for mass in masses {
            let w = if rng.gen::<bool>() { p } else { 1.0 - p };
            next.push(mass * w);
            next.push(mass * (1.0 - w));
        }
        masses = next;
    }
    Ok(masses)
}

fn ar1<R: Rng>(phi: f64, sigma: f64, n: usize, rng: &mut R) -> Result<Vec<f64>> {
    if phi.abs() >= 1.0 {
        return Err(Error::InvalidParameter {
            name: "phi",
            value: phi,
            constraint: "stationary AR(1) requires |phi| < 1".into(),
        });
    }
    let mut x = 0.0;
    for _ in 0..AR_BURN_IN {
        x = phi * x + sigma * rng.sample::<f64, _>(StandardNormal);
    }
    Ok((0..n)
        .map(|_| {
            x = phi * x + sigma * rng.sample::<f64, _>(StandardNormal);
            x
        })
        .collect())
}

fn ma1<R: Rng>(theta: f64, n: usize, rng: &mut R) -> Vec<f64> {
    let mut prev: f64 = rng.sample(StandardNormal);
    (0..n)
        .map(|_| {
            let e: f64 = rng.sample(StandardNormal);
            let x = e + theta * prev;
            prev = e;
            x
        })
        .collect()
}

fn logistic_map<R: Rng>(r: f64, n: usize, rng: &mut R) -> Result<Vec<f64>> {
    if !(r > 0.0 && r <= 4.0) {
        return Err(Error::InvalidParameter {
            name: "r",
            value: r,
            constraint: "logistic map requires r in (0, 4]".into(),
        });
    }
    let mut x: f64 = rng.gen_range(0.1..0.9);
    for _ in 0..LOGISTIC_BURN_IN {
        x = r * x * (1.0 - x);
    }
    Ok((0..n)
        .map(|_| {
            x = r * x * (1.0 - x);
            x
        })
        .collect())
}

/// Closed-form generalized Hurst exponent of the binomial cascade:
/// `h(q) = 1/q - ln(p^q + (1-p)^q) / (q ln 2)`, with the analytic q -> 0
/// limit `-ln(p(1-p)) / (2 ln 2)`.
pub fn cascade_oracle(p: f64, q: f64) -> f64 {
    let ln2 = std::f64::consts::LN_2;
    if q.abs() < 1e-12 {
        return -(p * (1.0 - p)).ln() / (2.0 * ln2);
    }
    1.0 / q - (p.powf(q) + (1.0 - p).powf(q)).ln() / (q * ln2)
}

/// Theoretical fGn autocovariance at lag k (unit variance).
pub fn fgn_autocovariance(hurst: f64, k: usize) -> f64 {
    let k = k as f64;
    0.5 * ((k + 1.0).powf(2.0 * hurst) - 2.0 * k.powf(2.0 * hurst)
        + (k - 1.0).abs().powf(2.0 * hurst))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(model: SynthModel, n: usize, seed: u64) -> SynthSpec {
        SynthSpec::new(model, n, seed)
    }

    #[test]
    fn generation_is_deterministic() {
        let s = spec(SynthModel::Fgn { hurst: 0.7 }, 512, 3);
        let a = generate(&s).unwrap();
        let b = generate(&s).unwrap();
        assert_eq!(a.values(), b.values());
        let c = generate(&spec(SynthModel::Fgn { hurst: 0.7 }, 512, 4)).unwrap();
        assert_ne!(a.values(), c.values());
    }

    #[test]
    fn fgn_half_is_white_noise() {
        let n = 8192;
        let s = generate(&spec(SynthModel::Fgn { hurst: 0.5 }, n, 11)).unwrap();
        let v = s.values();
        let mean = v.iter().sum::<f64>() / n as f64;
        let var: f64 = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n as f64;
        let lag1: f64 = v
            .windows(2)
            .map(|w| (w[0] - mean) * (w[1] - mean))
            .sum::<f64>()
            / (n as f64 * var);
        assert!(lag1.abs() < 2.0 / (n as f64).sqrt(), "lag-1 {lag1}");
        assert!((var - 1.0).abs() < 0.1, "variance {var}");
    }

    #[test]
    fn fgn_matches_analytic_autocovariance() {
        // 200 members at N = 4096; ensemble-mean sample autocovariance must
        // sit within 3 ensemble standard errors of gamma(k) for k <= 10.
        let hurst = 0.7;
        let n = 4096;
        let members = 200;
        let mut acvs: Vec<Vec<f64>> = (0..11).map(|_| Vec::with_capacity(members)).collect();
        for seed in 0..members as u64 {
            let s = generate(&spec(SynthModel::Fgn { hurst }, n, 9000 + seed)).unwrap();
            let v = s.values();
            // The generator's true mean is zero; using the raw product
            // estimator keeps this unbiased (mean subtraction would shift
            // every lag down by Var(sample mean), which is O(n^{2H-2}) and
            // not negligible for long-range dependent data).
            for (k, acc) in acvs.iter_mut().enumerate() {
                let mut c = 0.0;
                for t in 0..(n - k) {
                    c += v[t] * v[t + k];
                }
                acc.push(c / (n - k) as f64);
            }
        }
        for (k, samples) in acvs.iter().enumerate() {
            let m = samples.iter().sum::<f64>() / samples.len() as f64;
            let var = samples.iter().map(|x| (x - m) * (x - m)).sum::<f64>()
                / (samples.len() - 1) as f64;
            let se = (var / samples.len() as f64).sqrt();
            let theory = fgn_autocovariance(hurst, k);
            assert!(
                (m - theory).abs() <= 3.0 * se,
                "lag {k}: mean {m} vs gamma {theory} (se {se})"
            );
        }
    }

    #[test]
    fn fgn_rejects_bad_hurst() {
        assert!(generate(&spec(SynthModel::Fgn { hurst: 1.0 }, 64, 1)).is_err());
        assert!(generate(&spec(SynthModel::Fgn { hurst: 0.0 }, 64, 1)).is_err());
    }

    #[test]
    fn cascade_conserves_mass_and_checks_length() {
        let s = generate(&spec(SynthModel::Cascade { p: 0.3, depth: 10 }, 1024, 5)).unwrap();
        let total: f64 = s.values().iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!(s.values().iter().all(|&v| v > 0.0));
        assert!(generate(&spec(SynthModel::Cascade { p: 0.3, depth: 10 }, 1000, 5)).is_err());
    }

    #[test]
    fn degenerate_cascade_is_flat() {
        let s = generate(&spec(SynthModel::Cascade { p: 0.5, depth: 8 }, 256, 5)).unwrap();
        let expected = 1.0 / 256.0;
        assert!(s.values().iter().all(|&v| (v - expected).abs() < 1e-15));
    }

    #[test]
    fn cascade_oracle_hand_values() {
        // p = 0.5: monofractal, h constant equal to 1.
        for q in [-4.0, -1.0, 0.0, 0.5, 2.0, 4.0] {
            assert!((cascade_oracle(0.5, q) - 1.0).abs() < 1e-12, "q={q}");
        }
        // p = 0.3, q = 2: 0.5 - log2(0.09 + 0.49)/2.
        let expected = 0.5 - (0.58f64).ln() / (2.0 * std::f64::consts::LN_2);
        assert!((cascade_oracle(0.3, 2.0) - expected).abs() < 1e-15);
        assert!((cascade_oracle(0.3, 2.0) - 0.8929).abs() < 1e-4);
        // q -> 0 limit agrees with nearby evaluations.
        let near = cascade_oracle(0.3, 1e-7);
        assert!((cascade_oracle(0.3, 0.0) - near).abs() < 1e-6);
    }

    #[test]
    fn cascade_oracle_nonincreasing_for_skewed_weights() {
        let mut q = -4.0;
        let mut prev = cascade_oracle(0.3, q);
        while q < 4.0 {
            q += 0.05;
            let h = cascade_oracle(0.3, q);
            assert!(h <= prev + 1e-12, "h increased at q={q}");
            prev = h;
        }
    }

    #[test]
    fn ar1_is_stationary_with_expected_autocorrelation() {
        let s = generate(&spec(
            SynthModel::Ar1 {
                phi: 0.8,
                sigma: 1.0,
            },
            20000,
            13,
        ))
        .unwrap();
        let v = s.values();
        let n = v.len();
        let mean = v.iter().sum::<f64>() / n as f64;
        let var: f64 = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n as f64;
        let lag1: f64 = v
            .windows(2)
            .map(|w| (w[0] - mean) * (w[1] - mean))
            .sum::<f64>()
            / (n as f64 * var);
        assert!((lag1 - 0.8).abs() < 0.03, "lag-1 {lag1}");
        assert!(generate(&spec(
            SynthModel::Ar1 {
                phi: 1.0,
                sigma: 1.0
            },
            10,
            1
        ))
        .is_err());
    }

    #[test]
    fn coupled_pair_has_requested_correlation_structure() {
        let s = spec(
            SynthModel::CoupledPair {
                beta: 0.5,
                noise_sd: 1.0,
            },
            20000,
            21,
        );
        let (x, y) = generate_pair(&s).unwrap();
        let xv = x.values();
        let yv = y.values();
        let n = xv.len() as f64;
        let mx = xv.iter().sum::<f64>() / n;
        let my = yv.iter().sum::<f64>() / n;
        let mut sxy = 0.0;
        let mut sxx = 0.0;
        let mut syy = 0.0;
        for (a, b) in xv.iter().zip(yv) {
            sxy += (a - mx) * (b - my);
            sxx += (a - mx) * (a - mx);
            syy += (b - my) * (b - my);
        }
        let corr = sxy / (sxx * syy).sqrt();
        // rho = beta / sqrt(beta^2 + 1) = 0.4472 at beta = 0.5, sd = 1.
        assert!((corr - 0.4472).abs() < 0.02, "corr {corr}");
        assert!(generate(&s).is_err(), "pair model must not yield one series");
    }

    #[test]
    fn logistic_map_stays_in_unit_interval() {
        let s = generate(&spec(SynthModel::LogisticMap { r: 4.0 }, 1000, 1)).unwrap();
        assert!(s.values().iter().all(|&v| (0.0..=1.0).contains(&v)));
        assert!(generate(&spec(SynthModel::LogisticMap { r: 4.1 }, 10, 1)).is_err());
    }
}
