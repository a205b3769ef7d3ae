//! Weak-form efficiency battery: Runs, Ljung-Box, Lo-MacKinlay variance
//! ratio, BDS, Mann-Kendall, and the DFA Hurst exponent, with a consolidated
//! report.
//!
//! Every test is a pure function of the series and its parameters, invariant
//! to affine rescaling of the input (BDS scales its threshold by the sample
//! standard deviation).

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::scaling::{dfa, ScaleGrid};
use crate::series::TimeSeries;

pub const DEFAULT_VR_HORIZONS: [usize; 4] = [2, 4, 8, 16];
pub const DEFAULT_BDS_DIMS: [usize; 4] = [2, 3, 4, 5];
pub const DEFAULT_BDS_EPS_FACTOR: f64 = 0.7;

fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).unwrap()
}

fn two_sided_p(z: f64) -> f64 {
    2.0 * (1.0 - std_normal().cdf(z.abs()))
}

fn check_variance(series: &TimeSeries, context: &str) -> Result<f64> {
    let v = series.values();
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    if var <= 0.0 {
        return Err(Error::ZeroVariance {
            label: series.label.clone(),
            context: context.into(),
        });
    }
    Ok(var)
}

/// Wald-Wolfowitz runs test about the median.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunsTest {
    pub runs: usize,
    pub n_above: usize,
    pub n_below: usize,
    pub z: f64,
    pub p_value: f64,
}

/// Dichotomize by sign of (value - median), count runs, and compare with the
/// Wald-Wolfowitz moments. Values equal to the median are skipped.
pub fn runs_test(series: &TimeSeries) -> Result<RunsTest> {
    let v = series.values();
    if v.len() < 20 {
        return Err(Error::InsufficientData {
            required: 20,
            actual: v.len(),
            context: "runs test normal approximation".into(),
        });
    }
    let mut sorted = v.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mid = sorted.len() / 2;
    let median = if sorted.len().is_multiple_of(2) {
        0.5 * (sorted[mid - 1] + sorted[mid])
    } else {
        sorted[mid]
    };
    let signs: Vec<bool> = v
        .iter()
        .filter(|&&x| x != median)
        .map(|&x| x > median)
        .collect();
    let n_above = signs.iter().filter(|&&s| s).count();
    let n_below = signs.len() - n_above;
    if n_above == 0 || n_below == 0 {
        return Err(Error::ZeroVariance {
            label: series.label.clone(),
            context: "runs test: no variation about the median".into(),
        });
    }
    let runs = 1 + signs.windows(2).filter(|w| w[0] != w[1]).count();
    let (n1, n2) = (n_above as f64, n_below as f64);
    let n = n1 + n2;
    let expected = 2.0 * n1 * n2 / n + 1.0;
    let variance = 2.0 * n1 * n2 * (2.0 * n1 * n2 - n) / (n * n * (n - 1.0));
    let z = (runs as f64 - expected) / variance.sqrt();
    Ok(RunsTest {
        runs,
        n_above,
        n_below,
        z,
        p_value: two_sided_p(z),
    })
}

/// Ljung-Box portmanteau test for autocorrelation up to `lags`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LjungBoxTest {
    pub lags: usize,
    pub autocorrelations: Vec<f64>,
    pub q_stat: f64,
    pub p_value: f64,
}

pub fn ljung_box(series: &TimeSeries, lags: usize) -> Result<LjungBoxTest> {
    let v = series.values();
    let n = v.len();
    if lags == 0 || n <= lags {
        return Err(Error::InvalidParameter {
            name: "lags",
            value: lags as f64,
            constraint: format!("need 1 <= lags < n = {n}"),
        });
    }
    check_variance(series, "Ljung-Box")?;
    let mean = v.iter().sum::<f64>() / n as f64;
    let denom: f64 = v.iter().map(|x| (x - mean) * (x - mean)).sum();
    let mut autocorrelations = Vec::with_capacity(lags);
    let mut q = 0.0;
    for k in 1..=lags {
        let num: f64 = (k..n).map(|t| (v[t] - mean) * (v[t - k] - mean)).sum();
        let r = num / denom;
        autocorrelations.push(r);
        q += r * r / (n - k) as f64;
    }
    let q_stat = (n as f64) * (n as f64 + 2.0) * q;
    let chi = ChiSquared::new(lags as f64).map_err(|e| Error::Numerical {
        context: format!("chi-squared({lags}): {e}"),
    })?;
    Ok(LjungBoxTest {
        lags,
        autocorrelations,
        q_stat,
        p_value: 1.0 - chi.cdf(q_stat),
    })
}

/// One horizon of the Lo-MacKinlay variance-ratio test.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VrHorizon {
    pub k: usize,
    pub vr: f64,
    pub z_homoskedastic: f64,
    pub z_heteroskedastic: f64,
    /// Two-sided p from the heteroskedasticity-robust statistic.
    pub p_value: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VarianceRatioTest {
    pub horizons: Vec<VrHorizon>,
    /// Smallest heteroskedasticity-robust p across horizons.
    pub min_p: f64,
    /// `min_p` scaled by the number of horizons (capped at 1).
    pub bonferroni_p: f64,
}

/// Lo-MacKinlay overlapping variance ratios of the increment series, with
/// the standard bias corrections and both the homoskedastic and the
/// heteroskedasticity-robust statistics.
pub fn variance_ratio(series: &TimeSeries, horizons: &[usize]) -> Result<VarianceRatioTest> {
    let x = series.values();
    let t = x.len();
    let k_max = horizons.iter().copied().max().unwrap_or(0);
    if k_max < 2 {
        return Err(Error::InvalidParameter {
            name: "horizons",
            value: k_max as f64,
            constraint: "need at least one horizon >= 2".into(),
        });
    }
    if t < 10 * k_max {
        return Err(Error::InsufficientData {
            required: 10 * k_max,
            actual: t,
            context: "variance ratio".into(),
        });
    }
    check_variance(series, "variance ratio")?;

    // Log-level path y with y_0 = 0; drift from its endpoints.
    let mut y = Vec::with_capacity(t + 1);
    y.push(0.0);
    let mut acc = 0.0;
    for &v in x {
        acc += v;
        y.push(acc);
    }
    let tf = t as f64;
    let mu = (y[t] - y[0]) / tf;
    let demeaned_sq: Vec<f64> = x.iter().map(|&v| (v - mu) * (v - mu)).collect();
    let sum_sq: f64 = demeaned_sq.iter().sum();
    let sigma_a = sum_sq / (tf - 1.0);

    let mut out = Vec::with_capacity(horizons.len());
    for &k in horizons {
        let kf = k as f64;
        let m = kf * (tf - kf + 1.0) * (1.0 - kf / tf);
        let mut num = 0.0;
        for t_i in k..=t {
            let d = y[t_i] - y[t_i - k] - kf * mu;
            num += d * d;
        }
        let sigma_c = num / m;
        let vr = sigma_c / sigma_a;

        let phi_homo = 2.0 * (2.0 * kf - 1.0) * (kf - 1.0) / (3.0 * kf * tf);
        let z_homo = (vr - 1.0) / phi_homo.sqrt();

        let mut phi_hetero = 0.0;
        for j in 1..k {
            let mut delta_num = 0.0;
            for t_i in j..t {
                delta_num += demeaned_sq[t_i] * demeaned_sq[t_i - j];
            }
            let delta = delta_num / (sum_sq * sum_sq);
            let w = 2.0 * (kf - j as f64) / kf;
            phi_hetero += w * w * delta;
        }
        let z_hetero = (vr - 1.0) / phi_hetero.sqrt();
        out.push(VrHorizon {
            k,
            vr,
            z_homoskedastic: z_homo,
            z_heteroskedastic: z_hetero,
            p_value: two_sided_p(z_hetero),
        });
    }
    let min_p = out.iter().map(|h| h.p_value).fold(f64::INFINITY, f64::min);
    Ok(VarianceRatioTest {
        bonferroni_p: (min_p * out.len() as f64).min(1.0),
        horizons: out,
        min_p,
    })
}

/// One embedding dimension of the BDS test.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BdsDim {
    pub m: usize,
    pub correlation_integral: f64,
    pub w: f64,
    pub p_value: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BdsTest {
    pub eps: f64,
    pub c1: f64,
    pub dims: Vec<BdsDim>,
    pub min_p: f64,
    pub bonferroni_p: f64,
}

/// Correlation-integral statistics by direct pair counting.
///
/// For every inter-point distance d the indicator sequence
/// `b_i = 1{|x_i - x_{i+d}| < eps}` is scanned once; a window of m
/// consecutive ones is exactly one embedded pair at dimension m. Returns,
/// per dimension m in `1..=max_dim`:
/// - the embedded pair counts over the full sample,
/// - dim-1 pair counts restricted to the last `n - m + 1` observations,
///
/// and the per-point neighbor counts used by the K statistic.
fn correlation_counts(
    x: &[f64],
    eps: f64,
    max_dim: usize,
) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let n = x.len();
    let mut pairs = vec![0.0f64; max_dim + 1]; // index by m, [0] unused
    let mut sub_pairs = vec![0.0f64; max_dim + 1]; // dim-1 pairs among x[m-1..]
    let mut neighbor = vec![0.0f64; n];
    for d in 1..n {
        let len = n - d;
        // run-length scan of the indicator diagonal
        let mut run = 0usize;
        for i in 0..len {
            let hit = (x[i] - x[i + d]).abs() < eps;
            if hit {
                run += 1;
                neighbor[i] += 1.0;
                neighbor[i + d] += 1.0;
                for (m, p) in pairs.iter_mut().enumerate().skip(1).take(max_dim) {
                    if run >= m {
                        *p += 1.0;
                    }
                }
                for (m, p) in sub_pairs.iter_mut().enumerate().skip(1).take(max_dim) {
                    if i + 1 >= m {
                        *p += 1.0;
                    }
                }
            } else {
                run = 0;
            }
        }
    }
    (pairs, sub_pairs, neighbor)
}

/// BDS test for serial dependence at embedding dimensions `dims` with
/// threshold `eps = eps_factor * sd(series)`.
pub fn bds_test(series: &TimeSeries, dims: &[usize], eps_factor: f64) -> Result<BdsTest> {
    let x = series.values();
    let n = x.len();
    if n < 200 {
        return Err(Error::InsufficientData {
            required: 200,
            actual: n,
            context: "BDS test".into(),
        });
    }
    let max_dim = dims.iter().copied().max().unwrap_or(0);
    if max_dim < 2 || dims.iter().any(|&m| m < 2) {
        return Err(Error::InvalidParameter {
            name: "dims",
            value: max_dim as f64,
            constraint: "embedding dimensions must be >= 2".into(),
        });
    }
    let var = check_variance(series, "BDS")?;
    let eps = eps_factor * var.sqrt();

    let (pairs, sub_pairs, neighbor) = correlation_counts(x, eps, max_dim);
    let nf = n as f64;
    let c1 = 2.0 * pairs[1] / (nf * (nf - 1.0));
    if c1 == 0.0 {
        return Err(Error::InvalidParameter {
            name: "eps_factor",
            value: eps_factor,
            constraint: "no pairs fall within eps; increase the factor".into(),
        });
    }
    // K statistic: probability that two neighbors share a common point.
    let k_stat: f64 =
        neighbor.iter().map(|&r| r * (r - 1.0)).sum::<f64>() / (nf * (nf - 1.0) * (nf - 2.0));

    let normal = std_normal();
    let mut out = Vec::with_capacity(dims.len());
    for &m in dims {
        let nm = (n - m + 1) as f64;
        let c_m = 2.0 * pairs[m] / (nm * (nm - 1.0));
        let c1_m = 2.0 * sub_pairs[m] / (nm * (nm - 1.0));

        let mf = m as f64;
        let mut sigma_sq = k_stat.powi(m as i32) + (mf - 1.0) * (mf - 1.0) * c1.powi(2 * m as i32)
            - mf * mf * k_stat * c1.powi(2 * (m as i32) - 2);
        for j in 1..m {
            sigma_sq += 2.0 * k_stat.powi((m - j) as i32) * c1.powi(2 * j as i32);
        }
        sigma_sq *= 4.0;
        if sigma_sq <= 0.0 {
            return Err(Error::Numerical {
                context: format!("BDS variance non-positive at m = {m}"),
            });
        }
        let w = nm.sqrt() * (c_m - c1_m.powi(m as i32)) / sigma_sq.sqrt();
        let p_value = 2.0 * (1.0 - normal.cdf(w.abs()));
        out.push(BdsDim {
            m,
            correlation_integral: c_m,
            w,
            p_value,
        });
    }
    let min_p = out.iter().map(|d| d.p_value).fold(f64::INFINITY, f64::min);
    Ok(BdsTest {
        eps,
        c1,
        bonferroni_p: (min_p * out.len() as f64).min(1.0),
        dims: out,
        min_p,
    })
}

/// Mann-Kendall trend test with tie correction and continuity correction.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MannKendallTest {
    pub s: i64,
    pub z: f64,
    pub p_value: f64,
}

pub fn mann_kendall(series: &TimeSeries) -> Result<MannKendallTest> {
    let v = series.values();
    let n = v.len();
    if n < 10 {
        return Err(Error::InsufficientData {
            required: 10,
            actual: n,
            context: "Mann-Kendall test".into(),
        });
    }
    let mut s: i64 = 0;
    for i in 0..n {
        for j in (i + 1)..n {
            s += match v[j].partial_cmp(&v[i]).unwrap() {
                std::cmp::Ordering::Greater => 1,
                std::cmp::Ordering::Less => -1,
                std::cmp::Ordering::Equal => 0,
            };
        }
    }
    // tie groups
    let mut sorted = v.to_vec();
    sorted.sort_by(f64::total_cmp);
    let nf = n as f64;
    let mut var = nf * (nf - 1.0) * (2.0 * nf + 5.0);
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && sorted[j] == sorted[i] {
            j += 1;
        }
        let t = (j - i) as f64;
        if t > 1.0 {
            var -= t * (t - 1.0) * (2.0 * t + 5.0);
        }
        i = j;
    }
    var /= 18.0;
    let (z, p_value) = if var <= 0.0 || s == 0 {
        (0.0, 1.0)
    } else {
        let sf = s as f64;
        let z = if s > 0 {
            (sf - 1.0) / var.sqrt()
        } else {
            (sf + 1.0) / var.sqrt()
        };
        (z, two_sided_p(z))
    };
    Ok(MannKendallTest { s, z, p_value })
}

/// One battery entry: the outcome or the in-place failure message.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TestEntry<T> {
    pub outcome: Option<T>,
    pub error: Option<String>,
    pub reject: bool,
}

impl<T> TestEntry<T> {
    fn from_result(res: Result<T>, p: impl Fn(&T) -> f64, alpha: f64) -> Self {
        match res {
            Ok(t) => {
                let reject = p(&t) < alpha;
                Self {
                    outcome: Some(t),
                    error: None,
                    reject,
                }
            }
            Err(e) => Self {
                outcome: None,
                error: Some(e.to_string()),
                reject: false,
            },
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DfaEntry {
    pub h2: f64,
    pub r_squared: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BatteryConfig {
    /// Ljung-Box lag; defaults to min(10, n/5).
    pub ljung_box_lags: Option<usize>,
    pub vr_horizons: Vec<usize>,
    pub bds_dims: Vec<usize>,
    pub bds_eps_factor: f64,
    /// Significance level for the per-test decisions.
    pub alpha: f64,
    pub detrend_order: usize,
    pub bidirectional: bool,
    /// DFA scale grid; `None` uses the 30..n/5 default.
    pub dfa_scales: Option<ScaleGrid>,
}

impl Default for BatteryConfig {
    fn default() -> Self {
        Self {
            ljung_box_lags: None,
            vr_horizons: DEFAULT_VR_HORIZONS.to_vec(),
            bds_dims: DEFAULT_BDS_DIMS.to_vec(),
            bds_eps_factor: DEFAULT_BDS_EPS_FACTOR,
            alpha: 0.05,
            detrend_order: 1,
            bidirectional: true,
            dfa_scales: None,
        }
    }
}

/// Consolidated battery output. `rejections` counts the p-valued tests that
/// reject at `alpha`; the DFA entry reports h(2) with its fit quality and has
/// no p-value.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TestReport {
    pub n: usize,
    pub alpha: f64,
    pub runs: TestEntry<RunsTest>,
    pub ljung_box: TestEntry<LjungBoxTest>,
    pub variance_ratio: TestEntry<VarianceRatioTest>,
    pub bds: TestEntry<BdsTest>,
    pub mann_kendall: TestEntry<MannKendallTest>,
    pub dfa: TestEntry<DfaEntry>,
    pub rejections: usize,
}

/// Run all six tests; individual failures land in their entries without
/// aborting the battery.
pub fn battery(series: &TimeSeries, config: &BatteryConfig) -> Result<TestReport> {
    let n = series.len();
    if n < 200 {
        return Err(Error::InsufficientData {
            required: 200,
            actual: n,
            context: "test battery".into(),
        });
    }
    let alpha = config.alpha;
    let lags = config.ljung_box_lags.unwrap_or_else(|| 10.min(n / 5).max(1));

    let runs = TestEntry::from_result(runs_test(series), |t: &RunsTest| t.p_value, alpha);
    let lb = TestEntry::from_result(
        ljung_box(series, lags),
        |t: &LjungBoxTest| t.p_value,
        alpha,
    );
    let vr = TestEntry::from_result(
        variance_ratio(series, &config.vr_horizons),
        |t: &VarianceRatioTest| t.min_p,
        alpha,
    );
    let bds = TestEntry::from_result(
        bds_test(series, &config.bds_dims, config.bds_eps_factor),
        |t: &BdsTest| t.min_p,
        alpha,
    );
    let mk = TestEntry::from_result(
        mann_kendall(series),
        |t: &MannKendallTest| t.p_value,
        alpha,
    );
    let dfa_entry = {
        let scales = match &config.dfa_scales {
            Some(s) => Ok(s.clone()),
            None => ScaleGrid::default_for_length(n),
        };
        let res = scales.and_then(|ss| {
            dfa(series, &ss, config.detrend_order, config.bidirectional).map(|d| DfaEntry {
                h2: d.h2,
                r_squared: d.r_squared,
            })
        });
        match res {
            Ok(d) => TestEntry {
                outcome: Some(d),
                error: None,
                reject: false,
            },
            Err(e) => TestEntry {
                outcome: None,
                error: Some(e.to_string()),
                reject: false,
            },
        }
    };

    let rejections = [runs.reject, lb.reject, vr.reject, bds.reject, mk.reject]
        .iter()
        .filter(|&&r| r)
        .count();
    Ok(TestReport {
        n,
        alpha,
        runs,
        ljung_box: lb,
        variance_ratio: vr,
        bds,
        mann_kendall: mk,
        dfa: dfa_entry,
        rejections,
    })
}
