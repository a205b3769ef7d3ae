//! Multifractal time-series analysis toolkit.
//!
//! The crate covers the full pipeline used in econophysics studies of market
//! efficiency and cross-market linkage:
//!
//! - [`ingest`]: log returns, volume changes, timestamp alignment, CSV I/O.
//! - [`scaling`]: the (MF-)DFA / (MF-)DCCA engine — profiles, segmentation,
//!   polynomial detrending, q-order fluctuation surfaces, scaling fits.
//! - [`multifractal`]: mass exponents, Legendre spectra, multifractality
//!   widths, the market deficiency measure, and shuffle/surrogate source
//!   attribution.
//! - [`dcca`]: the scale-dependent DCCA correlation coefficient with
//!   Monte-Carlo significance bands.
//! - [`surrogates`]: seeded shuffles and IAAFT surrogates.
//! - [`rwtests`]: a weak-form efficiency battery (Runs, Ljung-Box, variance
//!   ratio, BDS, Mann-Kendall, DFA Hurst).
//! - [`synth`]: ground-truth generators (fGn, binomial cascades, AR/MA,
//!   coupled pairs) with closed-form exponent oracles.
//! - [`pipeline`]: config-driven end-to-end runs producing table- and
//!   figure-shaped outputs.
//!
//! All randomized procedures are deterministic given a master seed and
//! independent of worker count.

pub mod dcca;
pub mod error;
pub mod ingest;
pub mod multifractal;
pub mod pipeline;
pub mod polyfit;
pub mod rwtests;
pub mod scaling;
pub mod seeds;
pub mod series;
pub mod surrogates;
pub mod synth;

pub use error::{Error, Result};
pub use series::{AlignedPair, SeriesKind, TimeSeries};
