//! Random-walk detection in daily operational time series.
//!
//! A hospital census that drifts between full and half-empty looks like
//! seasonality or mismanagement; often it is neither, just a random walk
//! driven by the day-to-day imbalance between arrivals and departures. This
//! crate implements the analysis chain that tells those cases apart:
//!
//! * [`ingest`]: load daily exports, repair known artefacts, build the
//!   difference and reconstructed-walk series.
//! * [`rng`]: reproducible MT19937 substrate with per-trace streams.
//! * [`noise`]: white/Brownian reference generators and the Cauchy
//!   distribution.
//! * [`fractal`]: waveform-length dimension estimates, Monte Carlo
//!   calibration at matched length, Vysochanskij-Petunin comparisons.
//! * [`stats`]: the nonparametric battery (runs, Hodges-Lehmann, Smirnov,
//!   normality, Theil, Spearman).
//! * [`spectral`]: windowed radix-2 FFT spectral density and its log-log
//!   slope.
//! * [`pipeline`]: the end-to-end report, bit-reproducible given
//!   `(input, config, seed)`.
//!
//! All analysis functions are pure; parallel calibration assigns one RNG
//! stream per trace so results do not depend on scheduling.
//!
//! ```
//! use walkscan_core::fractal::{calibrate, compare_ds, estimate};
//! use walkscan_core::noise::{brownian_noise, NoiseKind, NoiseSpec};
//!
//! // a fresh random walk, and the white-noise ruler at the same length
//! let walk = brownian_noise(&NoiseSpec::gaussian(NoiseKind::Brownian, 500, 42, 900)).unwrap();
//! let ruler = calibrate(NoiseKind::White, 20, 500, 42, 0).unwrap();
//! let verdict = compare_ds(&estimate(&walk).unwrap(), &ruler).unwrap();
//! assert!(verdict.significant_at(0.05)); // a walk is not white noise
//! ```

// parameter checks use the negated form (`!(x > 0.0)`) so NaN is rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fractal;
pub mod ingest;
pub mod noise;
pub mod pipeline;
pub mod rng;
pub mod series;
pub mod spectral;
pub mod stats;
pub mod synthetic;

pub use error::{Error, Result};
pub use series::{TimeSeries, MISSING};
