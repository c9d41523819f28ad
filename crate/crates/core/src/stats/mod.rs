//! Nonparametric statistical battery.
//!
//! Everything here is distribution-free: runs about the median, the
//! Hodges-Lehmann location estimate, empirical distribution functions and
//! the two-sample Smirnov test, moment-based normality checks, Theil slope
//! regression and Spearman rank correlation. Exact small-sample
//! distributions are used below the documented cutoffs, large-sample
//! approximations above them.

mod ecdf;
mod location;
mod normality;
mod regression;
mod runs;

pub use ecdf::{smirnov_test, Ecdf};
pub use location::{hl_location, LocationEstimate};
pub use normality::{jarque_bera, jarque_bera_gel};
pub use regression::{spearman, theil_fit, TheilFit};
pub use runs::{runs_probabilities, runs_test, RunsResult};

pub(crate) fn standard_normal_cdf(z: f64) -> f64 {
    use statrs::distribution::ContinuousCDF;
    statrs::distribution::Normal::new(0.0, 1.0).unwrap().cdf(z)
}

/// Sample median (average of the two central order statistics for even n).
pub(crate) fn median_of(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}
