//! Waveform-length fractal dimension, Monte Carlo calibration and
//! significance testing of dimension differences.
//!
//! A series is embedded in the closed unit square (abscissa = sample index
//! scaled by its maximum, ordinate min-max scaled) and its polyline length
//! `L` gives the dimension estimate
//!
//! ```text
//! D_s = 1 + (ln L - ln 2) / ln(2 N')          N' = N - 1
//! ```
//!
//! with variance
//!
//! ```text
//! var(D_s) = N' / (L^2 ln^2(2 N')) * sum_i (dl_i - mean dl)^2 / N'
//! ```
//!
//! over the segment lengths `dl_i`. `D_s` converges to the
//! Hausdorff-Besicovitch dimension only as `N -> infinity`, so at finite `N`
//! an observed estimate is compared against Monte Carlo ensembles of known
//! noises *at the same N*, never against the asymptotic values. Significance
//! of a difference uses the Vysochanskij-Petunin inequality, which needs
//! nothing beyond unimodality and finite variance.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noise::{brownian_noise, white_noise, NoiseKind, NoiseSpec};
use crate::series::TimeSeries;

/// `sqrt(8/3)`: below this ratio the inequality gives only the bound
/// 1/6 <= P <= 1.
pub const LAMBDA_COROLLARY: f64 = 1.632993161855452;

/// `sqrt(40/9)`: one-tailed threshold for significance at alpha = 0.05.
pub const LAMBDA_ALPHA_05: f64 = 2.1081851067789197;

/// Series embedded in the closed unit square.
#[derive(Debug, Clone)]
pub struct UnitSquareCurve {
    pub xstar: Vec<f64>,
    pub ystar: Vec<f64>,
    /// Total polyline length.
    pub length: f64,
    /// Per-segment lengths (distance between consecutive embedded points).
    pub segment_lengths: Vec<f64>,
    /// Constant input: the ordinate scaling is undefined, the curve is a
    /// horizontal line.
    pub degenerate: bool,
}

/// Dimension estimate for one curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FractalEstimate {
    pub d_s: f64,
    pub var_ds: f64,
    pub n: usize,
    pub n_prime: usize,
    pub length: f64,
    pub degenerate: bool,
}

/// Embed a series in the unit square: `x*_i = x_i / x_max` with `x_i = i`,
/// `y*_i = (y_i - y_min)/(y_max - y_min)`.
pub fn embed_unit_square(series: &TimeSeries) -> Result<UnitSquareCurve> {
    let n = series.len();
    if n < 2 {
        return Err(Error::InvalidParameter(
            "embedding needs at least 2 points".into(),
        ));
    }
    if series.has_missing() {
        return Err(Error::InvalidParameter(format!(
            "series '{}' still contains missing values",
            series.label
        )));
    }
    let x_max = (n - 1) as f64;
    let xstar: Vec<f64> = (0..n).map(|i| i as f64 / x_max).collect();

    let (mut y_min, mut y_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for &v in &series.values {
        y_min = y_min.min(v);
        y_max = y_max.max(v);
    }
    if y_max == y_min {
        // constant series: a line of length 1 with no vertical excursion
        let ystar = vec![0.0; n];
        let segment_lengths: Vec<f64> = xstar.windows(2).map(|w| w[1] - w[0]).collect();
        return Ok(UnitSquareCurve {
            xstar,
            ystar,
            length: 1.0,
            segment_lengths,
            degenerate: true,
        });
    }

    let range = y_max - y_min;
    let ystar: Vec<f64> = series.values.iter().map(|&v| (v - y_min) / range).collect();
    let mut segment_lengths = Vec::with_capacity(n - 1);
    let mut length = 0.0;
    for i in 1..n {
        let dx = xstar[i] - xstar[i - 1];
        let dy = ystar[i] - ystar[i - 1];
        let dl = (dx * dx + dy * dy).sqrt();
        segment_lengths.push(dl);
        length += dl;
    }
    Ok(UnitSquareCurve {
        xstar,
        ystar,
        length,
        segment_lengths,
        degenerate: false,
    })
}

/// Dimension and its variance from an embedded curve.
pub fn sevcik_dimension(curve: &UnitSquareCurve) -> Result<FractalEstimate> {
    let n = curve.xstar.len();
    let n_prime = n - 1;
    if curve.degenerate {
        // a constant is a line
        return Ok(FractalEstimate {
            d_s: 1.0,
            var_ds: 0.0,
            n,
            n_prime,
            length: curve.length,
            degenerate: true,
        });
    }
    if n < 3 {
        return Err(Error::InvalidParameter(
            "variance needs at least 3 points".into(),
        ));
    }
    let length = curve.length;
    if !(length > 0.0) {
        return Err(Error::Degenerate("curve has zero length".into()));
    }
    let log_2n = (2.0 * n_prime as f64).ln();
    let d_s = 1.0 + (length.ln() - std::f64::consts::LN_2) / log_2n;

    let mean = length / n_prime as f64;
    let ss: f64 = curve
        .segment_lengths
        .iter()
        .map(|dl| (dl - mean) * (dl - mean))
        .sum();
    let var_ds = ss / (length * length * log_2n * log_2n);

    Ok(FractalEstimate {
        d_s,
        var_ds,
        n,
        n_prime,
        length,
        degenerate: false,
    })
}

/// Embed and estimate in one step.
///
/// ```
/// use walkscan_core::fractal::estimate;
/// use walkscan_core::TimeSeries;
///
/// let line = TimeSeries::synthetic("line", (0..100).map(f64::from).collect());
/// let saw = TimeSeries::synthetic("saw", (0..100).map(|i| f64::from(i % 2)).collect());
/// assert!(estimate(&saw).unwrap().d_s > estimate(&line).unwrap().d_s);
/// ```
pub fn estimate(series: &TimeSeries) -> Result<FractalEstimate> {
    sevcik_dimension(&embed_unit_square(series)?)
}

/// Monte Carlo reference ensemble: M simulated traces of N points, their
/// per-trace estimates and the pooled dispersion.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CalibrationEnsemble {
    pub kind: NoiseKind,
    pub m: usize,
    pub n: usize,
    pub master_seed: u64,
    pub stream_base: u64,
    /// Per-trace dimension estimates, in stream order.
    pub estimates: Vec<f64>,
    /// Per-trace variances from the segment-length formula.
    pub trace_variances: Vec<f64>,
    pub mean_ds: f64,
    /// Between-trace variance, M-1 denominator.
    pub var_between: f64,
    /// Between-trace variance plus the mean within-trace variance.
    pub var_total: f64,
}

impl CalibrationEnsemble {
    /// Assemble the summary statistics from raw per-trace results.
    pub fn from_traces(
        kind: NoiseKind,
        n: usize,
        master_seed: u64,
        stream_base: u64,
        estimates: Vec<f64>,
        trace_variances: Vec<f64>,
    ) -> Result<Self> {
        let m = estimates.len();
        if m < 2 {
            return Err(Error::InvalidParameter("ensemble needs M >= 2".into()));
        }
        if trace_variances.len() != m {
            return Err(Error::InvalidParameter(
                "estimates and variances must have equal length".into(),
            ));
        }
        let mean_ds = estimates.iter().sum::<f64>() / m as f64;
        let var_between = estimates
            .iter()
            .map(|d| (d - mean_ds) * (d - mean_ds))
            .sum::<f64>()
            / (m as f64 - 1.0);
        let mean_within = trace_variances.iter().sum::<f64>() / m as f64;
        Ok(CalibrationEnsemble {
            kind,
            m,
            n,
            master_seed,
            stream_base,
            estimates,
            trace_variances,
            mean_ds,
            var_between,
            var_total: var_between + mean_within,
        })
    }
}

/// Run the reference simulation: trace `k` always draws from stream
/// `stream_base + k`, so the result does not depend on scheduling.
pub fn calibrate(
    kind: NoiseKind,
    m: usize,
    n: usize,
    master_seed: u64,
    stream_base: u64,
) -> Result<CalibrationEnsemble> {
    if m < 2 {
        return Err(Error::InvalidParameter("calibrate needs M >= 2".into()));
    }
    if n < 3 {
        return Err(Error::InvalidParameter("calibrate needs N >= 3".into()));
    }
    let results: Vec<FractalEstimate> = (0..m)
        .into_par_iter()
        .map(|k| {
            let spec = NoiseSpec::gaussian(kind, n, master_seed, stream_base + k as u64);
            let trace = match kind {
                NoiseKind::White => white_noise(&spec),
                NoiseKind::Brownian => brownian_noise(&spec),
            }?;
            estimate(&trace)
        })
        .collect::<Result<Vec<_>>>()?;

    let estimates = results.iter().map(|e| e.d_s).collect();
    let variances = results.iter().map(|e| e.var_ds).collect();
    CalibrationEnsemble::from_traces(kind, n, master_seed, stream_base, estimates, variances)
}

/// Anything that carries a mean dimension and a variance for it.
pub trait DimensionSummary {
    fn ds_mean(&self) -> f64;
    fn ds_variance(&self) -> f64;
}

impl DimensionSummary for FractalEstimate {
    fn ds_mean(&self) -> f64 {
        self.d_s
    }
    fn ds_variance(&self) -> f64 {
        self.var_ds
    }
}

impl DimensionSummary for CalibrationEnsemble {
    fn ds_mean(&self) -> f64 {
        self.mean_ds
    }
    fn ds_variance(&self) -> f64 {
        self.var_total
    }
}

/// Outcome of a Vysochanskij-Petunin comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    /// The inequality applies; `epsilon = 4/(9 lambda^2)` bounds the
    /// probability that the difference arose by chance.
    Significant { epsilon: f64 },
    /// `lambda <= sqrt(8/3)`: only the bound 1/6 <= P <= 1 is available.
    Bounded,
}

/// Difference between two dimension summaries in dispersion units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignificanceResult {
    /// |mean_a - mean_b|.
    pub delta: f64,
    /// sqrt(var_a + var_b).
    pub s_delta: f64,
    /// delta / s_delta.
    pub lambda: f64,
    #[serde(flatten)]
    pub verdict: Verdict,
}

impl SignificanceResult {
    /// One-tailed significance at level `alpha`: requires the theorem to
    /// apply and `lambda >= sqrt(2/(9 alpha))` (2.108... at alpha = 0.05).
    pub fn significant_at(&self, alpha: f64) -> bool {
        match self.verdict {
            Verdict::Bounded => false,
            Verdict::Significant { .. } => self.lambda >= (2.0 / (9.0 * alpha)).sqrt(),
        }
    }
}

/// Compare two mean/variance summaries.
pub fn compare_ds_values(
    mean_a: f64,
    var_a: f64,
    mean_b: f64,
    var_b: f64,
) -> Result<SignificanceResult> {
    if var_a < 0.0 || var_b < 0.0 {
        return Err(Error::InvalidParameter("negative variance".into()));
    }
    let delta = (mean_a - mean_b).abs();
    let combined = var_a + var_b;
    if combined == 0.0 {
        if delta > 0.0 {
            return Err(Error::Degenerate("no dispersion".into()));
        }
        return Ok(SignificanceResult {
            delta: 0.0,
            s_delta: 0.0,
            lambda: 0.0,
            verdict: Verdict::Bounded,
        });
    }
    let s_delta = combined.sqrt();
    let lambda = delta / s_delta;
    let verdict = if lambda > LAMBDA_COROLLARY {
        Verdict::Significant {
            epsilon: 4.0 / (9.0 * lambda * lambda),
        }
    } else {
        Verdict::Bounded
    };
    Ok(SignificanceResult {
        delta,
        s_delta,
        lambda,
        verdict,
    })
}

/// Compare two estimates or ensembles (any mix).
pub fn compare_ds<A, B>(a: &A, b: &B) -> Result<SignificanceResult>
where
    A: DimensionSummary + ?Sized,
    B: DimensionSummary + ?Sized,
{
    compare_ds_values(a.ds_mean(), a.ds_variance(), b.ds_mean(), b.ds_variance())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::Innovation;

    const SEED: u64 = 20260810;

    #[test]
    fn lambda_constants_match_closed_forms() {
        assert_eq!(LAMBDA_COROLLARY, (8.0f64 / 3.0).sqrt());
        assert_eq!(LAMBDA_ALPHA_05, (40.0f64 / 9.0).sqrt());
    }

    #[test]
    fn two_point_diagonal() {
        let s = TimeSeries::synthetic("d", vec![0.0, 1.0]);
        let curve = embed_unit_square(&s).unwrap();
        assert_eq!(curve.xstar, vec![0.0, 1.0]);
        assert_eq!(curve.ystar, vec![0.0, 1.0]);
        assert!((curve.length - std::f64::consts::SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn affine_rescale_leaves_curve_unchanged() {
        let s = TimeSeries::synthetic("w", vec![3.0, -1.0, 4.0, 1.0, 5.0, 9.0, 2.0, 6.0]);
        let scaled = TimeSeries::synthetic(
            "w2",
            s.values.iter().map(|v| 2.5 * v + 17.0).collect::<Vec<_>>(),
        );
        let a = embed_unit_square(&s).unwrap();
        let b = embed_unit_square(&scaled).unwrap();
        for (x, y) in a.ystar.iter().zip(&b.ystar) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn sawtooth_length_matches_polyline_oracle() {
        let n = 1001;
        let values: Vec<f64> = (0..n).map(|i| (i % 2) as f64).collect();
        let s = TimeSeries::synthetic("saw", values.clone());
        let curve = embed_unit_square(&s).unwrap();

        // independent brute-force polyline length over the embedded points
        let x_max = (n - 1) as f64;
        let mut oracle = 0.0;
        for i in 1..n {
            let dx = (i as f64 - (i - 1) as f64) / x_max;
            let dy = values[i] - values[i - 1]; // range is already 1
            oracle += (dx * dx + dy * dy).sqrt();
        }
        assert!((curve.length - oracle).abs() < 1e-9);
    }

    #[test]
    fn straight_line_dimension() {
        let n = 1329;
        let s = TimeSeries::synthetic("line", (0..n).map(|i| i as f64).collect());
        let est = estimate(&s).unwrap();
        let expected = 1.0
            + (std::f64::consts::SQRT_2.ln() - std::f64::consts::LN_2)
                / ((2.0 * (n as f64 - 1.0)).ln());
        assert!((est.d_s - expected).abs() < 1e-12);
        assert!((est.d_s - 0.9560).abs() < 1e-3);
        assert!(est.var_ds < 1e-25); // all segments equal
    }

    #[test]
    fn constant_series_degenerates_to_line() {
        let s = TimeSeries::synthetic("c", vec![42.0; 100]);
        let est = estimate(&s).unwrap();
        assert!(est.degenerate);
        assert_eq!(est.d_s, 1.0);
        assert_eq!(est.var_ds, 0.0);
    }

    #[test]
    fn white_trace_dimension_near_published_value() {
        let spec = NoiseSpec::gaussian(NoiseKind::White, 10_000, SEED, 0);
        let est = estimate(&white_noise(&spec).unwrap()).unwrap();
        assert!(
            est.d_s > 1.64 && est.d_s < 1.69,
            "white N=1e4 D_s = {}",
            est.d_s
        );
    }

    #[test]
    fn brownian_trace_dimension_near_published_value() {
        let spec = NoiseSpec::gaussian(NoiseKind::Brownian, 10_000, SEED, 20);
        let est = estimate(&brownian_noise(&spec).unwrap()).unwrap();
        assert!(
            est.d_s > 1.27 && est.d_s < 1.38,
            "brownian N=1e4 D_s = {}",
            est.d_s
        );
    }

    #[test]
    fn scaling_leaves_dimension_unchanged() {
        let spec = NoiseSpec {
            innovation: Innovation::Gaussian { sigma: 1.0 },
            ..NoiseSpec::gaussian(NoiseKind::White, 2000, SEED, 1)
        };
        let trace = white_noise(&spec).unwrap();
        let scaled = TimeSeries::synthetic(
            "s",
            trace.values.iter().map(|v| v * 1e-4).collect::<Vec<_>>(),
        );
        let a = estimate(&trace).unwrap();
        let b = estimate(&scaled).unwrap();
        assert!((a.d_s - b.d_s).abs() < 1e-12);
    }

    #[test]
    fn reversal_leaves_dimension_unchanged() {
        let spec = NoiseSpec::gaussian(NoiseKind::Brownian, 1500, SEED, 2);
        let trace = brownian_noise(&spec).unwrap();
        let mut rev = trace.values.clone();
        rev.reverse();
        let a = estimate(&trace).unwrap();
        let b = estimate(&TimeSeries::synthetic("r", rev)).unwrap();
        assert!((a.d_s - b.d_s).abs() < 1e-12);
    }

    #[test]
    fn sawtooth_rougher_than_line() {
        let n = 500;
        let saw = TimeSeries::synthetic("saw", (0..n).map(|i| (i % 2) as f64).collect());
        let line = TimeSeries::synthetic("line", (0..n).map(|i| i as f64).collect());
        assert!(estimate(&saw).unwrap().d_s > estimate(&line).unwrap().d_s);
    }

    #[test]
    fn calibrate_white_matches_published_table() {
        let ens = calibrate(NoiseKind::White, 100, 1329, SEED, 0).unwrap();
        assert!(
            (ens.mean_ds - 1.598).abs() < 0.015,
            "white mean {}",
            ens.mean_ds
        );
        let sd = ens.var_total.sqrt();
        assert!(sd > 0.005 && sd < 0.02, "white sd {sd}");
    }

    #[test]
    fn calibrate_brownian_matches_published_table() {
        let ens = calibrate(NoiseKind::Brownian, 100, 1329, SEED, 100).unwrap();
        assert!(
            (ens.mean_ds - 1.289).abs() < 0.05,
            "brownian mean {}",
            ens.mean_ds
        );
    }

    #[test]
    fn calibrate_is_deterministic() {
        let a = calibrate(NoiseKind::White, 8, 500, SEED, 0).unwrap();
        let b = calibrate(NoiseKind::White, 8, 500, SEED, 0).unwrap();
        assert_eq!(a.estimates, b.estimates);
        assert_eq!(a.mean_ds, b.mean_ds);
        // single-threaded run must agree with the default pool
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let c = pool.install(|| calibrate(NoiseKind::White, 8, 500, SEED, 0).unwrap());
        assert_eq!(a.estimates, c.estimates);
    }

    #[test]
    fn ensemble_mean_is_arithmetic_mean() {
        let ens = calibrate(NoiseKind::White, 10, 300, SEED, 0).unwrap();
        let mean = ens.estimates.iter().sum::<f64>() / ens.m as f64;
        assert!((ens.mean_ds - mean).abs() < 1e-12);
        assert!(ens.var_total >= ens.var_between);
        assert!(ens.var_between >= 0.0);
    }

    #[test]
    fn forced_identical_traces_have_zero_between_variance() {
        let est =
            estimate(&white_noise(&NoiseSpec::gaussian(NoiseKind::White, 200, SEED, 5)).unwrap())
                .unwrap();
        let ens = CalibrationEnsemble::from_traces(
            NoiseKind::White,
            200,
            SEED,
            5,
            vec![est.d_s, est.d_s],
            vec![est.var_ds, est.var_ds],
        )
        .unwrap();
        assert_eq!(ens.var_between, 0.0);
        assert!((ens.var_total - est.var_ds).abs() < 1e-18);
    }

    #[test]
    fn published_inpatient_walk_comparison_stays_bounded() {
        // summary values of the inpatient curve vs its rebuilt walk
        let r =
            compare_ds_values(1.33922, 0.00382f64.powi(2), 1.33806, 0.00320f64.powi(2)).unwrap();
        assert!(matches!(r.verdict, Verdict::Bounded));
        assert!(r.lambda < LAMBDA_COROLLARY);
    }

    #[test]
    fn equal_summaries_are_bounded() {
        let r = compare_ds_values(1.5, 0.01, 1.5, 0.01).unwrap();
        assert_eq!(r.lambda, 0.0);
        assert!(matches!(r.verdict, Verdict::Bounded));
    }

    #[test]
    fn zero_dispersion_with_difference_errors() {
        let err = compare_ds_values(1.5, 0.0, 1.6, 0.0).unwrap_err();
        assert!(err.is_degeneracy());
    }

    #[test]
    fn comparison_is_symmetric() {
        let a = compare_ds_values(1.59, 0.0001, 1.29, 0.0015).unwrap();
        let b = compare_ds_values(1.29, 0.0015, 1.59, 0.0001).unwrap();
        assert_eq!(a.lambda, b.lambda);
        assert_eq!(a.verdict, b.verdict);
    }

    #[test]
    fn white_vs_brownian_ensembles_significant() {
        let white = calibrate(NoiseKind::White, 100, 1329, SEED, 0).unwrap();
        let brownian = calibrate(NoiseKind::Brownian, 100, 1329, SEED, 100).unwrap();
        let r = compare_ds(&white, &brownian).unwrap();
        assert!(r.lambda > LAMBDA_ALPHA_05, "lambda {}", r.lambda);
        assert!(r.significant_at(0.05));
        match r.verdict {
            Verdict::Significant { epsilon } => assert!(epsilon <= 0.01, "epsilon {epsilon}"),
            Verdict::Bounded => panic!("expected significance"),
        }
    }

    #[test]
    fn mixed_estimate_vs_ensemble_compare() {
        let ens = calibrate(NoiseKind::Brownian, 20, 800, SEED, 50).unwrap();
        let trace =
            brownian_noise(&NoiseSpec::gaussian(NoiseKind::Brownian, 800, SEED, 999)).unwrap();
        let est = estimate(&trace).unwrap();
        let r = compare_ds(&est, &ens).unwrap();
        // a brownian trace should not be flagged against the brownian ruler
        assert!(!r.significant_at(0.05), "lambda {}", r.lambda);
    }
}
