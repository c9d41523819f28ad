//! Runs about the median (Wald-Wolfowitz).
//!
//! Points equal to the median are discarded; a run is a maximal block of
//! consecutive points on the same side. Too few runs signal clustering or
//! dependence. Three probabilities are reported for the observed count `r`
//! given the side totals `(a, b)`:
//!
//! * `p_rrd`   - P(R = r), the probability of the observed run count under a
//!   random arrangement. This is the figure quoted next to run-count plots.
//! * `p_fewer` - P(R <= r), the one-tailed probability toward clustering.
//! * `p_more`  - P(R >= r), the tail toward alternation excess.
//!
//! The exact conditional distribution is used for `n_used <= 60`, the
//! normal approximation with continuity correction above.

use serde::{Deserialize, Serialize};

use super::{median_of, standard_normal_cdf};
use crate::error::{Error, Result};

const EXACT_LIMIT: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunsResult {
    pub n_used: usize,
    pub n_above: usize,
    pub n_below: usize,
    pub n_runs: usize,
    /// P(R = n_runs).
    pub p_rrd: f64,
    /// P(R <= n_runs), one-tailed toward too few runs.
    pub p_fewer: f64,
    /// P(R >= n_runs), one-tailed toward too many runs.
    pub p_more: f64,
}

/// Exact binomial coefficient; fits in u128 for n <= 120.
fn binom(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 1..=k {
        c = c * (n - k + i) as u128 / i as u128;
    }
    c
}

/// P(R = r | a above, b below), exact.
fn runs_pmf(a: u64, b: u64, r: u64) -> f64 {
    let max_runs = 2 * a.min(b) + u64::from(a != b);
    if r < 2 || r > max_runs {
        return 0.0;
    }
    let total = binom(a + b, a) as f64;
    if r.is_multiple_of(2) {
        let k = r / 2;
        2.0 * (binom(a - 1, k - 1) * binom(b - 1, k - 1)) as f64 / total
    } else {
        let k = (r - 1) / 2;
        (binom(a - 1, k - 1) * binom(b - 1, k) + binom(a - 1, k) * binom(b - 1, k - 1)) as f64
            / total
    }
}

fn exact_probabilities(a: u64, b: u64, r: u64) -> (f64, f64, f64) {
    let max_runs = 2 * a.min(b) + u64::from(a != b);
    let point = runs_pmf(a, b, r);
    let fewer: f64 = (2..=r.min(max_runs)).map(|rr| runs_pmf(a, b, rr)).sum();
    let more: f64 = (r..=max_runs).map(|rr| runs_pmf(a, b, rr)).sum();
    (point, fewer.min(1.0), more.min(1.0))
}

fn normal_probabilities(a: u64, b: u64, r: u64) -> (f64, f64, f64) {
    let n = (a + b) as f64;
    let (af, bf) = (a as f64, b as f64);
    let mu = 1.0 + 2.0 * af * bf / n;
    let var = 2.0 * af * bf * (2.0 * af * bf - n) / (n * n * (n - 1.0));
    let sd = var.sqrt();
    let rf = r as f64;
    let lower = standard_normal_cdf((rf - mu + 0.5) / sd);
    let upper = 1.0 - standard_normal_cdf((rf - mu - 0.5) / sd);
    ((lower + upper - 1.0).max(0.0), lower, upper)
}

/// Run-count probabilities for given side totals, without touching data.
/// Exact when `a + b <= 60`, normal approximation with continuity
/// correction otherwise. Returns `(p_rrd, p_fewer, p_more)`.
pub fn runs_probabilities(n_above: usize, n_below: usize, n_runs: usize) -> (f64, f64, f64) {
    if n_above == 0 || n_below == 0 {
        // only one arrangement exists
        return (1.0, 1.0, 1.0);
    }
    let (a, b, r) = (n_above as u64, n_below as u64, n_runs as u64);
    if n_above + n_below <= EXACT_LIMIT {
        exact_probabilities(a, b, r)
    } else {
        normal_probabilities(a, b, r)
    }
}

/// ```
/// use walkscan_core::stats::runs_test;
///
/// // four points below the median, then four above: two runs, clustered
/// let r = runs_test(&[1.0, 2.0, 1.5, 1.2, 8.0, 9.0, 8.5, 9.2]).unwrap();
/// assert_eq!(r.n_runs, 2);
/// assert!(r.p_fewer < 0.05);
/// ```
pub fn runs_test(values: &[f64]) -> Result<RunsResult> {
    let median = median_of(values);
    let sides: Vec<bool> = values
        .iter()
        .filter(|v| **v != median)
        .map(|v| *v > median)
        .collect();
    let n_used = sides.len();
    if n_used == 0 {
        return Err(Error::Degenerate("no off-median points".into()));
    }
    if n_used < 2 {
        return Err(Error::InvalidParameter(
            "runs test needs at least 2 off-median points".into(),
        ));
    }
    let n_above = sides.iter().filter(|s| **s).count();
    let n_below = n_used - n_above;
    let n_runs = 1 + sides.windows(2).filter(|w| w[0] != w[1]).count();
    let (p_rrd, p_fewer, p_more) = runs_probabilities(n_above, n_below, n_runs);

    Ok(RunsResult {
        n_used,
        n_above,
        n_below,
        n_runs,
        p_rrd,
        p_fewer,
        p_more,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Balanced-split sequence with exactly `r` runs: `h = ceil(r/2)` high
    /// blocks and `l = floor(r/2)` low blocks, extra mass in the first block
    /// of each side. Values straddle zero so the sample median (a == b)
    /// touches no point.
    fn arrangement(a: usize, b: usize, r: usize) -> Vec<f64> {
        let h = r.div_ceil(2);
        let l = r / 2;
        assert!(h <= a && l <= b && r >= 2);
        let mut out = Vec::with_capacity(a + b);
        for i in 0..r {
            if i % 2 == 0 {
                let size = if i == 0 { a - (h - 1) } else { 1 };
                out.extend(std::iter::repeat_n(10.0, size));
            } else {
                let size = if i == 1 { b - (l - 1) } else { 1 };
                out.extend(std::iter::repeat_n(-10.0, size));
            }
        }
        out
    }

    #[test]
    fn counts_runs_and_sides() {
        // median of [1..6] = 3.5; sides: - - - + + +  -> 2 runs
        let r = runs_test(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        assert_eq!(r.n_used, 6);
        assert_eq!(r.n_above, 3);
        assert_eq!(r.n_below, 3);
        assert_eq!(r.n_runs, 2);
    }

    #[test]
    fn drops_points_equal_to_median() {
        let r = runs_test(&[1.0, 2.0, 2.0, 2.0, 3.0]).unwrap();
        // median 2; only 1 and 3 remain
        assert_eq!(r.n_used, 2);
        assert_eq!(r.n_runs, 2);
    }

    #[test]
    fn degenerate_all_at_median() {
        assert!(runs_test(&[5.0; 8]).unwrap_err().is_degeneracy());
    }

    // Frozen values from the exact conditional distribution.
    #[test]
    fn exact_point_probabilities() {
        assert!((runs_pmf(11, 11, 11) - 0.150036).abs() < 1e-6);
        assert!((runs_pmf(11, 11, 8) - 0.040826).abs() < 1e-6);
        assert!((runs_pmf(11, 12, 5) - 0.000772884).abs() < 1e-9);
        assert!((runs_pmf(11, 12, 10) - 0.102509).abs() < 1e-6);
    }

    #[test]
    fn exact_left_tails() {
        assert!((exact_probabilities(11, 11, 11).1 - 0.409979).abs() < 1e-6);
        assert!((exact_probabilities(11, 11, 8).1 - 0.0634675).abs() < 1e-7);
        assert!((exact_probabilities(11, 12, 5).1 - 0.000952608).abs() < 1e-9);
        assert!((exact_probabilities(11, 12, 10).1 - 0.201699).abs() < 1e-6);
    }

    #[test]
    fn pmf_sums_to_one() {
        for (a, b) in [(11u64, 11u64), (11, 12), (5, 9), (2, 2)] {
            let max_runs = 2 * a.min(b) + u64::from(a != b);
            let total: f64 = (2..=max_runs).map(|r| runs_pmf(a, b, r)).sum();
            assert!((total - 1.0).abs() < 1e-12, "a={a} b={b} total={total}");
        }
    }

    #[test]
    fn alternating_sequence_maximal_runs() {
        let values: Vec<f64> = (0..22)
            .map(|i| if i % 2 == 0 { 1.0 } else { -1.0 })
            .collect();
        let r = runs_test(&values).unwrap();
        assert_eq!(r.n_runs, r.n_used);
        assert!(r.p_fewer > 0.9999, "p_fewer {}", r.p_fewer);
        assert!(r.p_more < 1e-5);
    }

    #[test]
    fn runs_test_agrees_with_split_level_api() {
        let data = arrangement(11, 11, 8);
        let r = runs_test(&data).unwrap();
        assert_eq!((r.n_above, r.n_below, r.n_runs), (11, 11, 8));
        let (p, f, m) = runs_probabilities(11, 11, 8);
        assert_eq!(r.p_rrd, p);
        assert_eq!(r.p_fewer, f);
        assert_eq!(r.p_more, m);
    }

    #[test]
    fn left_tail_monotone_in_run_count() {
        let mut prev = 0.0;
        for r in 2..=22 {
            let (_, fewer, _) = runs_probabilities(11, 11, r);
            assert!(fewer >= prev - 1e-12, "r={r}: {fewer} < {prev}");
            prev = fewer;
        }
        assert!((prev - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tails_are_consistent_with_point() {
        for (a, b, r) in [(11, 12, 10), (9, 14, 7), (30, 30, 25)] {
            let (point, fewer, more) = runs_probabilities(a, b, r);
            assert!((fewer + more - point - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn normal_approximation_tracks_exact() {
        for (a, b, r) in [(25u64, 25u64, 20u64), (30, 30, 26), (20, 28, 18)] {
            let (pe, fe, me) = exact_probabilities(a, b, r);
            let (pn, fn_, mn) = normal_probabilities(a, b, r);
            assert!((pe - pn).abs() < 0.01, "point {pe} vs {pn}");
            assert!((fe - fn_).abs() < 0.01, "fewer {fe} vs {fn_}");
            assert!((me - mn).abs() < 0.01, "more {me} vs {mn}");
        }
    }

    #[test]
    fn one_sided_sample_is_certain() {
        // quantized data can leave one side empty after dropping ties
        let r = runs_test(&[1.0, 1.0, 1.0, 5.0, 7.0]).unwrap();
        assert_eq!(r.n_used, 2);
        assert_eq!(r.n_below, 0);
        assert_eq!(r.n_runs, 1);
        assert_eq!(r.p_rrd, 1.0);
    }
}
