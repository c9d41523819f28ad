//! Theil slope regression and Spearman rank correlation.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

const Z_975: f64 = 1.959963984540054;

/// Spearman switches from exact permutation to the t approximation above
/// this sample size.
const SPEARMAN_EXACT_LIMIT: usize = 10;

/// Intercept CI switches from the exact binomial order statistics to the
/// normal approximation above this sample size.
const SIGN_EXACT_LIMIT: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheilFit {
    pub alpha: f64,
    pub alpha_ci: (f64, f64),
    pub beta: f64,
    pub beta_ci: (f64, f64),
    pub rho_s: f64,
    pub p_rho: f64,
    pub n: usize,
}

fn sorted_median(sorted: &[f64]) -> f64 {
    let m = sorted.len();
    if m % 2 == 1 {
        sorted[m / 2]
    } else {
        (sorted[m / 2 - 1] + sorted[m / 2]) / 2.0
    }
}

/// Largest `k` with P(Bin(n, 1/2) <= k) <= alpha/2, for the order-statistic
/// interval around a median; 0 when nothing can be excluded.
fn sign_test_critical(n: usize, alpha: f64) -> usize {
    if n > SIGN_EXACT_LIMIT {
        let nf = n as f64;
        return ((nf / 2.0 - Z_975 * nf.sqrt() / 2.0).floor().max(0.0)) as usize;
    }
    let target = alpha / 2.0;
    // cumulative binomial(n, 1/2) by direct recurrence
    let mut pmf = 0.5f64.powi(n as i32);
    let mut cum = pmf;
    let mut best = 0usize;
    for k in 0..n {
        if cum <= target + 1e-12 {
            best = k;
        } else {
            break;
        }
        pmf *= (n - k) as f64 / (k + 1) as f64;
        cum += pmf;
    }
    best
}

/// Slope by the median of all pairwise slopes, intercept by the median of
/// `y - beta*x`. The slope interval comes from the rank-order method at 95%
/// (Kendall-score dispersion), the intercept interval from order statistics
/// of the intercept residuals.
pub fn theil_fit(x: &[f64], y: &[f64]) -> Result<TheilFit> {
    let n = x.len();
    if n != y.len() {
        return Err(Error::Misaligned(format!(
            "x has {} points, y has {}",
            n,
            y.len()
        )));
    }
    if n < 3 {
        return Err(Error::InvalidParameter(
            "Theil fit needs at least 3 pairs".into(),
        ));
    }
    let mut slopes = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            if x[i] != x[j] {
                slopes.push((y[j] - y[i]) / (x[j] - x[i]));
            }
        }
    }
    if slopes.is_empty() {
        return Err(Error::Degenerate("all abscissa values equal".into()));
    }
    slopes.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let beta = sorted_median(&slopes);

    // rank-order slope interval
    let ns = slopes.len() as f64;
    let nf = n as f64;
    let c = Z_975 * (nf * (nf - 1.0) * (2.0 * nf + 5.0) / 18.0).sqrt();
    let lo_rank = (((ns - c) / 2.0).floor().max(0.0) as usize).min(slopes.len() - 1);
    let hi_rank = ((((ns + c) / 2.0).ceil() as usize).min(slopes.len())).max(1) - 1;
    let beta_ci = (slopes[lo_rank], slopes[hi_rank.max(lo_rank)]);

    let mut intercepts: Vec<f64> = x.iter().zip(y).map(|(xi, yi)| yi - beta * xi).collect();
    intercepts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let alpha = sorted_median(&intercepts);
    let k = sign_test_critical(n, 0.05).min((n - 1) / 2);
    let alpha_ci = (intercepts[k], intercepts[n - 1 - k]);

    let (rho_s, p_rho) = spearman(x, y)?;

    Ok(TheilFit {
        alpha,
        alpha_ci,
        beta,
        beta_ci,
        rho_s,
        p_rho,
        n,
    })
}

/// Mid-ranks (average rank for ties).
fn mid_ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[i].partial_cmp(&values[j]).unwrap());
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = rank;
        }
        i = j + 1;
    }
    ranks
}

fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let mut sab = 0.0;
    let mut saa = 0.0;
    let mut sbb = 0.0;
    for (x, y) in a.iter().zip(b) {
        let dx = x - ma;
        let dy = y - mb;
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return None;
    }
    Some(sab / (saa * sbb).sqrt())
}

/// Exact two-tailed permutation probability of `|rho| >= |observed|`,
/// enumerating all permutations of the second rank vector (Heap's
/// algorithm with an incrementally updated dot product).
fn spearman_exact_p(rx: &[f64], ry: &[f64], observed: f64) -> f64 {
    let n = rx.len();
    let mx = rx.iter().sum::<f64>() / n as f64;
    let my = ry.iter().sum::<f64>() / n as f64;
    let sxx: f64 = rx.iter().map(|v| (v - mx) * (v - mx)).sum();
    let syy: f64 = ry.iter().map(|v| (v - my) * (v - my)).sum();
    let denom = (sxx * syy).sqrt();
    let threshold = observed.abs() - 1e-12;

    let mut perm: Vec<f64> = ry.to_vec();
    let mut dot: f64 = rx.iter().zip(&perm).map(|(a, b)| a * b).sum();
    // centered covariance sum is dot - n*mx*my, so only dot needs updating
    let rho_of = |dot: f64| (dot - n as f64 * mx * my) / denom;

    let mut hits: u64 = 0;
    let mut total: u64 = 0;
    let mut counters = vec![0usize; n];
    let mut check = |dot: f64| {
        total += 1;
        if rho_of(dot).abs() >= threshold {
            hits += 1;
        }
    };
    check(dot);
    let mut i = 0;
    while i < n {
        if counters[i] < i {
            let (a, b) = if i % 2 == 0 { (0, i) } else { (counters[i], i) };
            dot += (rx[a] - rx[b]) * (perm[b] - perm[a]);
            perm.swap(a, b);
            check(dot);
            counters[i] += 1;
            i = 0;
        } else {
            counters[i] = 0;
            i += 1;
        }
    }
    hits as f64 / total as f64
}

/// Spearman rank correlation on mid-ranks with tie correction, plus the
/// probability of a zero-correlation population producing it. Exact
/// permutation below n = 11, t approximation above.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    let n = x.len();
    if n != y.len() {
        return Err(Error::Misaligned(format!(
            "x has {} points, y has {}",
            n,
            y.len()
        )));
    }
    if n < 3 {
        return Err(Error::InvalidParameter(
            "rank correlation needs at least 3 pairs".into(),
        ));
    }
    let rx = mid_ranks(x);
    let ry = mid_ranks(y);
    let rho = pearson(&rx, &ry).ok_or_else(|| Error::Degenerate("zero rank variance".into()))?;

    let p = if n <= SPEARMAN_EXACT_LIMIT {
        spearman_exact_p(&rx, &ry, rho)
    } else if rho.abs() >= 1.0 {
        0.0
    } else {
        let df = (n - 2) as f64;
        let t = rho * (df / (1.0 - rho * rho)).sqrt();
        let dist = StudentsT::new(0.0, 1.0, df).expect("valid dof");
        2.0 * (1.0 - dist.cdf(t.abs()))
    };
    Ok((rho, p))
}
