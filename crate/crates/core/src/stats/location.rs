//! Hodges-Lehmann location estimate with a distribution-free confidence
//! interval from the signed-rank critical values.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Cutoff below which the exact signed-rank null distribution is used for
/// the interval; the normal approximation applies above.
const EXACT_LIMIT: usize = 50;

const Z_975: f64 = 1.959963984540054;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocationEstimate {
    /// Median of the n(n+1)/2 pairwise Walsh averages.
    pub median: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n: usize,
}

/// Critical count for the interval: the largest `c` with null
/// P(W <= c) <= alpha/2 under the exact signed-rank distribution, or 0 when
/// even the extreme order statistic cannot be excluded. The distribution is
/// built by the standard polynomial recursion over probabilities.
fn signed_rank_critical(n: usize, alpha: f64) -> usize {
    let m = n * (n + 1) / 2;
    let mut dist = vec![0.0f64; m + 1];
    dist[0] = 1.0;
    for i in 1..=n {
        // convolve with (1/2 at 0, 1/2 at shift i)
        for w in (0..=m).rev() {
            let carried = if w >= i { dist[w - i] } else { 0.0 };
            dist[w] = 0.5 * dist[w] + 0.5 * carried;
        }
    }
    let target = alpha / 2.0;
    let mut cum = 0.0;
    let mut c = 0usize;
    for (w, p) in dist.iter().enumerate() {
        cum += p;
        if cum <= target + 1e-12 {
            c = w;
        } else {
            break;
        }
    }
    c
}

fn normal_critical(n: usize, z: f64) -> usize {
    let nf = n as f64;
    let m = nf * (nf + 1.0) / 4.0;
    let sd = (nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0).sqrt();
    (m - z * sd).floor().max(0.0) as usize
}

/// Hodges-Lehmann point estimate and 95% confidence interval.
pub fn hl_location(values: &[f64]) -> Result<LocationEstimate> {
    let n = values.len();
    if n < 3 {
        return Err(Error::InvalidParameter(
            "location estimate needs at least 3 points".into(),
        ));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter(
            "location estimate requires finite values".into(),
        ));
    }
    let mut walsh = Vec::with_capacity(n * (n + 1) / 2);
    for i in 0..n {
        for j in i..n {
            walsh.push((values[i] + values[j]) / 2.0);
        }
    }
    walsh.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let m = walsh.len();
    let median = if m % 2 == 1 {
        walsh[m / 2]
    } else {
        (walsh[m / 2 - 1] + walsh[m / 2]) / 2.0
    };

    let c = if n <= EXACT_LIMIT {
        signed_rank_critical(n, 0.05)
    } else {
        normal_critical(n, Z_975)
    }
    .min((m - 1) / 2);
    // CI endpoints are the (c+1)-th smallest and (c+1)-th largest averages
    Ok(LocationEstimate {
        median,
        ci_low: walsh[c],
        ci_high: walsh[m - 1 - c],
        n,
    })
}
