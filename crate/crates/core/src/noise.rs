//! Reference stochastic processes: white noise, Brownian noise (random
//! walks) and the Cauchy distribution.
//!
//! The white and Brownian generators are the calibration standards against
//! which observed series are classified. The Cauchy functions document why
//! ratio-of-random-variable summaries get nonparametric treatment: the
//! distribution has no mean or variance, so sample moments never settle.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest;
use crate::rng::{Mt19937, NormalSource};
use crate::series::TimeSeries;

/// Innovation distribution for the noise generators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Innovation {
    Gaussian {
        sigma: f64,
    },
    /// Uniform on [-1, 1].
    UniformSym,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    White,
    Brownian,
}

impl std::fmt::Display for NoiseKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            NoiseKind::White => write!(f, "white"),
            NoiseKind::Brownian => write!(f, "brownian"),
        }
    }
}

/// Full description of one simulated trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    pub innovation: Innovation,
    pub n: usize,
    pub master_seed: u64,
    pub stream: u64,
}

impl NoiseSpec {
    pub fn gaussian(kind: NoiseKind, n: usize, master_seed: u64, stream: u64) -> Self {
        Self {
            kind,
            innovation: Innovation::Gaussian { sigma: 1.0 },
            n,
            master_seed,
            stream,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidParameter(format!(
                "noise length must be >= 2, got {}",
                self.n
            )));
        }
        if let Innovation::Gaussian { sigma } = self.innovation {
            if !(sigma > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "sigma must be > 0, got {sigma}"
                )));
            }
        }
        Ok(())
    }
}

/// The innovation sequence a spec describes, one value per sample.
fn innovations(spec: &NoiseSpec) -> Vec<f64> {
    let gen = Mt19937::seed(spec.master_seed, spec.stream);
    match spec.innovation {
        Innovation::Gaussian { sigma } => {
            let mut src = NormalSource::new(gen);
            (0..spec.n).map(|_| sigma * src.draw()).collect()
        }
        Innovation::UniformSym => {
            let mut gen = gen;
            (0..spec.n)
                .map(|_| gen.uniform_ab(-1.0, 1.0).expect("fixed bounds"))
                .collect()
        }
    }
}

/// Sequence of independent draws from the innovation distribution.
pub fn white_noise(spec: &NoiseSpec) -> Result<TimeSeries> {
    spec.validate()?;
    if spec.kind != NoiseKind::White {
        return Err(Error::InvalidParameter("spec.kind must be white".into()));
    }
    Ok(TimeSeries::synthetic(
        format!("white[{}]", spec.stream),
        innovations(spec),
    ))
}

/// Cumulative sum of the innovation sequence: `b[0] = 0`,
/// `b[i] = b[i-1] + g[i]`. Equals `reconstruct_walk(white, 0)` on the same
/// stream, so the first innovation is not consumed by the walk.
pub fn brownian_noise(spec: &NoiseSpec) -> Result<TimeSeries> {
    spec.validate()?;
    if spec.kind != NoiseKind::Brownian {
        return Err(Error::InvalidParameter("spec.kind must be brownian".into()));
    }
    let white = NoiseSpec {
        kind: NoiseKind::White,
        ..*spec
    };
    let g = innovations(&white);
    let mut values = Vec::with_capacity(spec.n);
    values.push(0.0);
    for i in 1..spec.n {
        values.push(values[i - 1] + g[i]);
    }
    Ok(TimeSeries::synthetic(
        format!("brownian[{}]", spec.stream),
        values,
    ))
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "Cauchy scale must be > 0, got {lambda}"
        )));
    }
    Ok(())
}

/// Cauchy density `(1/pi) * lambda / (lambda^2 + (x - mu)^2)`.
pub fn cauchy_pdf(x: f64, mu: f64, lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    let d = x - mu;
    Ok(lambda / (std::f64::consts::PI * (lambda * lambda + d * d)))
}

/// Cauchy distribution function `(1/pi) * atan((x - mu)/lambda) + 1/2`.
pub fn cauchy_cdf(x: f64, mu: f64, lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    Ok(((x - mu) / lambda).atan() / std::f64::consts::PI + 0.5)
}

/// Inverse of [`cauchy_cdf`] for `p` in (0, 1).
pub fn cauchy_quantile(p: f64, mu: f64, lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "quantile level must lie in (0,1), got {p}"
        )));
    }
    Ok(mu + lambda * (std::f64::consts::PI * (p - 0.5)).tan())
}

/// Width of the central 95% interval in units of lambda: about 25.412.
pub fn cauchy_central95_span(lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    Ok(cauchy_quantile(0.975, 0.0, lambda)? - cauchy_quantile(0.025, 0.0, lambda)?)
}

// re-export used by brownian tests; the walk recursion itself lives in ingest
pub use ingest::reconstruct_walk;

#[cfg(test)]
mod tests {
    use super::*;

    const SEED: u64 = 20260810;

    #[test]
    fn white_rejects_short_or_bad_sigma() {
        let mut spec = NoiseSpec::gaussian(NoiseKind::White, 1, SEED, 0);
        assert!(white_noise(&spec).is_err());
        spec.n = 100;
        spec.innovation = Innovation::Gaussian { sigma: 0.0 };
        assert!(white_noise(&spec).is_err());
    }

    #[test]
    fn sigma_scales_trace_elementwise() {
        let unit = white_noise(&NoiseSpec {
            innovation: Innovation::Gaussian { sigma: 1.0 },
            ..NoiseSpec::gaussian(NoiseKind::White, 500, SEED, 3)
        })
        .unwrap();
        let small = white_noise(&NoiseSpec {
            innovation: Innovation::Gaussian { sigma: 1e-4 },
            ..NoiseSpec::gaussian(NoiseKind::White, 500, SEED, 3)
        })
        .unwrap();
        for (a, b) in unit.values.iter().zip(&small.values) {
            assert_eq!(*b, 1e-4 * *a);
        }
    }

    #[test]
    fn brownian_is_reconstructed_white() {
        let spec = NoiseSpec::gaussian(NoiseKind::Brownian, 1000, SEED, 7);
        let walk = brownian_noise(&spec).unwrap();
        let white = white_noise(&NoiseSpec {
            kind: NoiseKind::White,
            ..spec
        })
        .unwrap();
        let rebuilt = reconstruct_walk(&white, 0.0);
        assert_eq!(walk.values, rebuilt.values);
    }

    #[test]
    fn brownian_difference_recovers_innovations() {
        let spec = NoiseSpec::gaussian(NoiseKind::Brownian, 400, SEED, 8);
        let walk = brownian_noise(&spec).unwrap();
        let white = white_noise(&NoiseSpec {
            kind: NoiseKind::White,
            ..spec
        })
        .unwrap();
        let diff = ingest::difference(&walk).unwrap();
        // innovation i enters the walk at step i, so indices align from 1 on
        for i in 1..spec.n {
            assert!((diff.values[i] - white.values[i]).abs() < 1e-12);
        }
        assert_eq!(diff.values[0], 0.0);
    }

    #[test]
    fn uniform_innovations_stay_in_band() {
        let spec = NoiseSpec {
            kind: NoiseKind::White,
            innovation: Innovation::UniformSym,
            n: 10_000,
            master_seed: SEED,
            stream: 9,
        };
        let trace = white_noise(&spec).unwrap();
        assert!(trace.values.iter().all(|v| (-1.0..=1.0).contains(v)));
    }

    #[test]
    fn zero_innovations_give_constant_walk() {
        // degenerate check through the recursion directly
        let zeros = TimeSeries::synthetic("z", vec![0.0; 50]);
        let walk = reconstruct_walk(&zeros, 0.0);
        assert!(walk.values.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn cauchy_pdf_peak_and_half_height() {
        let peak = cauchy_pdf(1.0, 1.0, 2.0).unwrap();
        assert!((peak - 1.0 / (std::f64::consts::PI * 2.0)).abs() < 1e-15);
        let half = cauchy_pdf(3.0, 1.0, 2.0).unwrap();
        assert!((half - peak / 2.0).abs() < 1e-15);
    }

    #[test]
    fn cauchy_pdf_integrates_to_one() {
        // adaptive Simpson quadrature oracle over [-1e6, 1e6] * lambda
        #[allow(clippy::too_many_arguments)]
        fn simpson(
            f: &dyn Fn(f64) -> f64,
            a: f64,
            b: f64,
            fa: f64,
            fb: f64,
            fm: f64,
            eps: f64,
            depth: u32,
        ) -> f64 {
            let m = 0.5 * (a + b);
            let lm = 0.5 * (a + m);
            let rm = 0.5 * (m + b);
            let flm = f(lm);
            let frm = f(rm);
            let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
            let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            if depth == 0 || (left + right - whole).abs() < 15.0 * eps {
                left + right + (left + right - whole) / 15.0
            } else {
                simpson(f, a, m, fa, fm, flm, eps / 2.0, depth - 1)
                    + simpson(f, m, b, fm, fb, frm, eps / 2.0, depth - 1)
            }
        }
        let lambda = 0.7;
        let f = move |x: f64| cauchy_pdf(x, 0.0, lambda).unwrap();
        let (a, b) = (-1e6 * lambda, 1e6 * lambda);
        let integral = simpson(&f, a, b, f(a), f(b), f(0.5 * (a + b)), 1e-10, 60);
        assert!((integral - 1.0).abs() < 1e-4, "integral {integral}");
    }

    #[test]
    fn cauchy_cdf_median_and_ci_points() {
        assert_eq!(cauchy_cdf(5.0, 5.0, 3.0).unwrap(), 0.5);
        let p = cauchy_cdf(12.706, 0.0, 1.0).unwrap();
        assert!((p - 0.975).abs() < 1e-4, "p {p}");
    }

    #[test]
    fn cauchy_cdf_quantile_roundtrip() {
        // tan(0) = 0: the median inverts to mu exactly
        assert_eq!(cauchy_quantile(0.5, 2.0, 0.5).unwrap(), 2.0);
        for i in 1..100 {
            let p = i as f64 / 100.0;
            let x = cauchy_quantile(p, 2.0, 0.5).unwrap();
            let back = cauchy_cdf(x, 2.0, 0.5).unwrap();
            assert!((back - p).abs() < 1e-12, "p {p} back {back}");
        }
    }

    #[test]
    fn cauchy_rejects_bad_lambda() {
        assert!(cauchy_pdf(0.0, 0.0, 0.0).is_err());
        assert!(cauchy_cdf(0.0, 0.0, -2.0).is_err());
    }

    #[test]
    fn central95_span_constant() {
        let span = cauchy_central95_span(1.0).unwrap();
        assert!((span - 25.4124).abs() < 1e-3, "span {span}");
    }

    // Running means of Cauchy draws never settle; with 100 streams at least
    // half must see |running mean| exceed 5*lambda somewhere in 1e5 draws.
    #[test]
    fn cauchy_running_means_do_not_stabilize() {
        let lambda = 1.0;
        let mut hits = 0;
        for stream in 0..100u64 {
            let mut gen = Mt19937::seed(SEED, stream);
            let mut sum = 0.0;
            let mut peak: f64 = 0.0;
            for i in 1..=100_000u64 {
                sum += gen.cauchy_sample(0.0, lambda).unwrap();
                peak = peak.max((sum / i as f64).abs());
            }
            if peak > 5.0 * lambda {
                hits += 1;
            }
        }
        assert!(hits >= 50, "only {hits}/100 streams exceeded 5*lambda");
    }
}
