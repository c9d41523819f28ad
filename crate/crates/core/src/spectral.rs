//! FFT-based spectral density.
//!
//! The transform is a radix-2 decimation-in-time Cooley-Tukey; inputs are
//! mean-removed, windowed and zero-padded to the next power of two. The
//! spectral density reports both the amplitude `psi_f = sqrt(a^2 + b^2)`
//! and the power `a^2 + b^2` per positive frequency bin; power is what the
//! log-log slope is fitted on, since the random-walk signature is a power
//! decay of 1/f^2.

pub use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::TimeSeries;
use crate::stats::{theil_fit, TheilFit};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowKind {
    Hann,
    Hamming,
}

impl std::str::FromStr for WindowKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hann" => Ok(WindowKind::Hann),
            "hamming" => Ok(WindowKind::Hamming),
            other => Err(Error::InvalidParameter(format!(
                "unknown window kind '{other}' (expected hann or hamming)"
            ))),
        }
    }
}

impl std::fmt::Display for WindowKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            WindowKind::Hann => write!(f, "hann"),
            WindowKind::Hamming => write!(f, "hamming"),
        }
    }
}

/// Remove the mean, then taper with the chosen raised-cosine window.
pub fn apply_window(values: &[f64], kind: WindowKind) -> Result<Vec<f64>> {
    let n = values.len();
    if n < 4 {
        return Err(Error::InvalidParameter(
            "windowing needs at least 4 points".into(),
        ));
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let (a0, a1) = match kind {
        WindowKind::Hann => (0.5, 0.5),
        WindowKind::Hamming => (0.54, 0.46),
    };
    let denom = (n - 1) as f64;
    Ok(values
        .iter()
        .enumerate()
        .map(|(k, v)| {
            let w = a0 - a1 * (2.0 * std::f64::consts::PI * k as f64 / denom).cos();
            (v - mean) * w
        })
        .collect())
}

fn next_power_of_two(n: usize) -> usize {
    n.next_power_of_two()
}

/// In-place radix-2 decimation-in-time transform. `buf.len()` must be a
/// power of two.
fn fft_in_place(buf: &mut [Complex64], inverse: bool) {
    let n = buf.len();
    debug_assert!(n.is_power_of_two());
    // bit-reversal permutation
    let mut j = 0usize;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            buf.swap(i, j);
        }
    }
    let sign = if inverse { 1.0 } else { -1.0 };
    let mut len = 2;
    while len <= n {
        let angle = sign * 2.0 * std::f64::consts::PI / len as f64;
        let w_len = Complex64::new(angle.cos(), angle.sin());
        for chunk in buf.chunks_mut(len) {
            let mut w = Complex64::new(1.0, 0.0);
            for i in 0..len / 2 {
                let even = chunk[i];
                let odd = chunk[i + len / 2] * w;
                chunk[i] = even + odd;
                chunk[i + len / 2] = even - odd;
                w *= w_len;
            }
        }
        len <<= 1;
    }
}

/// Forward transform of a real signal, zero-padded to the next power of two.
pub fn fft(values: &[f64]) -> Result<Vec<Complex64>> {
    if values.is_empty() {
        return Err(Error::InvalidParameter("empty input to fft".into()));
    }
    let n = next_power_of_two(values.len());
    let mut buf: Vec<Complex64> = values
        .iter()
        .map(|v| Complex64::new(*v, 0.0))
        .chain(std::iter::repeat(Complex64::new(0.0, 0.0)))
        .take(n)
        .collect();
    fft_in_place(&mut buf, false);
    Ok(buf)
}

/// Inverse transform (with the 1/n factor). Input length must be a power of
/// two.
pub fn inverse_fft(spectrum: &[Complex64]) -> Result<Vec<Complex64>> {
    let n = spectrum.len();
    if !n.is_power_of_two() {
        return Err(Error::InvalidParameter(
            "inverse fft needs a power-of-two length".into(),
        ));
    }
    let mut buf = spectrum.to_vec();
    fft_in_place(&mut buf, true);
    let scale = 1.0 / n as f64;
    for v in &mut buf {
        *v *= scale;
    }
    Ok(buf)
}

/// Positive-frequency spectral density.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Spectrum {
    /// Cycles per sample interval, bins 1..=n/2 (the DC bin is dropped).
    pub frequencies: Vec<f64>,
    /// `psi_f = sqrt(a^2 + b^2)` per bin.
    pub amplitude: Vec<f64>,
    /// `a^2 + b^2` per bin.
    pub power: Vec<f64>,
    pub window: Option<WindowKind>,
    pub n_padded: usize,
}

/// Collapse a transform to its positive-frequency bins. `dt` is the sample
/// interval in days, so frequencies come out in cycles per day.
pub fn spectral_density(
    transform: &[Complex64],
    dt: f64,
    window: Option<WindowKind>,
) -> Result<Spectrum> {
    let n = transform.len();
    if !n.is_power_of_two() || n < 4 {
        return Err(Error::InvalidParameter(
            "spectral density needs a power-of-two transform of length >= 4".into(),
        ));
    }
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter("dt must be positive".into()));
    }
    let half = n / 2;
    let mut frequencies = Vec::with_capacity(half);
    let mut amplitude = Vec::with_capacity(half);
    let mut power = Vec::with_capacity(half);
    for (k, c) in transform.iter().enumerate().skip(1).take(half) {
        frequencies.push(k as f64 / (n as f64 * dt));
        let p = c.re * c.re + c.im * c.im;
        power.push(p);
        amplitude.push(p.sqrt());
    }
    Ok(Spectrum {
        frequencies,
        amplitude,
        power,
        window,
        n_padded: n,
    })
}

/// Theil fit of log10(power) against log10(frequency). The Nyquist bin and
/// the top frequency decade are excluded: sampling the signal at discrete
/// points rings the upper bins, so the fit uses `f <= f_nyquist / 10`.
pub fn loglog_slope(spectrum: &Spectrum) -> Result<TheilFit> {
    let f_cut = spectrum.frequencies.last().copied().unwrap_or(0.0) / 10.0;
    let nyquist_index = spectrum.frequencies.len().saturating_sub(1);
    let mut log_f = Vec::new();
    let mut log_p = Vec::new();
    for (i, (f, p)) in spectrum.frequencies.iter().zip(&spectrum.power).enumerate() {
        if i == nyquist_index || *f > f_cut || !(*p > 0.0) {
            continue;
        }
        log_f.push(f.log10());
        log_p.push(p.log10());
    }
    if log_f.len() < 8 {
        if spectrum.power.iter().all(|p| !(*p > 0.0)) {
            return Err(Error::Degenerate(
                "spectrum carries no power (constant input?)".into(),
            ));
        }
        return Err(Error::InvalidParameter(format!(
            "log-log fit needs at least 8 usable bins, got {}",
            log_f.len()
        )));
    }
    theil_fit(&log_f, &log_p)
}

/// Window, transform and summarize a series in one call.
pub fn analyze_series(series: &TimeSeries, window: WindowKind) -> Result<(Spectrum, TheilFit)> {
    let tapered = apply_window(&series.values, window)?;
    let transform = fft(&tapered)?;
    let spectrum = spectral_density(&transform, 1.0, Some(window))?;
    let slope = loglog_slope(&spectrum)?;
    Ok((spectrum, slope))
}
