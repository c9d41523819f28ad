//! Empirical distribution functions and the two-sample Smirnov test.

use crate::error::{Error, Result};

/// Right-continuous empirical CDF: `F(x) = #{x_i <= x} / n`.
#[derive(Debug, Clone)]
pub struct Ecdf {
    sorted: Vec<f64>,
}

impl Ecdf {
    pub fn new(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidParameter("empty sample".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "empirical CDF requires finite values".into(),
            ));
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(Self { sorted })
    }

    pub fn n(&self) -> usize {
        self.sorted.len()
    }

    pub fn eval(&self, x: f64) -> f64 {
        let k = self.sorted.partition_point(|v| *v <= x);
        k as f64 / self.sorted.len() as f64
    }

    /// Plot-ready step points `(x, F(x))`, one per sample in sorted order.
    pub fn steps(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let n = self.sorted.len() as f64;
        self.sorted
            .iter()
            .enumerate()
            .map(move |(i, x)| (*x, (i + 1) as f64 / n))
    }
}

/// Complementary asymptotic Kolmogorov distribution
/// `Q(t) = 2 sum (-1)^{k-1} exp(-2 k^2 t^2)`.
pub(crate) fn kolmogorov_q(t: f64) -> f64 {
    if t < 0.05 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=100 {
        let term = (-2.0 * (k as f64) * (k as f64) * t * t).exp();
        sum += sign * term;
        sign = -sign;
        if term < 1e-17 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Two-sample Smirnov test. Returns `(D, P)` where `D` is the largest gap
/// between the two empirical CDFs over the pooled support and `P` comes from
/// the asymptotic Kolmogorov distribution at effective size
/// `ne = na*nb/(na+nb)`, with the usual finite-sample correction factor.
/// Ties are handled by evaluating both CDFs on the pooled unique support.
pub fn smirnov_test(a: &[f64], b: &[f64]) -> Result<(f64, f64)> {
    let fa = Ecdf::new(a)?;
    let fb = Ecdf::new(b)?;

    let mut pooled: Vec<f64> = a.iter().chain(b.iter()).copied().collect();
    pooled.sort_by(|x, y| x.partial_cmp(y).unwrap());
    pooled.dedup();

    let mut d: f64 = 0.0;
    for x in &pooled {
        d = d.max((fa.eval(*x) - fb.eval(*x)).abs());
    }

    if d == 0.0 {
        return Ok((0.0, 1.0));
    }
    let ne = (fa.n() * fb.n()) as f64 / (fa.n() + fb.n()) as f64;
    let sqrt_ne = ne.sqrt();
    let t = (sqrt_ne + 0.12 + 0.11 / sqrt_ne) * d;
    Ok((d, kolmogorov_q(t)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Mt19937;

    #[test]
    fn cdf_step_values() {
        let f = Ecdf::new(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(f.eval(2.0), 2.0 / 3.0);
        assert_eq!(f.eval(0.5), 0.0);
        assert_eq!(f.eval(3.0), 1.0);
        assert_eq!(f.eval(1e9), 1.0);
    }

    #[test]
    fn cdf_nondecreasing_over_random_fixture() {
        let mut gen = Mt19937::seed(20260810, 11);
        let values: Vec<f64> = (0..1000).map(|_| gen.normal_pair().0).collect();
        let f = Ecdf::new(&values).unwrap();
        let mut prev = 0.0;
        for x in -400..400 {
            let y = f.eval(x as f64 / 100.0);
            assert!(y >= prev);
            prev = y;
        }
    }

    #[test]
    fn ties_produce_full_step() {
        let f = Ecdf::new(&[2.0, 2.0, 2.0, 5.0]).unwrap();
        assert_eq!(f.eval(2.0), 0.75);
        assert_eq!(f.eval(1.9999), 0.0);
    }

    #[test]
    fn identical_samples_give_zero_distance() {
        let a = [3.0, 1.0, 4.0, 1.5, 9.0, 2.6];
        let (d, p) = smirnov_test(&a, &a).unwrap();
        assert_eq!(d, 0.0);
        assert_eq!(p, 1.0);
    }

    #[test]
    fn shifted_normals_are_clearly_different() {
        let mut gen = Mt19937::seed(20260810, 12);
        let a: Vec<f64> = (0..1329).map(|_| gen.normal_pair().0).collect();
        let b: Vec<f64> = (0..1329).map(|_| 3.0 + gen.normal_pair().0).collect();
        let (d, p) = smirnov_test(&a, &b).unwrap();
        assert!(d > 0.5);
        assert!(p < 1e-6, "p {p}");
    }

    #[test]
    fn distance_is_bounded_and_symmetric() {
        let mut gen = Mt19937::seed(20260810, 13);
        let a: Vec<f64> = (0..200).map(|_| gen.normal_pair().0).collect();
        let b: Vec<f64> = (0..150).map(|_| gen.uniform01()).collect();
        let (dab, pab) = smirnov_test(&a, &b).unwrap();
        let (dba, pba) = smirnov_test(&b, &a).unwrap();
        assert!((0.0..=1.0).contains(&dab));
        assert_eq!(dab, dba);
        assert_eq!(pab, pba);
    }

    #[test]
    fn kolmogorov_q_edges() {
        assert_eq!(kolmogorov_q(0.0), 1.0);
        assert!(kolmogorov_q(10.0) < 1e-30);
        // classical value Q(1.0) ~ 0.26999
        assert!((kolmogorov_q(1.0) - 0.26999967).abs() < 1e-6);
    }
}
