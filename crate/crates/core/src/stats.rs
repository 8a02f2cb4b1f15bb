//! Summary statistics with order-fixed summation, normality testing and bootstrap.

use rand::Rng;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{domain, Error, Result};

/// Anderson–Darling 1% critical value for the modified statistic
/// `A^2 (1 + 0.75/n + 2.25/n^2)` with estimated mean and variance.
pub const AD_CRITICAL_1PCT: f64 = 1.035;

pub const MIN_NORMALITY_SAMPLES: usize = 100;

/// Pairwise summation: the result depends only on the order of `x`.
pub fn pairwise_sum(x: &[f64]) -> f64 {
    if x.len() <= 16 {
        return x.iter().sum();
    }
    let m = x.len() / 2;
    pairwise_sum(&x[..m]) + pairwise_sum(&x[m..])
}

pub fn mean(x: &[f64]) -> f64 {
    if x.is_empty() {
        return f64::NAN;
    }
    pairwise_sum(x) / x.len() as f64
}

/// Unbiased sample variance.
pub fn variance(x: &[f64]) -> f64 {
    if x.len() < 2 {
        return f64::NAN;
    }
    let m = mean(x);
    let sq: Vec<f64> = x.iter().map(|v| (v - m) * (v - m)).collect();
    pairwise_sum(&sq) / (x.len() - 1) as f64
}

/// Unbiased sample covariance.
pub fn covariance(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    if x.len() < 2 {
        return f64::NAN;
    }
    let (mx, my) = (mean(x), mean(y));
    let p: Vec<f64> = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).collect();
    pairwise_sum(&p) / (x.len() - 1) as f64
}

pub fn correlation(x: &[f64], y: &[f64]) -> f64 {
    covariance(x, y) / (variance(x) * variance(y)).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CltResult {
    pub statistic: f64,
    pub pass: bool,
}

/// Anderson–Darling test of normality after standardizing by the sample mean
/// and standard deviation.
pub fn clt_test(values: &[f64]) -> Result<CltResult> {
    let n = values.len();
    if n < MIN_NORMALITY_SAMPLES {
        return Err(domain("normality sample size", n as f64));
    }
    let m = mean(values);
    let sd = variance(values).sqrt();
    if !(sd > 0.0) || !sd.is_finite() {
        return Err(Error::DegenerateInput("normality test on values with zero variance".into()));
    }
    let normal = Normal::standard();
    let mut z: Vec<f64> = values.iter().map(|v| (v - m) / sd).collect();
    z.sort_by(f64::total_cmp);
    let nf = n as f64;
    let terms: Vec<f64> = (0..n)
        .map(|i| {
            let lo = normal.cdf(z[i]).max(1e-300);
            let hi = normal.sf(z[n - 1 - i]).max(1e-300);
            (2 * i + 1) as f64 * (lo.ln() + hi.ln())
        })
        .collect();
    let a2 = -nf - pairwise_sum(&terms) / nf;
    let statistic = a2 * (1.0 + 0.75 / nf + 2.25 / (nf * nf));
    Ok(CltResult { statistic, pass: statistic < AD_CRITICAL_1PCT })
}

/// Percentile bootstrap interval of `stat` over resampled indices.
pub fn bootstrap_ci<R: Rng + ?Sized>(n: usize, resamples: usize, level: f64, rng: &mut R, mut stat: impl FnMut(&[usize]) -> f64) -> (f64, f64) {
    let mut idx = vec![0usize; n];
    let mut values: Vec<f64> = (0..resamples)
        .map(|_| {
            idx.iter_mut().for_each(|i| *i = rng.random_range(0..n));
            stat(&idx)
        })
        .collect();
    values.sort_by(f64::total_cmp);
    let q = |p: f64| {
        let pos = p * (resamples - 1) as f64;
        let (i, f) = (pos.floor() as usize, pos - pos.floor());
        values[i] + f * (values[(i + 1).min(resamples - 1)] - values[i])
    };
    let tail = 0.5 * (1.0 - level);
    (q(tail), q(1.0 - tail))
}

/// Bootstrap standard deviation of `stat`.
pub fn bootstrap_se<R: Rng + ?Sized>(n: usize, resamples: usize, rng: &mut R, mut stat: impl FnMut(&[usize]) -> f64) -> f64 {
    let mut idx = vec![0usize; n];
    let values: Vec<f64> = (0..resamples)
        .map(|_| {
            idx.iter_mut().for_each(|i| *i = rng.random_range(0..n));
            stat(&idx)
        })
        .collect();
    variance(&values).sqrt()
}

pub fn gather(x: &[f64], idx: &[usize]) -> Vec<f64> {
    idx.iter().map(|&i| x[i]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;
    use proptest::prelude::*;
    use rand_distr::{Distribution, Exp, StandardNormal};

    fn normals(seed: u64, n: usize) -> Vec<f64> {
        let mut rng = stream_rng(seed, 0);
        (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
    }

    #[test]
    fn normal_input_passes() {
        assert!(clt_test(&normals(1, 1000)).unwrap().pass);
    }

    #[test]
    fn exponential_input_fails() {
        let mut rng = stream_rng(2, 0);
        let e = Exp::new(1.0).unwrap();
        let x: Vec<f64> = (0..1000).map(|_| e.sample(&mut rng)).collect();
        let r = clt_test(&x).unwrap();
        assert!(!r.pass, "{r:?}");
    }

    #[test]
    fn calibration_over_batches() {
        let passes = (0..100).filter(|&s| clt_test(&normals(100 + s, 500)).unwrap().pass).count();
        assert!(passes >= 95, "{passes}");
    }

    #[test]
    fn degenerate_and_small_inputs() {
        assert!(matches!(clt_test(&[1.0; 200]), Err(Error::DegenerateInput(_))));
        assert!(clt_test(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn known_statistic() {
        // the standardized grid of normal quantiles is nearly a perfect fit
        let n = 200;
        let normal = Normal::standard();
        let x: Vec<f64> = (0..n).map(|i| normal.inverse_cdf((i as f64 + 0.5) / n as f64)).collect();
        assert!(clt_test(&x).unwrap().statistic < 0.05);
    }

    #[test]
    fn moments() {
        let x = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(mean(&x), 2.5);
        assert!((variance(&x) - 5.0 / 3.0).abs() < 1e-15);
        assert!((covariance(&x, &x) - variance(&x)).abs() < 1e-15);
        assert!((correlation(&x, &[2.0, 4.0, 6.0, 8.0]) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn bootstrap_variance_interval_covers() {
        let x = normals(5, 2000);
        let mut rng = stream_rng(6, 0);
        let (lo, hi) = bootstrap_ci(x.len(), 1000, 0.99, &mut rng, |idx| variance(&gather(&x, idx)));
        assert!(lo < 1.0 && 1.0 < hi, "[{lo}, {hi}]");
        assert!(hi - lo < 0.25);
    }

    proptest! {
        #[test]
        fn ad_is_location_scale_invariant(seed in 0u64..200, a in -50.0f64..50.0, b in 0.01f64..100.0) {
            let x = normals(seed, 150);
            let y: Vec<f64> = x.iter().map(|v| a + b * v).collect();
            let (s, t) = (clt_test(&x).unwrap().statistic, clt_test(&y).unwrap().statistic);
            prop_assert!((s - t).abs() < 1e-9 * s.max(1.0));
        }

        #[test]
        fn pairwise_sum_is_accurate(x in prop::collection::vec(-1e3f64..1e3, 0..500)) {
            let exact: f64 = x.iter().map(|&v| v as f64).sum();
            prop_assert!((pairwise_sum(&x) - exact).abs() < 1e-9);
        }
    }
}
