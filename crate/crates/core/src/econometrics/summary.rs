//! Moment-based summary statistics for return samples.

use super::dist::student_t_sf;
use crate::error::{Error, Result};

/// Sample moments plus a mean-zero test.
#[derive(Debug, Clone, Copy)]
pub struct SummaryStats {
    pub mean: f64,
    /// Sample standard deviation (n-1 denominator).
    pub sd: f64,
    /// m3 / m2^(3/2) with population-style central moments.
    pub skew: f64,
    /// m4 / m2^2 - 3.
    pub excess_kurtosis: f64,
    /// Two-sided one-sample t-test of mean = 0; None when sd is zero.
    pub p_value_mean_zero: Option<f64>,
    pub n: usize,
}

pub fn summary_stats(samples: &[f64]) -> Result<SummaryStats> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::Insufficient(format!(
            "summary statistics need at least 2 samples, got {n}"
        )));
    }
    let nf = n as f64;
    let mean = samples.iter().sum::<f64>() / nf;
    let mut m2 = 0.0;
    let mut m3 = 0.0;
    let mut m4 = 0.0;
    for &x in samples {
        let d = x - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= nf;
    m3 /= nf;
    m4 /= nf;
    let var_sample = m2 * nf / (nf - 1.0);
    let sd = var_sample.sqrt();
    let (skew, excess_kurtosis) = if m2 > 0.0 {
        (m3 / m2.powf(1.5), m4 / (m2 * m2) - 3.0)
    } else {
        (f64::NAN, f64::NAN)
    };
    let p_value_mean_zero = if sd > 0.0 {
        let t = nf.sqrt() * mean / sd;
        Some(2.0 * student_t_sf(t.abs(), nf - 1.0))
    } else {
        None
    };
    Ok(SummaryStats {
        mean,
        sd,
        skew,
        excess_kurtosis,
        p_value_mean_zero,
        n,
    })
}

/// Two-sided p-value of the one-sample t-test for mean zero.
pub fn mean_zero_ttest(samples: &[f64]) -> Result<f64> {
    let stats = summary_stats(samples)?;
    stats
        .p_value_mean_zero
        .ok_or_else(|| Error::Undefined("mean-zero t-test needs nonzero variance".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn symmetric_pair() {
        let s = summary_stats(&[-1.0, 1.0]).unwrap();
        assert_eq!(s.mean, 0.0);
        assert_eq!(s.skew, 0.0);
        assert!((s.p_value_mean_zero.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_sample_has_no_test() {
        let s = summary_stats(&[2.0, 2.0, 2.0]).unwrap();
        assert_eq!(s.sd, 0.0);
        assert!(s.p_value_mean_zero.is_none());
        assert!(mean_zero_ttest(&[2.0, 2.0, 2.0]).is_err());
    }

    #[test]
    fn too_few_samples() {
        assert!(summary_stats(&[1.0]).is_err());
    }

    #[test]
    fn matches_brute_force_moments() {
        // hand sample; oracle computes the moment definitions directly
        let xs = [0.3, -1.2, 2.4, 0.0, 1.1, -0.7, 3.3, -2.2];
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let mk = |k: i32| xs.iter().map(|x| (x - mean).powi(k)).sum::<f64>() / n;
        let (m2, m3, m4) = (mk(2), mk(3), mk(4));
        let s = summary_stats(&xs).unwrap();
        assert!((s.mean - mean).abs() < 1e-14);
        assert!((s.sd - (m2 * n / (n - 1.0)).sqrt()).abs() < 1e-14);
        assert!((s.skew - m3 / m2.powf(1.5)).abs() < 1e-12);
        assert!((s.excess_kurtosis - (m4 / (m2 * m2) - 3.0)).abs() < 1e-12);
    }

    #[test]
    fn near_constant_sample_rejects_zero_mean() {
        let p = mean_zero_ttest(&[1.0, 1.0, 1.0, 1.0001]).unwrap();
        assert!(p < 0.01, "p = {p}");
    }

    #[test]
    fn shifted_normal_rejects_strongly() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let xs: Vec<f64> = (0..10_000)
            .map(|_| {
                // Box-Muller
                let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
                let u2: f64 = rng.gen_range(0.0..1.0);
                0.5 + (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
            })
            .collect();
        let p = mean_zero_ttest(&xs).unwrap();
        assert!(p < 1e-10, "p = {p}");
    }
}
