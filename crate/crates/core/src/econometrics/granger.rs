//! Bivariate Granger causality as a single-equation Wald exclusion test.

use nalgebra::DMatrix;

use super::dist::{chi_square_sf, f_sf};
use super::ols::{ols, Design};
use crate::error::{Error, Result};

/// Reference distribution for the exclusion test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GrangerVariant {
    /// Wald statistic against chi-square(L).
    #[default]
    WaldChi2,
    /// W/L against F(L, df_resid).
    F,
}

#[derive(Debug, Clone, Copy)]
pub struct GrangerResult {
    pub lag: usize,
    pub wald_stat: f64,
    pub p_value: f64,
    pub n_obs: usize,
}

/// Tests whether lags 1..=L of `x` jointly improve the forecast of `y`
/// beyond y's own lags. The unrestricted regression is
/// y_t ~ const + y_{t-1..t-L} + x_{t-1..t-L}; the Wald statistic tests
/// joint nullity of the x block using the nonrobust covariance.
pub fn granger_test(
    x: &[f64],
    y: &[f64],
    lag: usize,
    variant: GrangerVariant,
) -> Result<GrangerResult> {
    if lag == 0 {
        return Err(Error::Invalid("lag must be at least 1".into()));
    }
    if x.len() != y.len() {
        return Err(Error::Invalid(format!(
            "series lengths differ: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    let t_len = y.len();
    if t_len <= 3 * lag + 5 {
        return Err(Error::Insufficient(format!(
            "{t_len} observations for Granger test at lag {lag}"
        )));
    }

    let rows: Vec<usize> = (lag..t_len).collect();
    let n_obs = rows.len();
    let dep: Vec<f64> = rows.iter().map(|&t| y[t]).collect();
    let mut d = Design::new();
    for j in 1..=lag {
        d.push(format!("y_lag{j}"), rows.iter().map(|&t| y[t - j]).collect());
    }
    for j in 1..=lag {
        d.push(format!("x_lag{j}"), rows.iter().map(|&t| x[t - j]).collect());
    }
    let res = ols(&d, &dep, true)?;

    // x-lag block: the last `lag` coefficients
    let p = res.coefficients.len();
    let block: Vec<usize> = (p - lag..p).collect();
    let b = DMatrix::from_iterator(lag, 1, block.iter().map(|&i| res.coefficients[i]));
    let mut v = DMatrix::<f64>::zeros(lag, lag);
    for (a, &i) in block.iter().enumerate() {
        for (c, &j) in block.iter().enumerate() {
            v[(a, c)] = res.cov_params[i][j];
        }
    }
    let chol = v
        .cholesky()
        .ok_or_else(|| Error::Singular("x-lag covariance block".into()))?;
    let z = chol.solve(&b);
    let wald_stat = (b.transpose() * z)[(0, 0)];

    let p_value = match variant {
        GrangerVariant::WaldChi2 => chi_square_sf(wald_stat, lag as f64),
        GrangerVariant::F => f_sf(
            wald_stat / lag as f64,
            lag as f64,
            res.df_resid as f64,
        ),
    };
    Ok(GrangerResult {
        lag,
        wald_stat,
        p_value,
        n_obs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn gauss(rng: &mut ChaCha8Rng) -> f64 {
        let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
        let u2: f64 = rng.gen_range(0.0..1.0);
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    #[test]
    fn planted_causality_is_detected() {
        let mut detected = 0;
        for seed in 0..100u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x: Vec<f64> = (0..1000).map(|_| gauss(&mut rng)).collect();
            let mut y = vec![0.0; 1000];
            for t in 1..1000 {
                y[t] = 0.8 * x[t - 1] + gauss(&mut rng);
            }
            let res = granger_test(&x, &y, 1, GrangerVariant::WaldChi2).unwrap();
            if res.p_value < 0.01 {
                detected += 1;
            }
        }
        assert!(detected >= 99, "detected {detected}/100");
    }

    #[test]
    fn size_under_independence() {
        let mut rejections = 0;
        for seed in 0..1000u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(10_000 + seed);
            let x: Vec<f64> = (0..1000).map(|_| gauss(&mut rng)).collect();
            let y: Vec<f64> = (0..1000).map(|_| gauss(&mut rng)).collect();
            let res = granger_test(&x, &y, 1, GrangerVariant::WaldChi2).unwrap();
            if res.p_value < 0.05 {
                rejections += 1;
            }
        }
        let rate = rejections as f64 / 1000.0;
        assert!(
            (rate - 0.05).abs() <= 0.02,
            "rejection rate {rate} outside 0.05 +- 0.02"
        );
    }

    #[test]
    fn wald_equals_squared_tstat_at_lag_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x: Vec<f64> = (0..300).map(|_| gauss(&mut rng)).collect();
        let mut y = vec![0.0; 300];
        for t in 1..300 {
            y[t] = 0.2 * y[t - 1] + 0.3 * x[t - 1] + gauss(&mut rng);
        }
        let res = granger_test(&x, &y, 1, GrangerVariant::WaldChi2).unwrap();

        // same regression by hand, t-stat of the single x lag
        let rows: Vec<usize> = (1..300).collect();
        let mut d = Design::new();
        d.push("y_lag1", rows.iter().map(|&t| y[t - 1]).collect());
        d.push("x_lag1", rows.iter().map(|&t| x[t - 1]).collect());
        let dep: Vec<f64> = rows.iter().map(|&t| y[t]).collect();
        let fit = ols(&d, &dep, true).unwrap();
        let t_x = fit.t_stats[2];
        assert!(
            (res.wald_stat - t_x * t_x).abs() < 1e-10,
            "{} vs {}",
            res.wald_stat,
            t_x * t_x
        );
    }

    #[test]
    fn paper_lag_grid_runs() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let x: Vec<f64> = (0..400).map(|_| gauss(&mut rng)).collect();
        let y: Vec<f64> = (0..400).map(|_| gauss(&mut rng)).collect();
        for lag in [1usize, 2, 5, 10] {
            let res = granger_test(&x, &y, lag, GrangerVariant::WaldChi2).unwrap();
            assert_eq!(res.lag, lag);
            assert!(res.wald_stat >= 0.0);
            assert!((0.0..=1.0).contains(&res.p_value));
        }
    }

    #[test]
    fn insufficient_observations_error() {
        let x = vec![0.0; 20];
        let y = vec![0.0; 20];
        assert!(granger_test(&x, &y, 5, GrangerVariant::WaldChi2).is_err());
    }
}
