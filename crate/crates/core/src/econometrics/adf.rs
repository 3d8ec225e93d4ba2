//! Augmented Dickey-Fuller unit-root test, constant-only specification,
//! with AIC lag selection and MacKinnon (2010) response-surface critical
//! values.

use super::ols::{ols, Design};
use crate::error::{Error, Result};

/// MacKinnon (2010) response-surface coefficients for the constant,
/// no-trend case, one variable: cv = b0 + b1/T + b2/T^2 + b3/T^3.
const MACKINNON_1PCT: [f64; 4] = [-3.43035, -6.5393, -16.786, -79.433];
const MACKINNON_5PCT: [f64; 4] = [-2.86154, -2.8903, -4.234, -40.040];
const MACKINNON_10PCT: [f64; 4] = [-2.56677, -1.5384, -2.809, 0.0];

fn response_surface(c: &[f64; 4], n: f64) -> f64 {
    c[0] + c[1] / n + c[2] / (n * n) + c[3] / (n * n * n)
}

#[derive(Debug, Clone, Copy)]
pub struct AdfResult {
    /// t-statistic on the lagged level.
    pub stat: f64,
    /// Number of lagged differences included.
    pub lag_used: usize,
    /// stat < 5% critical value.
    pub stationary: bool,
    /// Observations in the final regression.
    pub n_obs: usize,
    pub crit_1pct: f64,
    pub crit_5pct: f64,
    pub crit_10pct: f64,
}

/// ADF test of `series`. Lag order is chosen by AIC over 0..=max_lag on a
/// common sample, then the statistic is re-estimated on the full sample
/// available for the chosen lag. Default max_lag is 12*(T/100)^(1/4).
pub fn adf_test(series: &[f64], max_lag: Option<usize>) -> Result<AdfResult> {
    let t_len = series.len();
    if t_len < 25 {
        return Err(Error::Insufficient(format!(
            "ADF test needs at least 25 observations, got {t_len}"
        )));
    }
    let mean = series.iter().sum::<f64>() / t_len as f64;
    if series.iter().all(|v| (v - mean).abs() < 1e-300) {
        return Err(Error::Invalid("zero-variance series".into()));
    }

    let default_lag = (12.0 * (t_len as f64 / 100.0).powf(0.25)).floor() as usize;
    let mut max_lag = max_lag.unwrap_or(default_lag);
    // keep enough rows to estimate the largest candidate
    let hard_cap = (t_len - 1).saturating_sub(10) / 2;
    max_lag = max_lag.min(hard_cap);

    let diffs: Vec<f64> = series.windows(2).map(|w| w[1] - w[0]).collect();

    // AIC selection on the common sample t in [max_lag+1, t_len-1]
    let mut best: Option<(f64, usize)> = None;
    for k in 0..=max_lag {
        let (rss, n_rows, _) = fit_adf(series, &diffs, k, max_lag + 1)?;
        if rss <= 0.0 {
            return Err(Error::Invalid(
                "degenerate ADF regression (zero residual variance)".into(),
            ));
        }
        let n = n_rows as f64;
        let llf = -0.5 * n * ((2.0 * std::f64::consts::PI).ln() + (rss / n).ln() + 1.0);
        let aic = 2.0 * (k as f64 + 2.0) - 2.0 * llf;
        if best.is_none_or(|(b, _)| aic < b) {
            best = Some((aic, k));
        }
    }
    let (_, lag_used) = best.unwrap();

    // refit on the full sample available at the chosen lag
    let (_, n_obs, stat) = fit_adf(series, &diffs, lag_used, lag_used + 1)?;
    let n = n_obs as f64;
    let crit_1pct = response_surface(&MACKINNON_1PCT, n);
    let crit_5pct = response_surface(&MACKINNON_5PCT, n);
    let crit_10pct = response_surface(&MACKINNON_10PCT, n);
    Ok(AdfResult {
        stat,
        lag_used,
        stationary: stat < crit_5pct,
        n_obs,
        crit_1pct,
        crit_5pct,
        crit_10pct,
    })
}

/// Regress dy_t on [const, y_{t-1}, dy_{t-1..t-k}] for t >= first_t.
/// Returns (rss, rows, t-stat of the level coefficient).
fn fit_adf(series: &[f64], diffs: &[f64], k: usize, first_t: usize) -> Result<(f64, usize, f64)> {
    let t_len = series.len();
    let rows: Vec<usize> = (first_t..t_len).collect();
    let n_rows = rows.len();
    if n_rows < k + 4 {
        return Err(Error::Insufficient(format!(
            "{n_rows} rows for ADF regression with {k} lags"
        )));
    }
    // diffs[t-1] holds y_t - y_{t-1}
    let y: Vec<f64> = rows.iter().map(|&t| diffs[t - 1]).collect();
    let mut d = Design::new();
    d.push("level", rows.iter().map(|&t| series[t - 1]).collect());
    for j in 1..=k {
        d.push(
            format!("dlag{j}"),
            rows.iter().map(|&t| diffs[t - 1 - j]).collect(),
        );
    }
    let res = ols(&d, &y, true)?;
    let rss: f64 = res.residuals.iter().map(|e| e * e).sum();
    // index 1: const is prepended at 0
    Ok((rss, n_rows, res.t_stats[1]))
}
