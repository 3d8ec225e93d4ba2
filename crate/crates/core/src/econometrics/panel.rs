//! Panel regression with time fixed effects absorbed by the within
//! transformation (per-period demeaning). No entity effects.

use std::collections::BTreeMap;

use super::dist::student_t_sf;
use super::ols::RegressionResult;
use crate::error::{Error, Result};

/// Fits y ~ x + gamma_t, demeaning every variable within each time period
/// and running OLS on the transformed data. Degrees of freedom are
/// corrected for the absorbed period intercepts, so standard errors match
/// the dummy-variable regression exactly.
pub fn panel_fe(
    time: &[usize],
    y: &[f64],
    x_cols: &[Vec<f64>],
    names: &[&str],
) -> Result<RegressionResult> {
    let n = y.len();
    let p = x_cols.len();
    if n == 0 || p == 0 {
        return Err(Error::Invalid("empty panel".into()));
    }
    if time.len() != n || x_cols.iter().any(|c| c.len() != n) || names.len() != p {
        return Err(Error::Invalid("panel column lengths disagree".into()));
    }

    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &t) in time.iter().enumerate() {
        groups.entry(t).or_default().push(i);
    }
    let n_periods = groups.len();
    if n <= p + n_periods {
        return Err(Error::Insufficient(format!(
            "{n} rows for {p} regressors and {n_periods} absorbed period effects"
        )));
    }

    let mut y_dm = y.to_vec();
    let mut x_dm: Vec<Vec<f64>> = x_cols.to_vec();
    for idx in groups.values() {
        let ni = idx.len() as f64;
        let y_mean = idx.iter().map(|&i| y[i]).sum::<f64>() / ni;
        for &i in idx {
            y_dm[i] -= y_mean;
        }
        for col in x_dm.iter_mut() {
            let m = idx.iter().map(|&i| col[i]).sum::<f64>() / ni;
            for &i in idx {
                col[i] -= m;
            }
        }
    }

    // OLS on demeaned data, no intercept (it is absorbed), with the
    // fixed-effects df correction applied to sigma^2.
    let mut d = super::ols::Design::new();
    for (name, col) in names.iter().zip(x_dm.iter()) {
        d.push(*name, col.clone());
    }
    let raw = super::ols::ols(&d, &y_dm, false)?;

    let rss: f64 = raw.residuals.iter().map(|e| e * e).sum();
    let df_resid = n - p - n_periods;
    let sigma2 = rss / df_resid as f64;
    // raw covariance is rss/(n-p) * (X'X)^-1; rescale to the panel df
    let raw_sigma2 = rss / (n - p) as f64;
    let scale = if raw_sigma2 > 0.0 { sigma2 / raw_sigma2 } else { 0.0 };

    let mut cov = raw.cov_params.clone();
    for row in cov.iter_mut() {
        for v in row.iter_mut() {
            *v *= scale;
        }
    }
    let mut standard_errors = Vec::with_capacity(p);
    let mut t_stats = Vec::with_capacity(p);
    let mut p_values = Vec::with_capacity(p);
    for j in 0..p {
        let se = cov[j][j].max(0.0).sqrt();
        standard_errors.push(se);
        if se > 0.0 {
            let t = raw.coefficients[j] / se;
            t_stats.push(t);
            p_values.push(2.0 * student_t_sf(t.abs(), df_resid as f64));
        } else {
            t_stats.push(0.0);
            p_values.push(1.0);
        }
    }

    let tss: f64 = y_dm.iter().map(|v| v * v).sum();
    let r_squared = if tss > 0.0 { 1.0 - rss / tss } else { 0.0 };
    let adj_r_squared = if tss > 0.0 {
        1.0 - (rss / df_resid as f64) / (tss / (n - n_periods) as f64)
    } else {
        0.0
    };

    Ok(RegressionResult {
        names: names.iter().map(|s| s.to_string()).collect(),
        coefficients: raw.coefficients,
        standard_errors,
        t_stats,
        p_values,
        r_squared,
        adj_r_squared,
        n_obs: n,
        df_resid,
        residuals: raw.residuals,
        cov_params: cov,
    })
}
