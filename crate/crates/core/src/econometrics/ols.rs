//! Ordinary least squares with nonrobust inference.

use nalgebra::DMatrix;

use super::dist::student_t_sf;
use crate::error::{Error, Result};

/// Rank tolerance for the QR factorization: a column whose orthogonalized
/// norm falls below `RANK_TOL` times its original norm is treated as
/// linearly dependent on the columns before it.
const RANK_TOL: f64 = 1e-10;

/// Named design matrix, column major.
#[derive(Debug, Clone, Default)]
pub struct Design {
    names: Vec<String>,
    cols: Vec<Vec<f64>>,
    n_rows: usize,
}

impl Design {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, name: impl Into<String>, col: Vec<f64>) -> &mut Self {
        if self.cols.is_empty() {
            self.n_rows = col.len();
        } else {
            assert_eq!(col.len(), self.n_rows, "ragged design matrix");
        }
        self.names.push(name.into());
        self.cols.push(col);
        self
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.cols.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }
}

/// Regression output shared by every estimator in the crate.
#[derive(Debug, Clone)]
pub struct RegressionResult {
    pub names: Vec<String>,
    pub coefficients: Vec<f64>,
    pub standard_errors: Vec<f64>,
    pub t_stats: Vec<f64>,
    pub p_values: Vec<f64>,
    pub r_squared: f64,
    pub adj_r_squared: f64,
    pub n_obs: usize,
    pub df_resid: usize,
    pub residuals: Vec<f64>,
    /// sigma^2 (X'X)^-1, row major.
    pub cov_params: Vec<Vec<f64>>,
}

impl RegressionResult {
    pub fn coef(&self, name: &str) -> Option<f64> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.coefficients[i])
    }

    /// Serialization rows: variable, coef, se, t, p, then a footer row
    /// carrying the fit statistics.
    pub fn to_rows(&self) -> Vec<Vec<String>> {
        use crate::table::fmt_real;
        let mut rows = Vec::with_capacity(self.names.len() + 1);
        for i in 0..self.names.len() {
            rows.push(vec![
                self.names[i].clone(),
                fmt_real(self.coefficients[i]),
                fmt_real(self.standard_errors[i]),
                fmt_real(self.t_stats[i]),
                fmt_real(self.p_values[i]),
            ]);
        }
        rows.push(vec![
            format!("n={} r2={} adj_r2={}", self.n_obs, fmt_real(self.r_squared), fmt_real(self.adj_r_squared)),
            String::new(),
            String::new(),
            String::new(),
            String::new(),
        ]);
        rows
    }
}

/// OLS of `y` on the columns of `design`, optionally prepending an
/// intercept. Standard errors use the nonrobust sigma^2 (X'X)^-1 form;
/// p-values are two sided against t(df_resid).
pub fn ols(design: &Design, y: &[f64], intercept: bool) -> Result<RegressionResult> {
    let n = y.len();
    if design.n_cols() > 0 && design.n_rows() != n {
        return Err(Error::Invalid(format!(
            "design has {} rows but y has {}",
            design.n_rows(),
            n
        )));
    }
    let mut names: Vec<String> = Vec::new();
    let mut cols: Vec<&[f64]> = Vec::new();
    let ones;
    if intercept {
        ones = vec![1.0; n];
        names.push("const".to_string());
        cols.push(&ones);
    }
    for (name, col) in design.names.iter().zip(&design.cols) {
        names.push(name.clone());
        cols.push(col);
    }
    let p = cols.len();
    if p == 0 {
        return Err(Error::Invalid("empty design matrix".into()));
    }
    if n <= p {
        return Err(Error::Insufficient(format!(
            "{n} observations for {p} parameters"
        )));
    }

    let (q, r) = qr_mgs(&cols, &names)?;

    // beta = R^-1 Q'y
    let qty: Vec<f64> = (0..p).map(|j| dot(q.column(j).as_slice(), y)).collect();
    let beta = back_substitute(&r, &qty);

    // residuals and fit statistics
    let mut residuals = vec![0.0; n];
    let mut rss = 0.0;
    for i in 0..n {
        let mut fit = 0.0;
        for j in 0..p {
            fit += beta[j] * cols[j][i];
        }
        let e = y[i] - fit;
        residuals[i] = e;
        rss += e * e;
    }
    let df_resid = n - p;
    let sigma2 = rss / df_resid as f64;

    let tss = if intercept {
        let mean = y.iter().sum::<f64>() / n as f64;
        y.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
    } else {
        y.iter().map(|v| v * v).sum::<f64>()
    };
    let r_squared = if tss > 0.0 {
        1.0 - rss / tss
    } else if rss <= f64::EPSILON {
        1.0
    } else {
        0.0
    };
    let adj_factor = if intercept {
        (n as f64 - 1.0) / df_resid as f64
    } else {
        n as f64 / df_resid as f64
    };
    let adj_r_squared = 1.0 - (1.0 - r_squared) * adj_factor;

    // (X'X)^-1 = R^-1 R^-T
    let r_inv = invert_upper(&r);
    let mut cov = vec![vec![0.0; p]; p];
    for i in 0..p {
        for j in 0..p {
            let mut acc = 0.0;
            for k in i.max(j)..p {
                acc += r_inv[(i, k)] * r_inv[(j, k)];
            }
            cov[i][j] = acc * sigma2;
        }
    }

    let mut standard_errors = Vec::with_capacity(p);
    let mut t_stats = Vec::with_capacity(p);
    let mut p_values = Vec::with_capacity(p);
    for j in 0..p {
        let se = cov[j][j].max(0.0).sqrt();
        standard_errors.push(se);
        if se > 0.0 {
            let t = beta[j] / se;
            t_stats.push(t);
            p_values.push(2.0 * student_t_sf(t.abs(), df_resid as f64));
        } else {
            // perfect fit: the point estimate is exact
            t_stats.push(if beta[j] == 0.0 {
                0.0
            } else {
                beta[j].signum() * f64::INFINITY
            });
            p_values.push(if beta[j] == 0.0 { 1.0 } else { 0.0 });
        }
    }

    Ok(RegressionResult {
        names,
        coefficients: beta,
        standard_errors,
        t_stats,
        p_values,
        r_squared,
        adj_r_squared,
        n_obs: n,
        df_resid,
        residuals,
        cov_params: cov,
    })
}

/// Modified Gram-Schmidt QR with a per-column rank check. Returns (Q, R)
/// with Q n-by-p orthonormal and R p-by-p upper triangular.
fn qr_mgs(cols: &[&[f64]], names: &[String]) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let n = cols[0].len();
    let p = cols.len();
    let mut q = DMatrix::<f64>::zeros(n, p);
    let mut r = DMatrix::<f64>::zeros(p, p);
    for j in 0..p {
        let mut v: Vec<f64> = cols[j].to_vec();
        let orig_norm = norm(&v);
        for k in 0..j {
            let qk = q.column(k);
            let proj = dot(qk.as_slice(), &v);
            r[(k, j)] = proj;
            for i in 0..n {
                v[i] -= proj * qk[i];
            }
        }
        // re-orthogonalize once for numerical safety
        for k in 0..j {
            let qk = q.column(k);
            let proj = dot(qk.as_slice(), &v);
            r[(k, j)] += proj;
            for i in 0..n {
                v[i] -= proj * qk[i];
            }
        }
        let nv = norm(&v);
        if nv <= RANK_TOL * orig_norm.max(f64::MIN_POSITIVE) {
            return Err(Error::Singular(names[j].clone()));
        }
        r[(j, j)] = nv;
        for i in 0..n {
            q[(i, j)] = v[i] / nv;
        }
    }
    Ok((q, r))
}

fn back_substitute(r: &DMatrix<f64>, b: &[f64]) -> Vec<f64> {
    let p = b.len();
    let mut x = vec![0.0; p];
    for j in (0..p).rev() {
        let mut acc = b[j];
        for k in j + 1..p {
            acc -= r[(j, k)] * x[k];
        }
        x[j] = acc / r[(j, j)];
    }
    x
}

fn invert_upper(r: &DMatrix<f64>) -> DMatrix<f64> {
    let p = r.nrows();
    let mut inv = DMatrix::<f64>::zeros(p, p);
    for col in 0..p {
        let mut e = vec![0.0; p];
        e[col] = 1.0;
        let x = back_substitute(r, &e);
        for row in 0..p {
            inv[(row, col)] = x[row];
        }
    }
    inv
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
