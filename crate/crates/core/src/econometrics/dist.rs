//! Distribution tail probabilities via regularized incomplete gamma/beta
//! functions. Everything here is upper-tail (survival) oriented because the
//! test statistics in this crate only ever need upper tails.

use crate::error::{Error, Result};

/// Distributions supported by [`tail_probability`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailDist {
    StudentT { df: f64 },
    ChiSquare { df: f64 },
    F { d1: f64, d2: f64 },
    Normal,
}

/// Upper-tail probability P(X > x).
pub fn tail_probability(dist: TailDist, x: f64) -> Result<f64> {
    match dist {
        TailDist::StudentT { df } => {
            check_df(df)?;
            Ok(student_t_sf(x, df))
        }
        TailDist::ChiSquare { df } => {
            check_df(df)?;
            Ok(chi_square_sf(x, df))
        }
        TailDist::F { d1, d2 } => {
            check_df(d1)?;
            check_df(d2)?;
            Ok(f_sf(x, d1, d2))
        }
        TailDist::Normal => Ok(normal_sf(x)),
    }
}

fn check_df(df: f64) -> Result<()> {
    if df <= 0.0 || !df.is_finite() {
        return Err(Error::Invalid(format!(
            "degrees of freedom must be positive, got {df}"
        )));
    }
    Ok(())
}

/// Standard normal survival function.
pub fn normal_sf(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// Chi-square survival function.
pub fn chi_square_sf(x: f64, df: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    upper_gamma_reg(df / 2.0, x / 2.0)
}

/// Student-t survival function (two tails via symmetry).
pub fn student_t_sf(t: f64, df: f64) -> f64 {
    if t.is_nan() {
        return f64::NAN;
    }
    if t == 0.0 {
        return 0.5;
    }
    if t.is_infinite() {
        return if t > 0.0 { 0.0 } else { 1.0 };
    }
    let half = 0.5 * inc_beta_reg(df / 2.0, 0.5, df / (df + t * t));
    if t > 0.0 {
        half
    } else {
        1.0 - half
    }
}

/// F survival function.
pub fn f_sf(x: f64, d1: f64, d2: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    inc_beta_reg(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * x))
}

pub fn erfc(x: f64) -> f64 {
    if x >= 0.0 {
        upper_gamma_reg(0.5, x * x)
    } else {
        2.0 - upper_gamma_reg(0.5, x * x)
    }
}

// Lanczos approximation, g = 7, 9 terms.
#[allow(clippy::excessive_precision)]
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the gamma function for x > 0.
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // reflection formula
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

const MAX_ITER: usize = 500;
const EPS: f64 = 1e-16;

/// Regularized upper incomplete gamma Q(a, x).
pub fn upper_gamma_reg(a: f64, x: f64) -> f64 {
    debug_assert!(a > 0.0 && x >= 0.0);
    if x == 0.0 {
        return 1.0;
    }
    if x < a + 1.0 {
        1.0 - lower_gamma_series(a, x)
    } else {
        upper_gamma_cf(a, x)
    }
}

/// Regularized lower incomplete gamma P(a, x) by series expansion (x < a+1).
fn lower_gamma_series(a: f64, x: f64) -> f64 {
    let mut term = 1.0 / a;
    let mut sum = term;
    let mut ap = a;
    for _ in 0..MAX_ITER {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * EPS {
            break;
        }
    }
    sum * (-x + a * x.ln() - ln_gamma(a)).exp()
}

/// Regularized upper incomplete gamma Q(a, x) by continued fraction
/// (modified Lentz), valid for x >= a+1.
fn upper_gamma_cf(a: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..=MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h * (-x + a * x.ln() - ln_gamma(a)).exp()
}

/// Regularized incomplete beta I_x(a, b).
pub fn inc_beta_reg(a: f64, b: f64, x: f64) -> f64 {
    debug_assert!(a > 0.0 && b > 0.0);
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front =
        ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    let front = ln_front.exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_cf(a, b, x) / a
    } else {
        1.0 - front * beta_cf(b, a, 1.0 - x) / b
    }
}

/// Continued fraction for the incomplete beta (modified Lentz).
fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        // even step
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        // odd step
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}
