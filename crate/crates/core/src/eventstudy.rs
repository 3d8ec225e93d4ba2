//! Rolling CAPM fits, abnormal returns, the seven-day CAR, event-window
//! CAR profiles around posts, and the proactive-post flag.

use crate::corpus::{Post, SentimentLabel};
use crate::econometrics::dist::student_t_sf;
use crate::error::{Error, Result};

pub const DEFAULT_CAPM_WINDOW: usize = 180;
pub const DEFAULT_MIN_OBS: usize = 60;
pub const CAR_WINDOW: usize = 7;
pub const DEFAULT_HALF_WIDTH: usize = 14;

/// Tickers excluded by the CAR figure's meme filter.
pub const CAR_MEME_TICKERS: [&str; 2] = ["GME", "AMC"];

/// Per-day CAPM coefficients and abnormal returns (residuals).
#[derive(Debug, Clone)]
pub struct CapmFit {
    pub alpha: Vec<Option<f64>>,
    pub beta: Vec<Option<f64>>,
    /// Abnormal return: r_i,t - alpha_t - beta_t * r_m,t.
    pub residual: Vec<Option<f64>>,
    pub window_len: usize,
    pub min_obs: usize,
}

/// Rolling CAPM of asset returns on market returns. The regression window
/// is the up-to-`window` trading days ending at t-1 (the residual day is
/// excluded from its own fit); days with fewer than `min_obs` complete
/// observations, or zero market variance, are undefined.
pub fn fit_capm_rolling(
    asset_returns: &[Option<f64>],
    market_returns: &[Option<f64>],
    window: usize,
    min_obs: usize,
) -> Result<CapmFit> {
    if asset_returns.len() != market_returns.len() {
        return Err(Error::Invalid(format!(
            "series lengths differ: {} vs {}",
            asset_returns.len(),
            market_returns.len()
        )));
    }
    if min_obs < 2 || min_obs > window {
        return Err(Error::Invalid(format!(
            "min_obs {min_obs} must be in 2..=window ({window})"
        )));
    }
    let len = asset_returns.len();
    let mut alpha = vec![None; len];
    let mut beta = vec![None; len];
    let mut residual = vec![None; len];
    for t in 0..len {
        let lo = t.saturating_sub(window);
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for tau in lo..t {
            if let (Some(x), Some(y)) = (market_returns[tau], asset_returns[tau]) {
                xs.push(x);
                ys.push(y);
            }
        }
        if xs.len() < min_obs {
            continue;
        }
        let n = xs.len() as f64;
        let x_mean = xs.iter().sum::<f64>() / n;
        let y_mean = ys.iter().sum::<f64>() / n;
        let mut sxx = 0.0;
        let mut sxy = 0.0;
        for (x, y) in xs.iter().zip(&ys) {
            let dx = x - x_mean;
            sxx += dx * dx;
            sxy += dx * (y - y_mean);
        }
        if sxx == 0.0 {
            continue;
        }
        let b = sxy / sxx;
        let a = y_mean - b * x_mean;
        alpha[t] = Some(a);
        beta[t] = Some(b);
        if let (Some(rm), Some(ri)) = (market_returns[t], asset_returns[t]) {
            residual[t] = Some(ri - a - b * rm);
        }
    }
    Ok(CapmFit {
        alpha,
        beta,
        residual,
        window_len: window,
        min_obs,
    })
}

/// Trailing seven-day cumulative abnormal return.
#[derive(Debug, Clone)]
pub struct CarSeries {
    pub car7: Vec<Option<f64>>,
}

pub fn car7(fit: &CapmFit) -> CarSeries {
    let len = fit.residual.len();
    let mut car7 = vec![None; len];
    for t in 0..len {
        if t + 1 < CAR_WINDOW {
            continue;
        }
        let window = &fit.residual[t + 1 - CAR_WINDOW..=t];
        if window.iter().all(Option::is_some) {
            car7[t] = Some(window.iter().map(|r| r.unwrap()).sum());
        }
    }
    CarSeries { car7 }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SentimentGroup {
    Bullish,
    Bearish,
    Neutral,
    All,
}

impl SentimentGroup {
    pub fn label(&self) -> &'static str {
        match self {
            Self::Bullish => "bullish",
            Self::Bearish => "bearish",
            Self::Neutral => "neutral",
            Self::All => "all",
        }
    }
}

/// Mean and median CAR at each offset around post submission.
#[derive(Debug, Clone)]
pub struct CarProfile {
    pub group: SentimentGroup,
    /// Offsets run -half_width..=+half_width.
    pub half_width: usize,
    pub mean_car: Vec<f64>,
    pub median_car: Vec<f64>,
    pub post_count: usize,
}

/// CAR profiles around the posts of one ticker, grouped by sentiment plus
/// a pooled group. Posts whose +-half_width window is not fully defined
/// are dropped; groups with no eligible posts are absent.
pub fn car_profile(posts: &[Post], car: &CarSeries, half_width: usize) -> Vec<CarProfile> {
    car_profile_multi(&[(posts, car)], half_width)
}

/// Profiles pooled over several tickers, each post's window taken from
/// its own ticker's CAR series.
pub fn car_profile_multi(
    groups_in: &[(&[Post], &CarSeries)],
    half_width: usize,
) -> Vec<CarProfile> {
    let width = 2 * half_width + 1;
    // windows per post, then grouped
    let mut windows: Vec<(SentimentLabel, Vec<f64>)> = Vec::new();
    for (posts, car) in groups_in {
        let len = car.car7.len();
        for post in posts.iter() {
            let Some(day) = post.trading_day else { continue };
            if day < half_width || day + half_width >= len {
                continue;
            }
            let window: Option<Vec<f64>> = (day - half_width..=day + half_width)
                .map(|t| car.car7[t])
                .collect();
            if let Some(w) = window {
                windows.push((post.sentiment_label, w));
            }
        }
    }
    let groups = [
        (SentimentGroup::Bullish, Some(SentimentLabel::Bullish)),
        (SentimentGroup::Bearish, Some(SentimentLabel::Bearish)),
        (SentimentGroup::Neutral, Some(SentimentLabel::Neutral)),
        (SentimentGroup::All, None),
    ];
    let mut out = Vec::new();
    for (group, wanted) in groups {
        let member: Vec<&Vec<f64>> = windows
            .iter()
            .filter(|(label, _)| wanted.is_none_or(|w| *label == w))
            .map(|(_, w)| w)
            .collect();
        if member.is_empty() {
            continue;
        }
        let mut mean_car = vec![0.0; width];
        let mut median_car = vec![0.0; width];
        for k in 0..width {
            let mut vals: Vec<f64> = member.iter().map(|w| w[k]).collect();
            mean_car[k] = vals.iter().sum::<f64>() / vals.len() as f64;
            vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let m = vals.len();
            median_car[k] = if m % 2 == 1 {
                vals[m / 2]
            } else {
                0.5 * (vals[m / 2 - 1] + vals[m / 2])
            };
        }
        out.push(CarProfile {
            group,
            half_width,
            mean_car,
            median_car,
            post_count: member.len(),
        });
    }
    out
}

pub const PROACTIVE_MIN_HISTORY: usize = 30;

/// A post is proactive when the day's CAR is statistically
/// indistinguishable from the ticker's trailing CAR history: the t-score
/// of car7(t) against the history mean and standard deviation fails to
/// reject at level `alpha`.
pub fn proactive_flag(car: &CarSeries, t: usize, alpha: f64) -> Result<bool> {
    let value = car
        .car7
        .get(t)
        .copied()
        .flatten()
        .ok_or_else(|| Error::Undefined(format!("car7 undefined at day {t}")))?;
    let history: Vec<f64> = car.car7[..t].iter().flatten().copied().collect();
    let n = history.len();
    if n < PROACTIVE_MIN_HISTORY {
        return Err(Error::Insufficient(format!(
            "{n} trailing CAR values before day {t}, need {PROACTIVE_MIN_HISTORY}"
        )));
    }
    let nf = n as f64;
    let mean = history.iter().sum::<f64>() / nf;
    let var = history.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (nf - 1.0);
    let sd = var.sqrt();
    if sd == 0.0 {
        return Err(Error::Undefined(
            "zero-variance CAR history; the test is undefined".into(),
        ));
    }
    let t_stat = (value - mean) / sd;
    let p = 2.0 * student_t_sf(t_stat.abs(), nf - 1.0);
    Ok(p >= alpha)
}
