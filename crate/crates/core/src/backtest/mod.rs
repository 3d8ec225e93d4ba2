//! Portfolio accounting for sentiment-directed strategies, the control
//! portfolios, the due-diligence model grid, the sentiment-to-return
//! Granger suite, and the entropy-to-VIX regression harness.

mod ddgrid;

pub use ddgrid::{
    dd_model_grid, enumerate_grid, DdGridConfig, DdGridOutcome, DdSide, ExtraFeature,
    GridFitStatus, GridInputs, TimeFilter, GRID_MEME_TICKERS,
};

use std::collections::BTreeMap;

use chrono::Datelike;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{DdLabel, Post, SentimentLabel};
use crate::econometrics::{
    adf_test, granger_test, ols, summary_stats, Design, GrangerResult, GrangerVariant,
    RegressionResult, SummaryStats,
};
use crate::error::{Error, Result};
use crate::marketdata::{PriceSeries, TradingCalendar};
use crate::signals::{
    build_daily_series, ActivityWindow,
};

/// Which posts enter the portfolio, and where directions come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PortfolioFilter {
    /// Every non-neutral post, direction from the sentiment label.
    AllSubmissions,
    /// Posts flaired "DD", direction from the sentiment label.
    FlairedDd,
    /// Hand-labeled DD posts, direction from the DD label.
    LabeledDd,
}

/// One directed next-day trade implied by a post.
#[derive(Debug, Clone)]
pub struct TradeSample {
    pub post_id: String,
    pub ticker: String,
    pub day: usize,
    /// +1 bullish, -1 bearish.
    pub direction: i8,
    /// direction times the next-day log return.
    pub realized: f64,
}

#[derive(Debug, Clone)]
pub struct PortfolioOutcome {
    pub samples: Vec<TradeSample>,
    pub stats: SummaryStats,
    /// Posts skipped because of price gaps.
    pub dropped: usize,
}

fn direction_of(post: &Post, filter: PortfolioFilter) -> Option<i8> {
    match filter {
        PortfolioFilter::AllSubmissions | PortfolioFilter::FlairedDd => {
            match post.sentiment_label {
                SentimentLabel::Bullish => Some(1),
                SentimentLabel::Bearish => Some(-1),
                SentimentLabel::Neutral => None,
            }
        }
        PortfolioFilter::LabeledDd => post.dd_label.map(|l| match l {
            DdLabel::Bullish => 1,
            DdLabel::Bearish => -1,
        }),
    }
}

fn eligible(post: &Post, filter: PortfolioFilter) -> bool {
    match filter {
        PortfolioFilter::AllSubmissions => true,
        PortfolioFilter::FlairedDd => post.flair.as_deref() == Some("DD"),
        PortfolioFilter::LabeledDd => post.is_dd && post.dd_label.is_some(),
    }
}

/// Builds next-day trade samples; posts whose next-day return is not
/// priced are counted as dropped.
pub fn portfolio_samples(
    posts: &[Post],
    prices: &BTreeMap<String, PriceSeries>,
    calendar_len: usize,
    filter: PortfolioFilter,
) -> (Vec<TradeSample>, usize) {
    let returns: BTreeMap<&str, Vec<Option<f64>>> = prices
        .iter()
        .map(|(t, s)| (t.as_str(), s.returns_by_day(calendar_len)))
        .collect();
    let mut samples = Vec::new();
    let mut dropped = 0;
    for post in posts {
        if !eligible(post, filter) {
            continue;
        }
        let Some(direction) = direction_of(post, filter) else { continue };
        let (Some(ticker), Some(day)) = (post.single_ticker(), post.trading_day) else {
            continue;
        };
        let next_day_return = returns
            .get(ticker)
            .and_then(|r| r.get(day + 1).copied().flatten());
        match next_day_return {
            Some(r) => samples.push(TradeSample {
                post_id: post.id.clone(),
                ticker: ticker.to_string(),
                day,
                direction,
                realized: direction as f64 * r,
            }),
            None => dropped += 1,
        }
    }
    (samples, dropped)
}

/// Next-day portfolio for the given filter with its summary statistics.
pub fn sentiment_portfolio(
    posts: &[Post],
    prices: &BTreeMap<String, PriceSeries>,
    calendar_len: usize,
    filter: PortfolioFilter,
) -> Result<PortfolioOutcome> {
    let (samples, dropped) = portfolio_samples(posts, prices, calendar_len, filter);
    if samples.is_empty() {
        return Err(Error::Insufficient(
            "no eligible posts produced a trade sample".into(),
        ));
    }
    let realized: Vec<f64> = samples.iter().map(|s| s.realized).collect();
    let stats = summary_stats(&realized)?;
    Ok(PortfolioOutcome {
        samples,
        stats,
        dropped,
    })
}

/// Random-control samples: same tickers and directions as the posts, but
/// the trading day is drawn uniformly from the ticker's priced-return
/// days. Bit-reproducible for a fixed seed; posts whose ticker has no
/// priced day are dropped and counted.
pub fn random_samples(
    posts: &[Post],
    prices: &BTreeMap<String, PriceSeries>,
    calendar_len: usize,
    seed: u64,
) -> (Vec<TradeSample>, usize) {
    let returns: BTreeMap<&str, Vec<Option<f64>>> = prices
        .iter()
        .map(|(t, s)| (t.as_str(), s.returns_by_day(calendar_len)))
        .collect();
    let priced_days: BTreeMap<&str, Vec<usize>> = returns
        .iter()
        .map(|(t, r)| {
            (
                *t,
                r.iter()
                    .enumerate()
                    .filter_map(|(d, v)| v.map(|_| d))
                    .collect::<Vec<usize>>(),
            )
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = Vec::new();
    let mut dropped = 0;
    for post in posts {
        let Some(direction) = direction_of(post, PortfolioFilter::AllSubmissions) else {
            continue;
        };
        let Some(ticker) = post.single_ticker() else { continue };
        match priced_days.get(ticker) {
            Some(days) if !days.is_empty() => {
                let day = days[rng.gen_range(0..days.len())];
                let r = returns[ticker][day].unwrap();
                samples.push(TradeSample {
                    post_id: post.id.clone(),
                    ticker: ticker.to_string(),
                    day,
                    direction,
                    realized: direction as f64 * r,
                });
            }
            _ => dropped += 1,
        }
    }
    (samples, dropped)
}

#[derive(Debug, Clone)]
pub struct ControlPortfolios {
    /// Every daily log return of every mentioned stock.
    pub stock_returns: SummaryStats,
    /// Directed return on the submission trading day itself.
    pub previous: PortfolioOutcome,
    /// Directed return on a uniformly drawn priced day of the same ticker.
    pub random: PortfolioOutcome,
}

pub fn control_portfolios(
    posts: &[Post],
    prices: &BTreeMap<String, PriceSeries>,
    calendar_len: usize,
    seed: u64,
) -> Result<ControlPortfolios> {
    // (a) pooled daily returns of every stock mentioned at least once
    let mentioned: std::collections::BTreeSet<&str> = posts
        .iter()
        .filter_map(|p| p.single_ticker())
        .collect();
    let mut all_returns = Vec::new();
    for (ticker, series) in prices {
        if mentioned.contains(ticker.as_str()) {
            all_returns.extend(series.returns_by_day(calendar_len).into_iter().flatten());
        }
    }
    let stock_returns = summary_stats(&all_returns)?;

    let returns: BTreeMap<&str, Vec<Option<f64>>> = prices
        .iter()
        .map(|(t, s)| (t.as_str(), s.returns_by_day(calendar_len)))
        .collect();

    // (b) previous: the return already realized on the post's trading day
    let mut prev_samples = Vec::new();
    let mut prev_dropped = 0;
    for post in posts {
        let Some(direction) = direction_of(post, PortfolioFilter::AllSubmissions) else {
            continue;
        };
        let (Some(ticker), Some(day)) = (post.single_ticker(), post.trading_day) else {
            continue;
        };
        match returns.get(ticker).and_then(|r| r.get(day).copied().flatten()) {
            Some(r) => prev_samples.push(TradeSample {
                post_id: post.id.clone(),
                ticker: ticker.to_string(),
                day,
                direction,
                realized: direction as f64 * r,
            }),
            None => prev_dropped += 1,
        }
    }
    if prev_samples.is_empty() {
        return Err(Error::Insufficient("no samples for the Previous control".into()));
    }
    let prev_realized: Vec<f64> = prev_samples.iter().map(|s| s.realized).collect();
    let previous = PortfolioOutcome {
        stats: summary_stats(&prev_realized)?,
        samples: prev_samples,
        dropped: prev_dropped,
    };

    let (rand_samples, rand_dropped) = random_samples(posts, prices, calendar_len, seed);
    if rand_samples.is_empty() {
        return Err(Error::Insufficient("no samples for the Random control".into()));
    }
    let rand_realized: Vec<f64> = rand_samples.iter().map(|s| s.realized).collect();
    let random = PortfolioOutcome {
        stats: summary_stats(&rand_realized)?,
        samples: rand_samples,
        dropped: rand_dropped,
    };

    Ok(ControlPortfolios {
        stock_returns,
        previous,
        random,
    })
}

/// Sentiment portfolio per community; clusters with fewer than
/// `min_posts` samples are omitted.
pub fn cluster_portfolio(
    membership: &BTreeMap<String, usize>,
    posts: &[Post],
    prices: &BTreeMap<String, PriceSeries>,
    calendar_len: usize,
    min_posts: usize,
) -> Result<Vec<(usize, PortfolioOutcome)>> {
    let n_clusters = membership.values().max().map_or(0, |m| m + 1);
    let mut out = Vec::new();
    for cluster in 0..n_clusters {
        let cluster_posts: Vec<Post> = posts
            .iter()
            .filter(|p| {
                p.single_ticker()
                    .and_then(|t| membership.get(t))
                    .is_some_and(|&c| c == cluster)
            })
            .cloned()
            .collect();
        let (samples, dropped) = portfolio_samples(
            &cluster_posts,
            prices,
            calendar_len,
            PortfolioFilter::AllSubmissions,
        );
        if samples.len() < min_posts.max(2) {
            continue;
        }
        let realized: Vec<f64> = samples.iter().map(|s| s.realized).collect();
        let stats = summary_stats(&realized)?;
        out.push((
            cluster,
            PortfolioOutcome {
                samples,
                stats,
                dropped,
            },
        ));
    }
    Ok(out)
}

/// OLS of next-month volatility on current-month close and topic entropy.
pub fn entropy_vix_regression(
    monthly_entropy: &BTreeMap<(i32, u32), f64>,
    vix: &BTreeMap<(i32, u32), f64>,
) -> Result<RegressionResult> {
    let start = match (monthly_entropy.keys().next(), vix.keys().next()) {
        (Some(&a), Some(&b)) => a.max(b),
        _ => return Err(Error::Insufficient("empty entropy or VIX series".into())),
    };
    let end = monthly_entropy
        .keys()
        .next_back()
        .copied()
        .unwrap()
        .min(vix.keys().next_back().copied().unwrap());
    if start > end {
        return Err(Error::Insufficient("entropy and VIX series do not overlap".into()));
    }
    let mut months = Vec::new();
    let mut gaps = Vec::new();
    let mut m = start;
    loop {
        let has_e = monthly_entropy.contains_key(&m);
        let has_v = vix.contains_key(&m);
        if has_e && has_v {
            months.push(m);
        } else {
            gaps.push(format!(
                "{}-{:02} ({})",
                m.0,
                m.1,
                if has_e { "missing VIX" } else { "missing entropy" }
            ));
        }
        if m == end {
            break;
        }
        m = if m.1 == 12 { (m.0 + 1, 1) } else { (m.0, m.1 + 1) };
    }
    if !gaps.is_empty() {
        return Err(Error::MissingData(format!(
            "misaligned months: {}",
            gaps.join(", ")
        )));
    }
    if months.len() < 25 {
        return Err(Error::Insufficient(format!(
            "{} aligned months; need at least 24 regression rows",
            months.len()
        )));
    }
    let mut y = Vec::new();
    let mut close = Vec::new();
    let mut entropy = Vec::new();
    for w in months.windows(2) {
        close.push(vix[&w[0]]);
        entropy.push(monthly_entropy[&w[0]]);
        y.push(vix[&w[1]]);
    }
    let mut d = Design::new();
    d.push("adj_close", close);
    d.push("entropy", entropy);
    ols(&d, &y, true)
}

/// Per-ticker Granger rows, mirroring the published table layout.
#[derive(Debug, Clone)]
pub struct GrangerSuiteRow {
    pub ticker: String,
    pub lag: usize,
    pub result: Option<GrangerResult>,
    pub status: GrangerRowStatus,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GrangerRowStatus {
    Ok,
    /// ADF screening rejected stationarity for one of the series.
    ScreenFailed(String),
    /// Not enough aligned history.
    Insufficient(String),
}

/// Start-of-sample rule for the per-ticker series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StartRule {
    /// The later of 2016-01-01 and the ticker's first mention: early
    /// low-activity forum years are cut off.
    #[default]
    Cutoff2016,
    /// The ticker's first mention.
    FirstMention,
}

pub const GRANGER_LAGS: [usize; 4] = [1, 2, 5, 10];

/// Runs the sentiment-change to return Granger tests for each ticker at
/// lags 1, 2, 5, 10, screening both series with the ADF test first.
pub fn granger_suite(
    posts: &[Post],
    prices: &BTreeMap<String, PriceSeries>,
    calendar: &TradingCalendar,
    tickers: &[String],
    start_rule: StartRule,
    activity: ActivityWindow,
) -> Vec<GrangerSuiteRow> {
    let mut rows = Vec::new();
    for ticker in tickers {
        let mut emit_all = |status: GrangerRowStatus| {
            for lag in GRANGER_LAGS {
                rows.push(GrangerSuiteRow {
                    ticker: ticker.clone(),
                    lag,
                    result: None,
                    status: status.clone(),
                });
            }
        };
        let Some(series) = prices.get(ticker) else {
            emit_all(GrangerRowStatus::Insufficient("no price data".into()));
            continue;
        };
        let first_mention = posts
            .iter()
            .filter(|p| p.single_ticker() == Some(ticker.as_str()))
            .filter_map(|p| p.trading_day)
            .min();
        let Some(first_mention) = first_mention else {
            emit_all(GrangerRowStatus::Insufficient("no posts".into()));
            continue;
        };
        let start = match start_rule {
            StartRule::FirstMention => first_mention,
            StartRule::Cutoff2016 => {
                let cutoff = chrono::NaiveDate::from_ymd_opt(2016, 1, 1).unwrap();
                let cut_idx = calendar.first_on_or_after(cutoff).unwrap_or(0);
                first_mention.max(cut_idx)
            }
        };
        let daily = build_daily_series(posts, ticker, calendar, activity);
        let returns = series.returns_by_day(calendar.len());
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for t in start..calendar.len() {
            if let (Some(ds), Some(r)) = (daily.d_s_hat[t], returns[t]) {
                xs.push(ds);
                ys.push(r);
            }
        }
        let screen = |name: &str, series: &[f64]| -> std::result::Result<(), GrangerRowStatus> {
            match adf_test(series, None) {
                Ok(res) if res.stationary => Ok(()),
                Ok(_) => Err(GrangerRowStatus::ScreenFailed(format!(
                    "{name} not stationary"
                ))),
                Err(e) => Err(GrangerRowStatus::Insufficient(format!("{name}: {e}"))),
            }
        };
        if let Err(status) = screen("sentiment change", &xs) {
            emit_all(status);
            continue;
        }
        if let Err(status) = screen("returns", &ys) {
            emit_all(status);
            continue;
        }
        for lag in GRANGER_LAGS {
            match granger_test(&xs, &ys, lag, GrangerVariant::WaldChi2) {
                Ok(result) => rows.push(GrangerSuiteRow {
                    ticker: ticker.clone(),
                    lag,
                    result: Some(result),
                    status: GrangerRowStatus::Ok,
                }),
                Err(e) => rows.push(GrangerSuiteRow {
                    ticker: ticker.clone(),
                    lag,
                    result: None,
                    status: GrangerRowStatus::Insufficient(e.to_string()),
                }),
            }
        }
    }
    rows
}

/// Significance stars: * p<0.05, ** p<0.01, *** p<0.001.
pub fn stars(p: f64) -> &'static str {
    if p < 0.001 {
        "***"
    } else if p < 0.01 {
        "**"
    } else if p < 0.05 {
        "*"
    } else {
        ""
    }
}

/// US/Eastern civil year of a post, used by the grid time filters.
pub fn post_year(post: &Post) -> i32 {
    crate::marketdata::eastern_date_of(post.created_utc).year()
}
