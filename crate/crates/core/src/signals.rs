//! Sentiment and attention time series, plus the monthly topic-entropy
//! metric.

use std::collections::BTreeMap;

use chrono::{Datelike, NaiveDate};

use crate::corpus::Post;
use crate::error::{Error, Result};
use crate::marketdata::{eastern_date_of, TradingCalendar};

/// Window convention for the trailing forum-activity average n_t.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ActivityWindow {
    /// Trailing 7 civil days ending at the trading day's date.
    #[default]
    CalendarDays,
    /// Trailing 7 trading days.
    TradingDays,
}

/// Net sentiment sum S and post count per trading day for one ticker.
/// Days with no posts carry S = 0, n = 0.
pub fn daily_aggregate(
    posts: &[Post],
    ticker: &str,
    calendar: &TradingCalendar,
) -> (Vec<f64>, Vec<u32>) {
    let mut s = vec![0.0; calendar.len()];
    let mut n = vec![0u32; calendar.len()];
    for post in posts {
        if let Some(day) = post.trading_day {
            if post.tickers.iter().any(|t| t == ticker) {
                s[day] += post.sentiment_score;
                n[day] += 1;
            }
        }
    }
    (s, n)
}

/// Total forum posts per trading day (all tickers).
pub fn daily_forum_totals(posts: &[Post], calendar: &TradingCalendar) -> Vec<f64> {
    let mut n = vec![0.0; calendar.len()];
    for post in posts {
        if let Some(day) = post.trading_day {
            if day < calendar.len() {
                n[day] += 1.0;
            }
        }
    }
    n
}

/// Trailing 7-day average of total forum post counts, n_t. The first six
/// output points are undefined.
pub fn forum_activity(
    posts: &[Post],
    calendar: &TradingCalendar,
    window: ActivityWindow,
) -> Vec<Option<f64>> {
    match window {
        ActivityWindow::CalendarDays => {
            let mut per_date: BTreeMap<NaiveDate, f64> = BTreeMap::new();
            for post in posts {
                *per_date.entry(eastern_date_of(post.created_utc)).or_insert(0.0) += 1.0;
            }
            (0..calendar.len())
                .map(|i| {
                    if i < 6 {
                        return None;
                    }
                    let end = calendar.date(i);
                    let total: f64 = (0..7)
                        .map(|k| {
                            per_date
                                .get(&(end - chrono::Days::new(k)))
                                .copied()
                                .unwrap_or(0.0)
                        })
                        .sum();
                    Some(total / 7.0)
                })
                .collect()
        }
        ActivityWindow::TradingDays => {
            let totals = daily_forum_totals(posts, calendar);
            (0..calendar.len())
                .map(|i| {
                    if i < 6 {
                        None
                    } else {
                        Some(totals[i - 6..=i].iter().sum::<f64>() / 7.0)
                    }
                })
                .collect()
        }
    }
}

/// Normalized sentiment S_hat = S / n_t and its first difference.
/// Undefined wherever n_t is undefined or zero.
pub fn normalized_sentiment_change(
    s: &[f64],
    n_forum: &[Option<f64>],
) -> (Vec<Option<f64>>, Vec<Option<f64>>) {
    assert_eq!(s.len(), n_forum.len());
    let s_hat: Vec<Option<f64>> = s
        .iter()
        .zip(n_forum)
        .map(|(s, n)| match n {
            Some(n) if *n > 0.0 => Some(s / n),
            _ => None,
        })
        .collect();
    let d_s_hat = first_difference(&s_hat);
    (s_hat, d_s_hat)
}

/// Agreement measure S_N = S / n_asset in [-1, 1] and its first
/// difference; undefined on days without posts.
pub fn agreement(s: &[f64], n_asset: &[f64]) -> (Vec<Option<f64>>, Vec<Option<f64>>) {
    assert_eq!(s.len(), n_asset.len());
    let s_norm: Vec<Option<f64>> = s
        .iter()
        .zip(n_asset)
        .map(|(s, n)| if *n > 0.0 { Some(s / n) } else { None })
        .collect();
    let d_s_norm = first_difference(&s_norm);
    (s_norm, d_s_norm)
}

fn first_difference(xs: &[Option<f64>]) -> Vec<Option<f64>> {
    let mut out = vec![None; xs.len()];
    for t in 1..xs.len() {
        if let (Some(a), Some(b)) = (xs[t], xs[t - 1]) {
            out[t] = Some(a - b);
        }
    }
    out
}

/// Attention momentum M_t = log((n_{i,t}/n_t) / (n_{i,t-1}/n_{t-1})),
/// undefined when any of the four counts is zero.
pub fn momentum(n_asset: &[f64], n_forum_totals: &[f64]) -> Vec<Option<f64>> {
    assert_eq!(n_asset.len(), n_forum_totals.len());
    let mut out = vec![None; n_asset.len()];
    for t in 1..n_asset.len() {
        let (a1, a0) = (n_asset[t], n_asset[t - 1]);
        let (f1, f0) = (n_forum_totals[t], n_forum_totals[t - 1]);
        if a1 > 0.0 && a0 > 0.0 && f1 > 0.0 && f0 > 0.0 {
            out[t] = Some(((a1 / f1) / (a0 / f0)).ln());
        }
    }
    out
}

/// Per-ticker daily series bundle emitted by the `signals` command.
#[derive(Debug, Clone)]
pub struct SentimentSeries {
    pub ticker: String,
    pub s: Vec<f64>,
    pub n_asset: Vec<u32>,
    pub n_forum: Vec<Option<f64>>,
    pub s_hat: Vec<Option<f64>>,
    pub d_s_hat: Vec<Option<f64>>,
    pub s_norm: Vec<Option<f64>>,
    pub d_s_norm: Vec<Option<f64>>,
    pub momentum: Vec<Option<f64>>,
}

pub fn build_daily_series(
    posts: &[Post],
    ticker: &str,
    calendar: &TradingCalendar,
    window: ActivityWindow,
) -> SentimentSeries {
    let (s, n_asset) = daily_aggregate(posts, ticker, calendar);
    let n_forum = forum_activity(posts, calendar, window);
    let (s_hat, d_s_hat) = normalized_sentiment_change(&s, &n_forum);
    let n_asset_f: Vec<f64> = n_asset.iter().map(|&n| n as f64).collect();
    let (s_norm, d_s_norm) = agreement(&s, &n_asset_f);
    let totals = daily_forum_totals(posts, calendar);
    let momentum = momentum(&n_asset_f, &totals);
    SentimentSeries {
        ticker: ticker.to_string(),
        s,
        n_asset,
        n_forum,
        s_hat,
        d_s_hat,
        s_norm,
        d_s_norm,
        momentum,
    }
}

/// Bucketing for the longer-horizon signals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Period {
    /// ISO week.
    Week,
    /// Calendar month.
    Month,
}

pub type PeriodKey = (i32, u32);

pub fn period_key(date: NaiveDate, period: Period) -> PeriodKey {
    match period {
        Period::Week => {
            let iso = date.iso_week();
            (iso.year(), iso.week())
        }
        Period::Month => (date.year(), date.month()),
    }
}

fn next_period(key: PeriodKey, period: Period) -> PeriodKey {
    match period {
        Period::Month => {
            if key.1 == 12 {
                (key.0 + 1, 1)
            } else {
                (key.0, key.1 + 1)
            }
        }
        Period::Week => {
            // step a week forward from the Monday of this ISO week
            let monday =
                NaiveDate::from_isoywd_opt(key.0, key.1, chrono::Weekday::Mon).expect("iso week");
            period_key(monday + chrono::Days::new(7), Period::Week)
        }
    }
}

/// Consecutive period keys covering the calendar span.
pub fn calendar_periods(calendar: &TradingCalendar, period: Period) -> Vec<PeriodKey> {
    let first = period_key(calendar.date(0), period);
    let last = period_key(calendar.date(calendar.len() - 1), period);
    let mut keys = vec![first];
    let mut k = first;
    while k != last {
        k = next_period(k, period);
        keys.push(k);
    }
    keys
}

/// One ticker-period observation of the long-horizon signal panel:
/// forum variables at period t and market outcomes at t and t+1.
#[derive(Debug, Clone)]
pub struct LongTermRow {
    pub ticker: String,
    pub key: PeriodKey,
    pub momentum: f64,
    pub s_norm: f64,
    pub d_s_norm: f64,
    /// Log return over the period (sum of daily log returns).
    pub ret: f64,
    /// Realized volatility: sample sd of daily log returns in the period.
    pub sigma: f64,
    pub next_ret: f64,
    pub next_sigma: f64,
}

/// Builds the weekly/monthly panel behind the long-term signal
/// regressions. The period grid spans the trading calendar; a row exists
/// where momentum and the sentiment terms are defined (posts in the
/// current and previous period) and both the current and next period
/// have priced returns.
pub fn long_term_panel(
    posts: &[Post],
    prices: &BTreeMap<String, crate::marketdata::PriceSeries>,
    calendar: &TradingCalendar,
    tickers: &[String],
    period: Period,
) -> Vec<LongTermRow> {
    let keys = calendar_periods(calendar, period);
    let index: BTreeMap<PeriodKey, usize> =
        keys.iter().enumerate().map(|(i, k)| (*k, i)).collect();
    // forum totals per period over all posts
    let mut n_forum = vec![0.0; keys.len()];
    for post in posts {
        let key = period_key(eastern_date_of(post.created_utc), period);
        if let Some(&i) = index.get(&key) {
            n_forum[i] += 1.0;
        }
    }
    let mut rows = Vec::new();
    for ticker in tickers {
        let Some(series) = prices.get(ticker) else { continue };
        let returns = series.returns_by_day(calendar.len());
        let mut daily: Vec<Vec<f64>> = vec![Vec::new(); keys.len()];
        for t in 0..calendar.len() {
            if let Some(r) = returns[t] {
                daily[index[&period_key(calendar.date(t), period)]].push(r);
            }
        }
        let stats = |i: usize| -> Option<(f64, f64)> {
            let d = &daily[i];
            if d.len() < 2 {
                return None;
            }
            let n = d.len() as f64;
            let total: f64 = d.iter().sum();
            let mean = total / n;
            let var = d.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / (n - 1.0);
            Some((total, var.sqrt()))
        };
        let mut s = vec![0.0; keys.len()];
        let mut n_asset = vec![0.0; keys.len()];
        for post in posts {
            if post.tickers.iter().any(|t| t == ticker) {
                let key = period_key(eastern_date_of(post.created_utc), period);
                if let Some(&i) = index.get(&key) {
                    s[i] += post.sentiment_score;
                    n_asset[i] += 1.0;
                }
            }
        }
        let mom = momentum(&n_asset, &n_forum);
        let (s_norm, d_s_norm) = agreement(&s, &n_asset);
        for i in 0..keys.len().saturating_sub(1) {
            let (Some(m), Some(sn), Some(dsn)) = (mom[i], s_norm[i], d_s_norm[i]) else {
                continue;
            };
            let (Some((ret, sigma)), Some((next_ret, next_sigma))) = (stats(i), stats(i + 1))
            else {
                continue;
            };
            rows.push(LongTermRow {
                ticker: ticker.clone(),
                key: keys[i],
                momentum: m,
                s_norm: sn,
                d_s_norm: dsn,
                ret,
                sigma,
                next_ret,
                next_sigma,
            });
        }
    }
    rows
}

/// Share of monthly attention per topic.
#[derive(Debug, Clone)]
pub struct TopicDistribution {
    pub year: i32,
    pub month: u32,
    pub topics: Vec<u32>,
    pub probs: Vec<f64>,
    pub post_counts: Vec<usize>,
}

pub fn monthly_topic_distribution(
    posts: &[Post],
    year: i32,
    month: u32,
) -> Result<TopicDistribution> {
    let mut counts: BTreeMap<u32, usize> = BTreeMap::new();
    for post in posts {
        if let Some(topic) = post.topic_id {
            let date = eastern_date_of(post.created_utc);
            if date.year() == year && date.month() == month {
                *counts.entry(topic).or_insert(0) += 1;
            }
        }
    }
    let total: usize = counts.values().sum();
    if total == 0 {
        return Err(Error::Undefined(format!(
            "no topic-labeled posts in {year}-{month:02}"
        )));
    }
    let topics: Vec<u32> = counts.keys().copied().collect();
    let post_counts: Vec<usize> = counts.values().copied().collect();
    let probs: Vec<f64> = post_counts.iter().map(|&c| c as f64 / total as f64).collect();
    Ok(TopicDistribution {
        year,
        month,
        topics,
        probs,
        post_counts,
    })
}

/// Shannon entropy in nats with the 0 ln 0 = 0 convention.
pub fn shannon_entropy(dist: &TopicDistribution) -> f64 {
    entropy_of(&dist.probs)
}

pub fn entropy_of(probs: &[f64]) -> f64 {
    -probs
        .iter()
        .filter(|p| **p > 0.0)
        .map(|p| p * p.ln())
        .sum::<f64>()
}

/// Topic entropy for every month with at least one topic-labeled post.
pub fn monthly_entropy_series(posts: &[Post]) -> BTreeMap<(i32, u32), f64> {
    let mut months: BTreeMap<(i32, u32), BTreeMap<u32, usize>> = BTreeMap::new();
    for post in posts {
        if let Some(topic) = post.topic_id {
            let date = eastern_date_of(post.created_utc);
            *months
                .entry((date.year(), date.month()))
                .or_default()
                .entry(topic)
                .or_insert(0) += 1;
        }
    }
    months
        .into_iter()
        .map(|(key, counts)| {
            let total: usize = counts.values().sum();
            let probs: Vec<f64> = counts
                .values()
                .map(|&c| c as f64 / total as f64)
                .collect();
            (key, entropy_of(&probs))
        })
        .collect()
}
