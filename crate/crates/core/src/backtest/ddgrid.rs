//! The due-diligence panel-model grid: 3,744 fixed-effects regressions of
//! forward returns on day/company DD-post aggregates plus controls.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::corpus::{DdLabel, Post};
use crate::econometrics::{panel_fe, RegressionResult};
use crate::error::{Error, Result};
use crate::eventstudy::{car7, fit_capm_rolling, proactive_flag, CarSeries};
use crate::marketdata::{PriceSeries, TradingCalendar};

/// Meme tickers excluded by the grid's meme filter.
pub const GRID_MEME_TICKERS: [&str; 4] = ["GME", "AMC", "BB", "NOK"];

pub const MIN_HORIZON_WEEKS: usize = 1;
pub const MAX_HORIZON_WEEKS: usize = 26;
pub const TRADING_DAYS_PER_WEEK: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DdSide {
    Bullish,
    Bearish,
}

impl DdSide {
    pub fn label(&self) -> &'static str {
        match self {
            Self::Bullish => "bullish",
            Self::Bearish => "bearish",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtraFeature {
    None,
    NumComments,
    WordCount,
    MaxDepth,
    Url,
    Proactive,
}

impl ExtraFeature {
    pub const ALL: [ExtraFeature; 6] = [
        ExtraFeature::None,
        ExtraFeature::NumComments,
        ExtraFeature::WordCount,
        ExtraFeature::MaxDepth,
        ExtraFeature::Url,
        ExtraFeature::Proactive,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            Self::None => "none",
            Self::NumComments => "num_comments",
            Self::WordCount => "word_count",
            Self::MaxDepth => "max_depth",
            Self::Url => "url",
            Self::Proactive => "proactive",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeFilter {
    All,
    Pre2021,
    Post2021,
}

impl TimeFilter {
    pub fn label(&self) -> &'static str {
        match self {
            Self::All => "all",
            Self::Pre2021 => "pre2021",
            Self::Post2021 => "post2021",
        }
    }

    fn accepts(&self, year: i32) -> bool {
        match self {
            Self::All => true,
            Self::Pre2021 => year < 2021,
            Self::Post2021 => year >= 2021,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DdGridConfig {
    pub side: DdSide,
    /// Forward-return horizon in weeks (5 trading days each).
    pub horizon_weeks: usize,
    pub extra: ExtraFeature,
    pub flaired_only: bool,
    pub exclude_memes: bool,
    pub time_filter: TimeFilter,
}

/// The full cartesian grid in deterministic order.
pub fn enumerate_grid() -> Vec<DdGridConfig> {
    let mut out = Vec::new();
    for side in [DdSide::Bullish, DdSide::Bearish] {
        for horizon_weeks in MIN_HORIZON_WEEKS..=MAX_HORIZON_WEEKS {
            for extra in ExtraFeature::ALL {
                for flaired_only in [false, true] {
                    for exclude_memes in [false, true] {
                        for time_filter in
                            [TimeFilter::All, TimeFilter::Pre2021, TimeFilter::Post2021]
                        {
                            out.push(DdGridConfig {
                                side,
                                horizon_weeks,
                                extra,
                                flaired_only,
                                exclude_memes,
                                time_filter,
                            });
                        }
                    }
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GridFitStatus {
    Fitted,
    /// No qualifying posts for this configuration.
    Empty,
    Failed(String),
}

#[derive(Debug, Clone)]
pub struct DdGridOutcome {
    pub config: DdGridConfig,
    pub status: GridFitStatus,
    pub result: Option<RegressionResult>,
    /// Day/company combinations with at least one qualifying post.
    pub n_events: usize,
    pub n_rows: usize,
}

impl DdGridOutcome {
    /// Sentiment coefficient under the reporting convention: the sign is
    /// flipped for bearish models so a positive value always means prices
    /// moved with the posts' prediction.
    pub fn reported_sentiment(&self) -> Option<f64> {
        let coef = self.result.as_ref()?.coef("sentiment")?;
        Some(match self.config.side {
            DdSide::Bullish => coef,
            DdSide::Bearish => -coef,
        })
    }
}

pub struct GridInputs<'a> {
    pub posts: &'a [Post],
    pub prices: &'a BTreeMap<String, PriceSeries>,
    pub market: &'a PriceSeries,
    pub calendar: &'a TradingCalendar,
    pub capm_window: usize,
    pub capm_min_obs: usize,
    pub proactive_alpha: f64,
}

struct DdEvent {
    ticker: usize,
    day: usize,
    side: DdSide,
    flaired: bool,
    year: i32,
    num_comments: f64,
    word_count: f64,
    norm_depth: f64,
    url: f64,
    proactive: f64,
}

#[derive(Default, Clone, Copy)]
struct Agg {
    d: f64,
    comments: f64,
    words: f64,
    depth: f64,
    url: f64,
    proactive: f64,
}

impl Agg {
    fn extra(&self, feature: ExtraFeature) -> f64 {
        match feature {
            ExtraFeature::None => 0.0,
            // comment and word sums are log transformed after summing
            ExtraFeature::NumComments => {
                if self.comments > 0.0 {
                    self.comments.ln()
                } else {
                    0.0
                }
            }
            ExtraFeature::WordCount => {
                if self.words > 0.0 {
                    self.words.ln()
                } else {
                    0.0
                }
            }
            ExtraFeature::MaxDepth => self.depth,
            ExtraFeature::Url => self.url,
            ExtraFeature::Proactive => self.proactive,
        }
    }
}

struct GridPanel {
    tickers: Vec<String>,
    is_meme: Vec<bool>,
    /// [ticker][day]
    returns: Vec<Vec<Option<f64>>>,
    car: Vec<Vec<Option<f64>>>,
    /// [horizon-1][ticker][day]
    forward: Vec<Vec<Vec<Option<f64>>>>,
    events: Vec<DdEvent>,
    t_min: usize,
    t_max: usize,
}

fn build_panel(inputs: &GridInputs) -> Result<GridPanel> {
    let calendar_len = inputs.calendar.len();
    // control estimation uses every priced stock mentioned at least once
    let mentioned: std::collections::BTreeSet<&str> = inputs
        .posts
        .iter()
        .filter_map(|p| p.single_ticker())
        .collect();
    let tickers: Vec<String> = inputs
        .prices
        .keys()
        .filter(|t| mentioned.contains(t.as_str()))
        .cloned()
        .collect();
    let is_meme: Vec<bool> = tickers
        .iter()
        .map(|t| GRID_MEME_TICKERS.contains(&t.as_str()))
        .collect();
    let market_returns = inputs.market.returns_by_day(calendar_len);

    let mut returns = Vec::with_capacity(tickers.len());
    let mut car: Vec<Vec<Option<f64>>> = Vec::with_capacity(tickers.len());
    for t in &tickers {
        let series = &inputs.prices[t];
        let r = series.returns_by_day(calendar_len);
        let fit = fit_capm_rolling(&r, &market_returns, inputs.capm_window, inputs.capm_min_obs)?;
        car.push(car7(&fit).car7);
        returns.push(r);
    }
    let mut forward = Vec::with_capacity(MAX_HORIZON_WEEKS);
    for h in MIN_HORIZON_WEEKS..=MAX_HORIZON_WEEKS {
        let m = h * TRADING_DAYS_PER_WEEK;
        let mut per_ticker = Vec::with_capacity(tickers.len());
        for t in &tickers {
            let series = &inputs.prices[t];
            let col: Vec<Option<f64>> = (0..calendar_len)
                .map(|day| series.forward_return(day, m).ok())
                .collect();
            per_ticker.push(col);
        }
        forward.push(per_ticker);
    }

    // DD events: day t is the first close at least 24 hours after the post
    let mut events = Vec::new();
    for post in inputs.posts {
        let (true, Some(dd_label)) = (post.is_dd, post.dd_label) else {
            continue;
        };
        let Some(ticker_name) = post.single_ticker() else { continue };
        let Some(ticker) = tickers.iter().position(|t| t == ticker_name) else {
            continue;
        };
        let Ok(day) = inputs.calendar.align(post.created_utc + 24 * 3600) else {
            continue; // event lands after the calendar
        };
        let side = match dd_label {
            DdLabel::Bullish => DdSide::Bullish,
            DdLabel::Bearish => DdSide::Bearish,
        };
        let car_series = CarSeries {
            car7: car[ticker].clone(),
        };
        // posts without enough trailing CAR history cannot be shown
        // proactive and count as reactive
        let proactive = proactive_flag(&car_series, day, inputs.proactive_alpha).unwrap_or(false);
        events.push(DdEvent {
            ticker,
            day,
            side,
            flaired: post.flair.as_deref() == Some("DD"),
            year: super::post_year(post),
            num_comments: post.num_comments as f64,
            word_count: post.word_count as f64,
            norm_depth: post.normalized_depth(),
            url: if post.contains_url { 1.0 } else { 0.0 },
            proactive: if proactive { 1.0 } else { 0.0 },
        });
    }
    if events.is_empty() {
        return Err(Error::Insufficient("no labeled DD posts in range".into()));
    }
    let t_min = events.iter().map(|e| e.day).min().unwrap();
    let t_max = events.iter().map(|e| e.day).max().unwrap();
    Ok(GridPanel {
        tickers,
        is_meme,
        returns,
        car,
        forward,
        events,
        t_min,
        t_max,
    })
}

type AggKey = (usize, usize);

fn aggregate_events(
    panel: &GridPanel,
    side: DdSide,
    flaired_only: bool,
    time_filter: TimeFilter,
) -> BTreeMap<AggKey, Agg> {
    let mut out: BTreeMap<AggKey, Agg> = BTreeMap::new();
    for e in &panel.events {
        if e.side != side {
            continue;
        }
        if flaired_only && !e.flaired {
            continue;
        }
        if !time_filter.accepts(e.year) {
            continue;
        }
        let agg = out.entry((e.ticker, e.day)).or_default();
        agg.d += 1.0;
        agg.comments += e.num_comments;
        agg.words += e.word_count;
        agg.depth += e.norm_depth;
        agg.url += e.url;
        agg.proactive += e.proactive;
    }
    out
}

fn fit_config(panel: &GridPanel, config: &DdGridConfig, agg: &BTreeMap<AggKey, Agg>) -> DdGridOutcome {
    let h_idx = config.horizon_weeks - 1;
    let mut time = Vec::new();
    let mut y = Vec::new();
    let mut d_col = Vec::new();
    let mut extra_col = Vec::new();
    let mut prev_col = Vec::new();
    let mut car_col = Vec::new();
    let mut n_events = 0usize;
    for ticker in 0..panel.tickers.len() {
        if config.exclude_memes && panel.is_meme[ticker] {
            continue;
        }
        for day in panel.t_min..=panel.t_max {
            let (Some(fwd), Some(prev), Some(car)) = (
                panel.forward[h_idx][ticker][day],
                panel.returns[ticker][day],
                panel.car[ticker][day],
            ) else {
                continue;
            };
            let a = agg.get(&(ticker, day)).copied().unwrap_or_default();
            if a.d > 0.0 {
                n_events += 1;
            }
            time.push(day);
            y.push(fwd);
            d_col.push(a.d);
            if config.extra != ExtraFeature::None {
                extra_col.push(a.extra(config.extra));
            }
            prev_col.push(prev);
            car_col.push(car);
        }
    }
    let n_rows = y.len();
    if n_events == 0 {
        return DdGridOutcome {
            config: *config,
            status: GridFitStatus::Empty,
            result: None,
            n_events,
            n_rows,
        };
    }
    let mut cols: Vec<Vec<f64>> = vec![d_col];
    let mut names: Vec<&str> = vec!["sentiment"];
    if config.extra != ExtraFeature::None {
        cols.push(extra_col);
        names.push(config.extra.label());
    }
    cols.push(prev_col);
    names.push("prev_return");
    cols.push(car_col);
    names.push("car");
    match panel_fe(&time, &y, &cols, &names) {
        Ok(result) => DdGridOutcome {
            config: *config,
            status: GridFitStatus::Fitted,
            result: Some(result),
            n_events,
            n_rows,
        },
        Err(e) => DdGridOutcome {
            config: *config,
            status: GridFitStatus::Failed(e.to_string()),
            result: None,
            n_events,
            n_rows,
        },
    }
}

/// Fits the full grid. Results are returned in the deterministic
/// [`enumerate_grid`] order; configurations with no qualifying posts are
/// marked empty rather than failing the grid.
pub fn dd_model_grid(inputs: &GridInputs) -> Result<Vec<DdGridOutcome>> {
    let panel = build_panel(inputs)?;
    let configs = enumerate_grid();
    // aggregates shared by every horizon/extra/meme combination
    let mut agg_cache: BTreeMap<(u8, bool, u8), BTreeMap<AggKey, Agg>> = BTreeMap::new();
    for side in [DdSide::Bullish, DdSide::Bearish] {
        for flaired in [false, true] {
            for tf in [TimeFilter::All, TimeFilter::Pre2021, TimeFilter::Post2021] {
                agg_cache.insert(
                    (side_key(side), flaired, tf_key(tf)),
                    aggregate_events(&panel, side, flaired, tf),
                );
            }
        }
    }
    let outcomes: Vec<DdGridOutcome> = configs
        .par_iter()
        .map(|config| {
            let agg = &agg_cache[&(
                side_key(config.side),
                config.flaired_only,
                tf_key(config.time_filter),
            )];
            fit_config(&panel, config, agg)
        })
        .collect();
    Ok(outcomes)
}

fn side_key(s: DdSide) -> u8 {
    match s {
        DdSide::Bullish => 0,
        DdSide::Bearish => 1,
    }
}

fn tf_key(t: TimeFilter) -> u8 {
    match t {
        TimeFilter::All => 0,
        TimeFilter::Pre2021 => 1,
        TimeFilter::Post2021 => 2,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backtest::tests::{calendar_weekdays, mk_post};
    use crate::econometrics::{ols, Design};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn grid_has_exactly_3744_configurations() {
        let grid = enumerate_grid();
        assert_eq!(grid.len(), 3744);
        // and they are all distinct
        let mut seen = std::collections::BTreeSet::new();
        for c in &grid {
            let key = (
                side_key(c.side),
                c.horizon_weeks,
                c.extra.label(),
                c.flaired_only,
                c.exclude_memes,
                tf_key(c.time_filter),
            );
            assert!(seen.insert(key));
        }
    }

    fn synthetic_inputs(
        cal: &TradingCalendar,
        seed: u64,
    ) -> (
        Vec<crate::corpus::Post>,
        BTreeMap<String, PriceSeries>,
        PriceSeries,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = cal.len();
        let mut market_vals = Vec::with_capacity(n);
        let mut level = 100.0f64;
        for _ in 0..n {
            level *= (rng.gen_range(-0.01..0.011f64)).exp();
            market_vals.push(level);
        }
        let market = PriceSeries::new("MKT", (0..n).collect(), market_vals.clone()).unwrap();
        let mut prices = BTreeMap::new();
        for (ticker, beta) in [("GME", 1.4), ("AAPL", 1.0), ("SNAP", 0.8)] {
            let mut vals = Vec::with_capacity(n);
            let mut lvl = 50.0f64;
            for day in 0..n {
                let mr = if day > 0 {
                    (market_vals[day] / market_vals[day - 1]).ln()
                } else {
                    0.0
                };
                lvl *= (beta * mr + rng.gen_range(-0.004..0.004)).exp();
                vals.push(lvl);
            }
            prices.insert(
                ticker.to_string(),
                PriceSeries::new(ticker, (0..n).collect(), vals).unwrap(),
            );
        }
        let mut posts = Vec::new();
        for i in 0..24 {
            let ticker = ["GME", "AAPL", "SNAP"][i % 3];
            let day = 200 + i * 8;
            let mut p = mk_post(cal, &format!("dd{i}"), ticker, day, if i % 4 == 0 { -0.5 } else { 0.6 });
            p.is_dd = true;
            p.dd_label = Some(if i % 4 == 0 {
                crate::corpus::DdLabel::Bearish
            } else {
                crate::corpus::DdLabel::Bullish
            });
            p.flair = if i % 2 == 0 { Some("DD".into()) } else { None };
            p.num_comments = 3 + (i as u32 % 40);
            p.word_count = 50 + (i as u32 * 17) % 400;
            p.max_comment_depth = i as u32 % 5;
            p.contains_url = i % 3 == 0;
            posts.push(p);
        }
        (posts, prices, market)
    }

    #[test]
    fn meme_tickers_contribute_zero_rows_when_excluded() {
        let cal = calendar_weekdays("2019-01-02", 700);
        let (posts, prices, market) = synthetic_inputs(&cal, 3);
        let inputs = GridInputs {
            posts: &posts,
            prices: &prices,
            market: &market,
            calendar: &cal,
            capm_window: 180,
            capm_min_obs: 60,
            proactive_alpha: 0.05,
        };
        let panel = build_panel(&inputs).unwrap();
        let agg = aggregate_events(&panel, DdSide::Bullish, false, TimeFilter::All);
        let base = DdGridConfig {
            side: DdSide::Bullish,
            horizon_weeks: 2,
            extra: ExtraFeature::None,
            flaired_only: false,
            exclude_memes: false,
            time_filter: TimeFilter::All,
        };
        let with_memes = fit_config(&panel, &base, &agg);
        let without = fit_config(
            &panel,
            &DdGridConfig {
                exclude_memes: true,
                ..base
            },
            &agg,
        );
        // GME rows disappear entirely
        let gme = panel.tickers.iter().position(|t| t == "GME").unwrap();
        let gme_rows = (panel.t_min..=panel.t_max)
            .filter(|&d| {
                panel.forward[1][gme][d].is_some()
                    && panel.returns[gme][d].is_some()
                    && panel.car[gme][d].is_some()
            })
            .count();
        assert!(gme_rows > 0);
        assert_eq!(with_memes.n_rows - without.n_rows, gme_rows);
        assert!(with_memes.n_rows as f64 >= with_memes.n_events as f64);
    }

    #[test]
    fn single_event_panel_matches_dummy_ols() {
        let cal = calendar_weekdays("2019-01-02", 420);
        let (mut posts, prices, market) = synthetic_inputs(&cal, 11);
        // one bearish and one bullish post span a small panel; the
        // bullish-side model below has exactly one event in it
        posts.truncate(2);
        let inputs = GridInputs {
            posts: &posts,
            prices: &prices,
            market: &market,
            calendar: &cal,
            capm_window: 180,
            capm_min_obs: 60,
            proactive_alpha: 0.05,
        };
        let panel = build_panel(&inputs).unwrap();
        let config = DdGridConfig {
            side: DdSide::Bullish,
            horizon_weeks: 1,
            extra: ExtraFeature::None,
            flaired_only: false,
            exclude_memes: false,
            time_filter: TimeFilter::All,
        };
        let agg = aggregate_events(&panel, DdSide::Bullish, false, TimeFilter::All);
        let outcome = fit_config(&panel, &config, &agg);
        assert_eq!(outcome.status, GridFitStatus::Fitted);
        let fe = outcome.result.unwrap();

        // rebuild the same rows and fit with explicit day dummies
        let mut time = Vec::new();
        let mut y = Vec::new();
        let mut d_col = Vec::new();
        let mut prev = Vec::new();
        let mut car_col = Vec::new();
        for ticker in 0..panel.tickers.len() {
            for day in panel.t_min..=panel.t_max {
                if let (Some(f), Some(p), Some(c)) = (
                    panel.forward[0][ticker][day],
                    panel.returns[ticker][day],
                    panel.car[ticker][day],
                ) {
                    time.push(day);
                    y.push(f);
                    d_col.push(agg.get(&(ticker, day)).map_or(0.0, |a| a.d));
                    prev.push(p);
                    car_col.push(c);
                }
            }
        }
        let mut days: Vec<usize> = time.clone();
        days.sort_unstable();
        days.dedup();
        let mut d = Design::new();
        d.push("sentiment", d_col);
        d.push("prev_return", prev);
        d.push("car", car_col);
        for &pd in &days {
            d.push(
                format!("day{pd}"),
                time.iter().map(|&t| if t == pd { 1.0 } else { 0.0 }).collect(),
            );
        }
        let oracle = ols(&d, &y, false).unwrap();
        for (i, name) in ["sentiment", "prev_return", "car"].iter().enumerate() {
            let got = fe.coef(name).unwrap();
            let want = oracle.coefficients[i];
            assert!((got - want).abs() < 1e-10, "{name}: {got} vs {want}");
        }
    }

    #[test]
    fn empty_configuration_is_marked_not_failed() {
        let cal = calendar_weekdays("2019-01-02", 420);
        let (mut posts, prices, market) = synthetic_inputs(&cal, 13);
        // all DD posts bullish, so bearish configs are empty
        for p in posts.iter_mut() {
            p.dd_label = Some(crate::corpus::DdLabel::Bullish);
        }
        let inputs = GridInputs {
            posts: &posts,
            prices: &prices,
            market: &market,
            calendar: &cal,
            capm_window: 180,
            capm_min_obs: 60,
            proactive_alpha: 0.05,
        };
        let panel = build_panel(&inputs).unwrap();
        let agg = aggregate_events(&panel, DdSide::Bearish, false, TimeFilter::All);
        let config = DdGridConfig {
            side: DdSide::Bearish,
            horizon_weeks: 1,
            extra: ExtraFeature::None,
            flaired_only: false,
            exclude_memes: false,
            time_filter: TimeFilter::All,
        };
        let outcome = fit_config(&panel, &config, &agg);
        assert_eq!(outcome.status, GridFitStatus::Empty);
        assert!(outcome.result.is_none());
    }

    #[test]
    fn bearish_reporting_flips_sign() {
        let outcome = DdGridOutcome {
            config: DdGridConfig {
                side: DdSide::Bearish,
                horizon_weeks: 1,
                extra: ExtraFeature::None,
                flaired_only: false,
                exclude_memes: false,
                time_filter: TimeFilter::All,
            },
            status: GridFitStatus::Fitted,
            result: Some(RegressionResult {
                names: vec!["sentiment".into()],
                coefficients: vec![0.25],
                standard_errors: vec![0.1],
                t_stats: vec![2.5],
                p_values: vec![0.02],
                r_squared: 0.1,
                adj_r_squared: 0.1,
                n_obs: 10,
                df_resid: 8,
                residuals: vec![],
                cov_params: vec![vec![0.01]],
            }),
            n_events: 1,
            n_rows: 10,
        };
        assert_eq!(outcome.reported_sentiment(), Some(-0.25));
    }
}
