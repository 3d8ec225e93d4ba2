//! Shared ingestion front: universe, calendar, prices, and the filtered,
//! trading-day-aligned corpus.

use std::collections::BTreeMap;

use anyhow::{bail, Context, Result};
use tickerflow_core::corpus::{
    align_posts, filter_posts, load_posts, FilterConfig, Post, TickerUniverse,
};
use tickerflow_core::marketdata::{
    infer_calendar, load_price_file, load_prices, series_on_calendar, PriceSeries,
    TradingCalendar,
};

use crate::settings::Paths;

pub struct Dataset {
    pub calendar: TradingCalendar,
    pub market: PriceSeries,
    pub prices: BTreeMap<String, PriceSeries>,
    /// Filtered single-ticker posts, aligned to trading days.
    pub posts: Vec<Post>,
    /// Posts dropped because they fall after the last calendar close.
    pub dropped_after_calendar: usize,
}

impl Dataset {
    /// Loads everything. `exclude` removes tickers (posts and prices)
    /// from the analysis scope; return-matching runs exclude the index
    /// proxy while network runs keep it.
    pub fn load(paths: &Paths, exclude: &[String]) -> Result<Self> {
        let universe = TickerUniverse::load(&paths.universe)
            .with_context(|| format!("loading universe {}", paths.universe.display()))?;
        let index_rows = load_price_file(&paths.index)
            .with_context(|| format!("loading index {}", paths.index.display()))?;
        let calendar = infer_calendar(&index_rows)?;
        let market = series_on_calendar("INDEX", &index_rows, &calendar)?;
        let mut prices = load_prices(&paths.prices_dir, &calendar)
            .with_context(|| format!("loading prices from {}", paths.prices_dir.display()))?;
        let loaded = load_posts(&paths.posts, &universe)
            .with_context(|| format!("loading posts {}", paths.posts.display()))?;
        let filtered = filter_posts(&loaded, &universe, FilterConfig::default());
        let (mut posts, dropped_after_calendar) = align_posts(filtered, &calendar);
        for ticker in exclude {
            prices.remove(ticker);
            posts.retain(|p| p.single_ticker() != Some(ticker.as_str()));
        }
        Ok(Self {
            calendar,
            market,
            prices,
            posts,
            dropped_after_calendar,
        })
    }

    /// Tickers ranked by post count (descending, ties alphabetical).
    pub fn tickers_by_mentions(&self) -> Vec<(String, usize)> {
        let mut counts: BTreeMap<String, usize> = BTreeMap::new();
        for post in &self.posts {
            if let Some(t) = post.single_ticker() {
                *counts.entry(t.to_string()).or_insert(0) += 1;
            }
        }
        let mut out: Vec<(String, usize)> = counts.into_iter().collect();
        out.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        out
    }

    /// Resolves an explicit ticker list or the top-N most mentioned;
    /// every requested ticker must have a price series.
    pub fn select_tickers(&self, explicit: &[String], top: Option<usize>) -> Result<Vec<String>> {
        let selected: Vec<String> = if !explicit.is_empty() {
            explicit.to_vec()
        } else {
            let ranked = self.tickers_by_mentions();
            let n = top.unwrap_or(ranked.len());
            ranked.into_iter().take(n).map(|(t, _)| t).collect()
        };
        if selected.is_empty() {
            bail!("no tickers selected: corpus has no single-ticker posts");
        }
        for t in &selected {
            if !self.prices.contains_key(t) {
                bail!("no price file for requested ticker {t}");
            }
        }
        Ok(selected)
    }
}
