//! `car`: event-window CAR profiles around posts, per ticker and pooled.

use anyhow::Result;
use tickerflow_core::eventstudy::{
    car7, car_profile_multi, fit_capm_rolling, CarSeries, CAR_MEME_TICKERS,
};
use tickerflow_core::table::{write_table, Cell};

use crate::dataset::Dataset;
use crate::manifest::ManifestBuilder;
use crate::settings::Paths;

pub struct CarParams {
    pub tickers: Vec<String>,
    pub top: Option<usize>,
    pub half_width: usize,
    pub window: usize,
    pub min_obs: usize,
    pub exclude_memes: bool,
    pub exclude: Vec<String>,
}

pub fn run(paths: &Paths, params: &CarParams) -> Result<()> {
    paths.validate(false)?;
    let data = Dataset::load(paths, &params.exclude)?;
    let mut tickers = data.select_tickers(&params.tickers, params.top.or(Some(10)))?;
    if params.exclude_memes {
        tickers.retain(|t| !CAR_MEME_TICKERS.contains(&t.as_str()));
    }
    super::ensure_out_dir(&paths.out)?;

    let market_returns = data.market.returns_by_day(data.calendar.len());
    let mut per_ticker: Vec<(String, Vec<tickerflow_core::corpus::Post>, CarSeries)> = Vec::new();
    for ticker in &tickers {
        let series = &data.prices[ticker];
        let returns = series.returns_by_day(data.calendar.len());
        let fit = fit_capm_rolling(&returns, &market_returns, params.window, params.min_obs)?;
        let car = car7(&fit);
        let posts: Vec<_> = data
            .posts
            .iter()
            .filter(|p| p.single_ticker() == Some(ticker.as_str()))
            .cloned()
            .collect();
        per_ticker.push((ticker.clone(), posts, car));
    }

    let mut rows = Vec::new();
    let mut emit = |name: &str, profiles: &[tickerflow_core::eventstudy::CarProfile]| {
        for profile in profiles {
            for (k, offset) in (-(params.half_width as i64)..=params.half_width as i64).enumerate()
            {
                rows.push(vec![
                    Cell::from(name),
                    Cell::Int(offset),
                    Cell::from(profile.group.label()),
                    Cell::from(profile.mean_car[k]),
                    Cell::from(profile.median_car[k]),
                    Cell::from(profile.post_count),
                ]);
            }
        }
    };
    for (ticker, posts, car) in &per_ticker {
        let profiles = car_profile_multi(&[(posts.as_slice(), car)], params.half_width);
        emit(ticker, &profiles);
    }
    let pooled_inputs: Vec<(&[tickerflow_core::corpus::Post], &CarSeries)> = per_ticker
        .iter()
        .map(|(_, posts, car)| (posts.as_slice(), car))
        .collect();
    let pooled = car_profile_multi(&pooled_inputs, params.half_width);
    emit("ALL", &pooled);

    let out_path = paths.out.join("car_profile.csv");
    write_table(
        &out_path,
        &["ticker", "offset", "group", "mean_car", "median_car", "n_posts"],
        &rows,
    )?;
    ManifestBuilder::new("car", &paths.out)
        .input(&paths.posts)
        .input(&paths.universe)
        .input(&paths.index)
        .param("tickers", &tickers)
        .param("half_width", params.half_width)
        .param("window", params.window)
        .param("min_obs", params.min_obs)
        .param("exclude_memes", params.exclude_memes)
        .output(&out_path)
        .write()?;
    println!("car: {} profile rows for {} tickers", rows.len(), tickers.len());
    Ok(())
}
