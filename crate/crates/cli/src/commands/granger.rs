//! `granger`: sentiment-change to return causality table.

use anyhow::{bail, Result};
use tickerflow_core::backtest::{granger_suite, stars, GrangerRowStatus, StartRule};
use tickerflow_core::table::{write_table, Cell};

use crate::dataset::Dataset;
use crate::manifest::ManifestBuilder;
use crate::settings::Paths;

pub struct GrangerParams {
    pub tickers: Vec<String>,
    pub top: Option<usize>,
    pub start_rule: String,
    pub activity: String,
    pub exclude: Vec<String>,
}

fn parse_start_rule(name: &str) -> Result<StartRule> {
    match name {
        "cutoff2016" => Ok(StartRule::Cutoff2016),
        "first-mention" => Ok(StartRule::FirstMention),
        other => bail!("unknown start rule `{other}` (cutoff2016|first-mention)"),
    }
}

pub fn run(paths: &Paths, params: &GrangerParams) -> Result<()> {
    paths.validate(false)?;
    let start_rule = parse_start_rule(&params.start_rule)?;
    let activity = super::signals::parse_activity(&params.activity)?;
    let data = Dataset::load(paths, &params.exclude)?;
    let tickers = data.select_tickers(&params.tickers, params.top.or(Some(10)))?;
    super::ensure_out_dir(&paths.out)?;

    let rows_out = granger_suite(
        &data.posts,
        &data.prices,
        &data.calendar,
        &tickers,
        start_rule,
        activity,
    );
    let mut rows = Vec::new();
    for row in &rows_out {
        let (wald, p, star, n, status) = match (&row.result, &row.status) {
            (Some(r), _) => (
                Some(r.wald_stat),
                Some(r.p_value),
                stars(r.p_value),
                Some(r.n_obs as i64),
                "ok".to_string(),
            ),
            (None, GrangerRowStatus::ScreenFailed(msg)) => {
                (None, None, "", None, format!("screen failed: {msg}"))
            }
            (None, GrangerRowStatus::Insufficient(msg)) => (None, None, "", None, msg.clone()),
            (None, GrangerRowStatus::Ok) => (None, None, "", None, "ok".to_string()),
        };
        rows.push(vec![
            Cell::from(row.ticker.as_str()),
            Cell::from(row.lag),
            Cell::Real(wald),
            Cell::Real(p),
            Cell::from(star),
            match n {
                Some(v) => Cell::Int(v),
                None => Cell::from(""),
            },
            Cell::from(status),
        ]);
    }
    let out_path = paths.out.join("granger.csv");
    write_table(
        &out_path,
        &["ticker", "lag", "wald_stat", "p_value", "stars", "n_obs", "status"],
        &rows,
    )?;
    ManifestBuilder::new("granger", &paths.out)
        .input(&paths.posts)
        .input(&paths.universe)
        .input(&paths.index)
        .param("tickers", &tickers)
        .param("start_rule", &params.start_rule)
        .param("activity", &params.activity)
        .output(&out_path)
        .write()?;
    let total = rows_out.len();
    println!(
        "granger: {total} tests across {} tickers (multiple-testing caveat: at alpha=0.05 \
         about {:.0} spurious rejections are expected)",
        tickers.len(),
        total as f64 * 0.05
    );
    Ok(())
}
