//! `signals`: per-ticker daily sentiment series CSVs, plus the
//! weekly/monthly long-horizon signal panel and its fixed-effects
//! regressions.

use anyhow::{bail, Result};
use tickerflow_core::econometrics::panel_fe;
use tickerflow_core::signals::{build_daily_series, long_term_panel, ActivityWindow, Period};
use tickerflow_core::table::{write_table, Cell};

use crate::dataset::Dataset;
use crate::manifest::ManifestBuilder;
use crate::settings::Paths;

pub struct SignalsParams {
    pub tickers: Vec<String>,
    pub top: Option<usize>,
    pub activity: String,
    /// day (default) emits the daily series; week/month emit the
    /// long-horizon panel and regressions instead.
    pub period: String,
}

pub fn parse_activity(name: &str) -> Result<ActivityWindow> {
    match name {
        "calendar" => Ok(ActivityWindow::CalendarDays),
        "trading" => Ok(ActivityWindow::TradingDays),
        other => bail!("unknown activity window `{other}` (calendar|trading)"),
    }
}

pub fn run(paths: &Paths, params: &SignalsParams) -> Result<()> {
    paths.validate(false)?;
    let activity = parse_activity(&params.activity)?;
    let data = Dataset::load(paths, &[])?;
    let tickers = data.select_tickers(&params.tickers, params.top.or(Some(10)))?;
    match params.period.as_str() {
        "day" => {}
        "week" => return run_long_term(paths, params, &data, &tickers, Period::Week),
        "month" => return run_long_term(paths, params, &data, &tickers, Period::Month),
        other => bail!("unknown period `{other}` (day|week|month)"),
    }
    super::ensure_out_dir(&paths.out)?;

    let mut manifest = ManifestBuilder::new("signals", &paths.out);
    manifest
        .input(&paths.posts)
        .input(&paths.universe)
        .input(&paths.index)
        .param("tickers", &tickers)
        .param("activity", &params.activity);
    for ticker in &tickers {
        let series = build_daily_series(&data.posts, ticker, &data.calendar, activity);
        let mut rows = Vec::with_capacity(data.calendar.len());
        for t in 0..data.calendar.len() {
            rows.push(vec![
                Cell::from(data.calendar.date(t).to_string()),
                Cell::from(series.s[t]),
                Cell::from(series.n_asset[t] as i64),
                Cell::Real(series.n_forum[t]),
                Cell::Real(series.s_hat[t]),
                Cell::Real(series.d_s_hat[t]),
                Cell::Real(series.s_norm[t]),
                Cell::Real(series.d_s_norm[t]),
                Cell::Real(series.momentum[t]),
            ]);
        }
        let path = paths.out.join(format!("signals_{ticker}.csv"));
        write_table(
            &path,
            &["day", "S", "n_asset", "n_forum", "S_hat", "dS_hat", "S_norm", "dS_norm", "M"],
            &rows,
        )?;
        manifest.output(&path);
    }
    manifest.write()?;
    println!("signals: wrote {} ticker series", tickers.len());
    Ok(())
}

/// The long-horizon harness: one panel CSV plus period-fixed-effects
/// regressions of next-period return and volatility on the forum
/// variables and market controls.
fn run_long_term(
    paths: &Paths,
    params: &SignalsParams,
    data: &Dataset,
    tickers: &[String],
    period: Period,
) -> Result<()> {
    let rows = long_term_panel(&data.posts, &data.prices, &data.calendar, tickers, period);
    super::ensure_out_dir(&paths.out)?;
    let panel_path = paths.out.join("longterm_panel.csv");
    let table_rows: Vec<Vec<Cell>> = rows
        .iter()
        .map(|r| {
            vec![
                Cell::from(r.ticker.as_str()),
                Cell::from(format!("{}-{:02}", r.key.0, r.key.1)),
                Cell::from(r.momentum),
                Cell::from(r.s_norm),
                Cell::from(r.d_s_norm),
                Cell::from(r.ret),
                Cell::from(r.sigma),
                Cell::from(r.next_ret),
                Cell::from(r.next_sigma),
            ]
        })
        .collect();
    write_table(
        &panel_path,
        &["ticker", "period", "M", "S_norm", "dS_norm", "ret", "sigma", "next_ret", "next_sigma"],
        &table_rows,
    )?;

    let mut manifest = ManifestBuilder::new("signals", &paths.out);
    manifest
        .input(&paths.posts)
        .input(&paths.universe)
        .input(&paths.index)
        .param("tickers", tickers)
        .param("period", &params.period)
        .output(&panel_path);

    // regressions with period fixed effects, one per dependent
    let time: Vec<usize> = {
        let mut keys: Vec<_> = rows.iter().map(|r| r.key).collect();
        keys.sort_unstable();
        keys.dedup();
        rows.iter()
            .map(|r| keys.binary_search(&r.key).unwrap())
            .collect()
    };
    let cols: Vec<Vec<f64>> = vec![
        rows.iter().map(|r| r.momentum).collect(),
        rows.iter().map(|r| r.d_s_norm).collect(),
        rows.iter().map(|r| r.s_norm).collect(),
        rows.iter().map(|r| r.ret).collect(),
        rows.iter().map(|r| r.sigma).collect(),
    ];
    let names = ["M", "dS_norm", "S_norm", "ret", "sigma"];
    let mut reg_rows: Vec<Vec<Cell>> = Vec::new();
    for (dep_name, dep) in [
        ("next_ret", rows.iter().map(|r| r.next_ret).collect::<Vec<f64>>()),
        ("next_sigma", rows.iter().map(|r| r.next_sigma).collect()),
    ] {
        match panel_fe(&time, &dep, &cols, &names) {
            Ok(fit) => {
                for row in fit.to_rows() {
                    let mut cells = vec![Cell::from(dep_name)];
                    cells.extend(row.into_iter().map(Cell::Str));
                    reg_rows.push(cells);
                }
            }
            Err(e) => eprintln!("warning: {dep_name} regression skipped: {e}"),
        }
    }
    if !reg_rows.is_empty() {
        let reg_path = paths.out.join("longterm_regression.csv");
        write_table(
            &reg_path,
            &["dependent", "variable", "coef", "se", "t", "p"],
            &reg_rows,
        )?;
        manifest.output(&reg_path);
    }
    manifest.write()?;
    println!(
        "signals[{}]: {} panel rows across {} tickers",
        params.period,
        rows.len(),
        tickers.len()
    );
    Ok(())
}
