//! `ddgrid`: the 3,744-model due-diligence panel-regression grid.

use anyhow::Result;
use tickerflow_core::backtest::{dd_model_grid, stars, DdSide, GridFitStatus, GridInputs};
use tickerflow_core::table::{write_table, Cell};

use crate::dataset::Dataset;
use crate::manifest::ManifestBuilder;
use crate::settings::Paths;

pub struct DdGridParams {
    pub window: usize,
    pub min_obs: usize,
    pub alpha: f64,
    pub exclude: Vec<String>,
    pub replicate: bool,
}

pub fn run(paths: &Paths, params: &DdGridParams) -> Result<()> {
    paths.validate(false)?;
    let data = Dataset::load(paths, &params.exclude)?;
    super::ensure_out_dir(&paths.out)?;
    let inputs = GridInputs {
        posts: &data.posts,
        prices: &data.prices,
        market: &data.market,
        calendar: &data.calendar,
        capm_window: params.window,
        capm_min_obs: params.min_obs,
        proactive_alpha: params.alpha,
    };
    let outcomes = dd_model_grid(&inputs)?;

    let mut rows = Vec::with_capacity(outcomes.len());
    for (i, o) in outcomes.iter().enumerate() {
        let c = &o.config;
        let mut cells = vec![
            Cell::from(i),
            Cell::from(c.side.label()),
            Cell::from(c.horizon_weeks),
            Cell::from(c.extra.label()),
            Cell::from(if c.flaired_only { 1i64 } else { 0 }),
            Cell::from(if c.exclude_memes { 1i64 } else { 0 }),
            Cell::from(c.time_filter.label()),
            Cell::from(match &o.status {
                GridFitStatus::Fitted => "fitted".to_string(),
                GridFitStatus::Empty => "empty".to_string(),
                GridFitStatus::Failed(msg) => format!("failed: {msg}"),
            }),
            Cell::from(o.n_events),
            Cell::from(o.n_rows),
        ];
        // coefficient block: sentiment (reported sign), extra, controls
        let coef_block = |name: &str| -> [Cell; 4] {
            match &o.result {
                Some(r) => match r.names.iter().position(|n| n == name) {
                    Some(j) => {
                        let coef = if name == "sentiment" && c.side == DdSide::Bearish {
                            -r.coefficients[j]
                        } else {
                            r.coefficients[j]
                        };
                        [
                            Cell::from(coef),
                            Cell::from(r.standard_errors[j]),
                            Cell::from(r.p_values[j]),
                            Cell::from(stars(r.p_values[j])),
                        ]
                    }
                    None => [Cell::Real(None), Cell::Real(None), Cell::Real(None), Cell::from("")],
                },
                None => [Cell::Real(None), Cell::Real(None), Cell::Real(None), Cell::from("")],
            }
        };
        let extra_name = c.extra.label();
        for block in [
            coef_block("sentiment"),
            coef_block(extra_name),
            coef_block("prev_return"),
            coef_block("car"),
        ] {
            cells.extend(block);
        }
        cells.push(match &o.result {
            Some(r) => Cell::from(r.r_squared),
            None => Cell::Real(None),
        });
        rows.push(cells);
    }
    let out_path = paths.out.join("ddgrid.csv");
    write_table(
        &out_path,
        &[
            "config", "side", "horizon_weeks", "extra", "flaired_only", "exclude_memes",
            "time_filter", "status", "n_events", "n_obs",
            "sentiment", "sentiment_se", "sentiment_p", "sentiment_stars",
            "extra_coef", "extra_se", "extra_p", "extra_stars",
            "prev_return", "prev_return_se", "prev_return_p", "prev_return_stars",
            "car", "car_se", "car_p", "car_stars",
            "r_squared",
        ],
        &rows,
    )?;
    ManifestBuilder::new("ddgrid", &paths.out)
        .input(&paths.posts)
        .input(&paths.universe)
        .input(&paths.index)
        .param("window", params.window)
        .param("min_obs", params.min_obs)
        .param("alpha", params.alpha)
        .param("exclude", &params.exclude)
        .param("configurations", outcomes.len())
        .output(&out_path)
        .write()?;
    let fitted = outcomes
        .iter()
        .filter(|o| o.status == GridFitStatus::Fitted)
        .count();
    println!("ddgrid: {} configurations, {fitted} fitted", outcomes.len());

    if params.replicate {
        let mut failures = Vec::new();
        // bullish, 4 weeks, all posts, memes included
        let find = |extra: &str| {
            outcomes.iter().find(|o| {
                o.config.side == DdSide::Bullish
                    && o.config.horizon_weeks == 4
                    && o.config.extra.label() == extra
                    && !o.config.flaired_only
                    && !o.config.exclude_memes
                    && o.config.time_filter.label() == "all"
            })
        };
        let check = |failures: &mut Vec<String>, label: &str, got: Option<f64>, want: f64| {
            match got {
                Some(g) if (g * 1e4).round() / 1e4 == want => {}
                Some(g) => failures.push(format!("{label}: got {g:.4}, published {want:.4}")),
                None => failures.push(format!("{label}: not fitted")),
            }
        };
        if let Some(o) = find("none") {
            check(
                &mut failures,
                "bull4.all.sentiment",
                o.reported_sentiment(),
                -0.0102,
            );
        }
        if let Some(o) = find("proactive") {
            check(
                &mut failures,
                "bull4.proactive.sentiment",
                o.reported_sentiment(),
                -0.0404,
            );
            check(
                &mut failures,
                "bull4.proactive.extra",
                o.result.as_ref().and_then(|r| r.coef("proactive")),
                0.0443,
            );
        }
        crate::replicate::finish("ddgrid", failures)?;
    }
    Ok(())
}
