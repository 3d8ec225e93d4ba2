//! `backtest`: sentiment portfolios and the three control portfolios.

use anyhow::Result;
use tickerflow_core::backtest::{
    control_portfolios, sentiment_portfolio, PortfolioFilter, PortfolioOutcome,
};
use tickerflow_core::econometrics::SummaryStats;
use tickerflow_core::table::{write_table, Cell};

use crate::dataset::Dataset;
use crate::manifest::ManifestBuilder;
use crate::replicate::{check_portfolio, finish, PORTFOLIO_TARGETS};
use crate::settings::Paths;

pub struct BacktestParams {
    pub seed: u64,
    pub exclude: Vec<String>,
    pub replicate: bool,
}

pub fn run(paths: &Paths, params: &BacktestParams) -> Result<()> {
    paths.validate(false)?;
    let data = Dataset::load(paths, &params.exclude)?;
    super::ensure_out_dir(&paths.out)?;

    let mut rows: Vec<Vec<Cell>> = Vec::new();
    let mut computed: Vec<(String, Option<SummaryStats>)> = Vec::new();
    let push_outcome = |name: &str,
                            outcome: anyhow::Result<PortfolioOutcome>,
                            rows: &mut Vec<Vec<Cell>>,
                            computed: &mut Vec<(String, Option<SummaryStats>)>| {
        match outcome {
            Ok(o) => {
                let mut cells = vec![Cell::from(name), Cell::from("ok")];
                cells.extend(super::stats_cells(&o.stats));
                cells.push(Cell::from(o.dropped));
                rows.push(cells);
                computed.push((name.to_string(), Some(o.stats)));
            }
            Err(e) => {
                let mut cells = vec![Cell::from(name), Cell::from(e.to_string())];
                cells.extend(std::iter::repeat_n(Cell::Real(None), 5));
                cells.push(Cell::Int(0));
                cells.push(Cell::Int(0));
                rows.push(cells);
                computed.push((name.to_string(), None));
            }
        }
    };

    for (name, filter) in [
        ("all_submissions", PortfolioFilter::AllSubmissions),
        ("flaired_dd", PortfolioFilter::FlairedDd),
        ("labeled_dd", PortfolioFilter::LabeledDd),
    ] {
        let outcome =
            sentiment_portfolio(&data.posts, &data.prices, data.calendar.len(), filter)
                .map_err(anyhow::Error::from);
        push_outcome(name, outcome, &mut rows, &mut computed);
    }

    let controls = control_portfolios(&data.posts, &data.prices, data.calendar.len(), params.seed)?;
    {
        let mut cells = vec![Cell::from("stock_returns"), Cell::from("ok")];
        cells.extend(super::stats_cells(&controls.stock_returns));
        cells.push(Cell::Int(0));
        rows.push(cells);
        computed.push(("stock_returns".to_string(), Some(controls.stock_returns)));
    }
    push_outcome("previous", Ok(controls.previous), &mut rows, &mut computed);
    push_outcome("random", Ok(controls.random), &mut rows, &mut computed);

    let out_path = paths.out.join("backtest.csv");
    let mut header = vec!["portfolio", "status"];
    header.extend(super::STATS_HEADER);
    header.push("dropped");
    write_table(&out_path, &header, &rows)?;
    ManifestBuilder::new("backtest", &paths.out)
        .input(&paths.posts)
        .input(&paths.universe)
        .input(&paths.index)
        .param("seed", params.seed)
        .param("exclude", &params.exclude)
        .output(&out_path)
        .write()?;
    println!("backtest: {} portfolio rows", rows.len());

    if params.replicate {
        let mut failures = Vec::new();
        for target in &PORTFOLIO_TARGETS {
            match computed
                .iter()
                .find(|(name, _)| name == target.row)
                .and_then(|(_, s)| s.as_ref())
            {
                Some(stats) => check_portfolio(target, stats, &mut failures),
                None => failures.push(format!("{}: portfolio not computed", target.row)),
            }
        }
        finish("backtest", failures)?;
    }
    Ok(())
}
