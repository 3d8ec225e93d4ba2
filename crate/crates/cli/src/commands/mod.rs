pub mod backtest;
pub mod car;
pub mod cluster;
pub mod ddgrid;
pub mod entropy;
pub mod granger;
pub mod ingest;
pub mod network;
pub mod report;
pub mod signals;

use std::path::Path;

use anyhow::{Context, Result};

pub fn ensure_out_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path)
        .with_context(|| format!("cannot create output directory {}", path.display()))
}

pub fn stats_cells(stats: &tickerflow_core::econometrics::SummaryStats) -> Vec<tickerflow_core::table::Cell> {
    use tickerflow_core::table::Cell;
    vec![
        Cell::from(stats.mean),
        Cell::from(stats.sd),
        Cell::Real(if stats.skew.is_finite() { Some(stats.skew) } else { None }),
        Cell::Real(if stats.excess_kurtosis.is_finite() {
            Some(stats.excess_kurtosis)
        } else {
            None
        }),
        Cell::Real(stats.p_value_mean_zero),
        Cell::from(stats.n),
    ]
}

pub const STATS_HEADER: [&str; 6] = ["mean", "sd", "skew", "excess_kurtosis", "p_value", "n"];
