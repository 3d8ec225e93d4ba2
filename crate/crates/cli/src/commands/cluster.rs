//! `cluster`: per-community return statistics and within-cluster
//! correlations.

use anyhow::Result;
use tickerflow_core::networks::cluster_report;
use tickerflow_core::table::{write_table, Cell};

use crate::commands::network::{build, NetworkParams};
use crate::dataset::Dataset;
use crate::manifest::ManifestBuilder;
use crate::settings::Paths;

pub struct ClusterParams {
    pub network: NetworkParams,
    pub min_posts: usize,
    pub exclude: Vec<String>,
}

pub fn run(paths: &Paths, params: &ClusterParams) -> Result<()> {
    paths.validate(false)?;
    // the network keeps every ticker; the return matching excludes the
    // configured proxies (SPY by default)
    let network_data = Dataset::load(paths, &[])?;
    let data = Dataset::load(paths, &params.exclude)?;
    super::ensure_out_dir(&paths.out)?;
    let (graph, clustering, warnings) = build(&network_data, &params.network)?;
    for w in &warnings {
        eprintln!("warning: ticker {w} has no topic-labeled posts; excluded");
    }
    let rows_out = cluster_report(
        &clustering,
        &graph,
        &data.posts,
        &data.prices,
        data.calendar.len(),
        params.min_posts,
    )?;
    let mut rows = Vec::new();
    for row in &rows_out {
        let mut cells = vec![
            Cell::from(row.cluster),
            Cell::from(row.tickers.join(" ")),
        ];
        cells.extend(super::stats_cells(&row.stats));
        cells.push(Cell::from(row.n_posts));
        cells.push(Cell::Real(row.within_correlation));
        rows.push(cells);
    }
    let out_path = paths.out.join("cluster_report.csv");
    let mut header = vec!["cluster", "tickers"];
    header.extend(super::STATS_HEADER);
    header.push("n_posts");
    header.push("within_correlation");
    write_table(&out_path, &header, &rows)?;
    ManifestBuilder::new("cluster", &paths.out)
        .input(&paths.posts)
        .input(&paths.universe)
        .input(&paths.index)
        .param("kind", &params.network.kind)
        .param("min_mentions", params.network.min_mentions)
        .param("threshold", params.network.threshold)
        .param("resolution", params.network.resolution)
        .param("seed", params.network.seed)
        .param("min_posts", params.min_posts)
        .param("exclude", &params.exclude)
        .output(&out_path)
        .write()?;
    println!(
        "cluster[{}]: {} reported clusters (min {} posts)",
        params.network.kind,
        rows.len(),
        params.min_posts
    );
    Ok(())
}
