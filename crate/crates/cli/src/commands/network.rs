//! `network`: build the topic or submission network, cluster it, and emit
//! the edge list and membership tables.

use anyhow::{bail, Result};
use tickerflow_core::networks::{
    build_submission_network, build_topic_network, leiden, AssetGraph, Clustering,
    DEFAULT_SUBMISSION_THRESHOLD, DEFAULT_TOPIC_THRESHOLD,
};
use tickerflow_core::table::{write_table, Cell};

use crate::dataset::Dataset;
use crate::manifest::ManifestBuilder;
use crate::settings::Paths;

pub struct NetworkParams {
    pub kind: String,
    pub min_mentions: usize,
    pub threshold: Option<f64>,
    pub resolution: f64,
    pub seed: u64,
}

pub fn build(data: &Dataset, params: &NetworkParams) -> Result<(AssetGraph, Clustering, Vec<String>)> {
    let (graph, warnings) = match params.kind.as_str() {
        "submission" => (
            build_submission_network(
                &data.posts,
                params.min_mentions,
                params.threshold.unwrap_or(DEFAULT_SUBMISSION_THRESHOLD),
            ),
            Vec::new(),
        ),
        "topic" => build_topic_network(
            &data.posts,
            params.min_mentions,
            params.threshold.unwrap_or(DEFAULT_TOPIC_THRESHOLD),
        ),
        other => bail!("unknown network kind `{other}` (topic|submission)"),
    };
    if graph.nodes.is_empty() {
        bail!(
            "no tickers reach {} mentions; lower --min-mentions",
            params.min_mentions
        );
    }
    let clustering = leiden(&graph, params.resolution, params.seed);
    Ok((graph, clustering, warnings))
}

pub fn run(paths: &Paths, params: &NetworkParams) -> Result<()> {
    paths.validate(false)?;
    let data = Dataset::load(paths, &[])?;
    super::ensure_out_dir(&paths.out)?;
    let (graph, clustering, warnings) = build(&data, params)?;
    for w in &warnings {
        eprintln!("warning: ticker {w} has no topic-labeled posts; excluded");
    }

    let edges_path = paths.out.join("network_edges.csv");
    let edge_rows: Vec<Vec<Cell>> = graph
        .edges
        .iter()
        .map(|(u, v, w)| {
            vec![
                Cell::from(graph.nodes[*u].as_str()),
                Cell::from(graph.nodes[*v].as_str()),
                Cell::from(*w),
            ]
        })
        .collect();
    write_table(&edges_path, &["src", "dst", "weight"], &edge_rows)?;

    let membership_path = paths.out.join("network_membership.csv");
    let member_rows: Vec<Vec<Cell>> = graph
        .nodes
        .iter()
        .zip(&clustering.membership)
        .map(|(t, c)| vec![Cell::from(t.as_str()), Cell::from(*c)])
        .collect();
    write_table(&membership_path, &["ticker", "community"], &member_rows)?;

    ManifestBuilder::new("network", &paths.out)
        .input(&paths.posts)
        .input(&paths.universe)
        .input(&paths.index)
        .param("kind", &params.kind)
        .param("min_mentions", params.min_mentions)
        .param("threshold", params.threshold)
        .param("resolution", params.resolution)
        .param("seed", params.seed)
        .param("modularity", clustering.quality)
        .param("communities", clustering.membership.iter().max().map(|m| m + 1))
        .output(&edges_path)
        .output(&membership_path)
        .write()?;
    println!(
        "network[{}]: {} nodes, {} edges, {} communities, modularity {:.4}",
        params.kind,
        graph.nodes.len(),
        graph.edges.len(),
        clustering.membership.iter().max().map_or(0, |m| m + 1),
        clustering.quality
    );
    Ok(())
}
