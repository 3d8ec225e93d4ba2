//! Ticker co-mention networks and their community structure: the
//! submission network (author overlap), the topic network (topic-profile
//! similarity), Leiden clustering, and per-cluster return reports.

mod leiden;

pub use leiden::{leiden, Clustering};

use std::collections::{BTreeMap, BTreeSet};

use crate::backtest;
use crate::corpus::Post;
use crate::econometrics::{summary_stats, SummaryStats};
use crate::error::Result;
use crate::marketdata::PriceSeries;

pub const DEFAULT_MIN_MENTIONS: usize = 150;
pub const DEFAULT_SUBMISSION_THRESHOLD: f64 = 0.2;
pub const DEFAULT_TOPIC_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Topic,
    Submission,
}

/// Weighted undirected ticker network.
#[derive(Debug, Clone)]
pub struct AssetGraph {
    pub nodes: Vec<String>,
    /// (u, v, weight) with u < v and weight > 0.
    pub edges: Vec<(usize, usize, f64)>,
    pub provenance: Provenance,
}

impl AssetGraph {
    pub fn node_index(&self, ticker: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n == ticker)
    }

    pub fn weight_between(&self, a: &str, b: &str) -> Option<f64> {
        let (i, j) = (self.node_index(a)?, self.node_index(b)?);
        let key = (i.min(j), i.max(j));
        self.edges
            .iter()
            .find(|(u, v, _)| (*u, *v) == key)
            .map(|(_, _, w)| *w)
    }
}

/// Mention counts over filtered single-ticker posts.
fn mention_counts(posts: &[Post]) -> BTreeMap<String, usize> {
    let mut counts = BTreeMap::new();
    for post in posts {
        if let Some(t) = post.single_ticker() {
            *counts.entry(t.to_string()).or_insert(0) += 1;
        }
    }
    counts
}

/// Submission network: tickers are linked when a large enough fraction of
/// one ticker's posters also post about the other. For the ordered pair
/// (A, B), w(A->B) = |authors(A) and authors(B)| / |authors(A)| and is
/// kept only when it reaches the threshold; the undirected weight is the
/// sum of the kept directions. Tickers below `min_mentions` are dropped
/// before weighting.
pub fn build_submission_network(
    posts: &[Post],
    min_mentions: usize,
    threshold: f64,
) -> AssetGraph {
    let counts = mention_counts(posts);
    let nodes: Vec<String> = counts
        .iter()
        .filter(|(_, &c)| c >= min_mentions)
        .map(|(t, _)| t.clone())
        .collect();
    let index: BTreeMap<&str, usize> = nodes
        .iter()
        .enumerate()
        .map(|(i, t)| (t.as_str(), i))
        .collect();
    let mut authors: Vec<BTreeSet<&str>> = vec![BTreeSet::new(); nodes.len()];
    for post in posts {
        if let Some(t) = post.single_ticker() {
            if let Some(&i) = index.get(t) {
                authors[i].insert(post.author_id.as_str());
            }
        }
    }
    let mut edges = Vec::new();
    for i in 0..nodes.len() {
        for j in i + 1..nodes.len() {
            if authors[i].is_empty() || authors[j].is_empty() {
                continue;
            }
            let overlap = authors[i].intersection(&authors[j]).count() as f64;
            if overlap == 0.0 {
                continue;
            }
            let w_ij = overlap / authors[i].len() as f64;
            let w_ji = overlap / authors[j].len() as f64;
            let mut total = 0.0;
            if w_ij >= threshold {
                total += w_ij;
            }
            if w_ji >= threshold {
                total += w_ji;
            }
            if total > 0.0 {
                edges.push((i, j, total));
            }
        }
    }
    AssetGraph {
        nodes,
        edges,
        provenance: Provenance::Submission,
    }
}

/// Topic network: each ticker gets a topic profile (fraction of its posts
/// per topic) and tickers are linked by the cosine similarity of their
/// profiles when it reaches the threshold. Tickers without topic-labeled
/// posts are excluded and reported.
pub fn build_topic_network(
    posts: &[Post],
    min_mentions: usize,
    similarity_threshold: f64,
) -> (AssetGraph, Vec<String>) {
    let counts = mention_counts(posts);
    let candidates: Vec<String> = counts
        .iter()
        .filter(|(_, &c)| c >= min_mentions)
        .map(|(t, _)| t.clone())
        .collect();
    let mut profiles: BTreeMap<String, BTreeMap<u32, f64>> = BTreeMap::new();
    for post in posts {
        if let (Some(t), Some(topic)) = (post.single_ticker(), post.topic_id) {
            if candidates.iter().any(|c| c == t) {
                *profiles
                    .entry(t.to_string())
                    .or_default()
                    .entry(topic)
                    .or_insert(0.0) += 1.0;
            }
        }
    }
    let mut excluded = Vec::new();
    let mut nodes = Vec::new();
    let mut node_profiles: Vec<BTreeMap<u32, f64>> = Vec::new();
    for t in &candidates {
        match profiles.get(t.as_str()) {
            Some(profile) => {
                let total: f64 = profile.values().sum();
                let normalized: BTreeMap<u32, f64> =
                    profile.iter().map(|(k, v)| (*k, v / total)).collect();
                nodes.push(t.clone());
                node_profiles.push(normalized);
            }
            None => excluded.push(t.clone()),
        }
    }
    let mut edges = Vec::new();
    for i in 0..nodes.len() {
        for j in i + 1..nodes.len() {
            let w = cosine(&node_profiles[i], &node_profiles[j]);
            if w >= similarity_threshold && w > 0.0 {
                edges.push((i, j, w));
            }
        }
    }
    (
        AssetGraph {
            nodes,
            edges,
            provenance: Provenance::Topic,
        },
        excluded,
    )
}

fn cosine(a: &BTreeMap<u32, f64>, b: &BTreeMap<u32, f64>) -> f64 {
    let dot: f64 = a
        .iter()
        .filter_map(|(k, va)| b.get(k).map(|vb| va * vb))
        .sum();
    let na: f64 = a.values().map(|v| v * v).sum::<f64>().sqrt();
    let nb: f64 = b.values().map(|v| v * v).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

/// One row of the per-cluster report.
#[derive(Debug, Clone)]
pub struct ClusterReportRow {
    pub cluster: usize,
    pub tickers: Vec<String>,
    pub stats: SummaryStats,
    pub n_posts: usize,
    /// Mean pairwise return correlation of member tickers; None when
    /// fewer than two members are priced.
    pub within_correlation: Option<f64>,
}

/// Sentiment-portfolio statistics and within-cluster return correlation
/// per community. Clusters with fewer than `min_posts` portfolio samples
/// are omitted.
pub fn cluster_report(
    clustering: &Clustering,
    graph: &AssetGraph,
    posts: &[Post],
    prices: &BTreeMap<String, PriceSeries>,
    calendar_len: usize,
    min_posts: usize,
) -> Result<Vec<ClusterReportRow>> {
    let n_clusters = clustering.membership.iter().max().map_or(0, |m| m + 1);
    let mut rows = Vec::new();
    for cluster in 0..n_clusters {
        let tickers: Vec<String> = graph
            .nodes
            .iter()
            .zip(&clustering.membership)
            .filter(|(_, &c)| c == cluster)
            .map(|(t, _)| t.clone())
            .collect();
        let member = |p: &Post| {
            p.single_ticker()
                .is_some_and(|t| tickers.iter().any(|m| m == t))
        };
        let cluster_posts: Vec<Post> = posts.iter().filter(|p| member(p)).cloned().collect();
        let (samples, _dropped) = backtest::portfolio_samples(
            &cluster_posts,
            prices,
            calendar_len,
            backtest::PortfolioFilter::AllSubmissions,
        );
        if samples.len() < min_posts.max(2) {
            continue;
        }
        let realized: Vec<f64> = samples.iter().map(|s| s.realized).collect();
        let stats = summary_stats(&realized)?;
        let within_correlation = mean_pairwise_correlation(&tickers, prices, calendar_len);
        rows.push(ClusterReportRow {
            cluster,
            tickers,
            stats,
            n_posts: samples.len(),
            within_correlation,
        });
    }
    Ok(rows)
}

/// Mean Pearson correlation of daily log returns over each pair's common
/// sample; self-pairs excluded.
pub fn mean_pairwise_correlation(
    tickers: &[String],
    prices: &BTreeMap<String, PriceSeries>,
    calendar_len: usize,
) -> Option<f64> {
    let series: Vec<Vec<Option<f64>>> = tickers
        .iter()
        .filter_map(|t| prices.get(t).map(|s| s.returns_by_day(calendar_len)))
        .collect();
    if series.len() < 2 {
        return None;
    }
    let mut sum = 0.0;
    let mut count = 0usize;
    for i in 0..series.len() {
        for j in i + 1..series.len() {
            if let Some(r) = pearson_common(&series[i], &series[j]) {
                sum += r;
                count += 1;
            }
        }
    }
    if count == 0 {
        None
    } else {
        Some(sum / count as f64)
    }
}

fn pearson_common(a: &[Option<f64>], b: &[Option<f64>]) -> Option<f64> {
    let pairs: Vec<(f64, f64)> = a
        .iter()
        .zip(b)
        .filter_map(|(x, y)| Some(((*x)?, (*y)?)))
        .collect();
    if pairs.len() < 2 {
        return None;
    }
    let n = pairs.len() as f64;
    let mx = pairs.iter().map(|(x, _)| x).sum::<f64>() / n;
    let my = pairs.iter().map(|(_, y)| y).sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for (x, y) in &pairs {
        let dx = x - mx;
        let dy = y - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some(sxy / (sxx * syy).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::SentimentLabel;

    fn post(author: &str, ticker: &str, topic: Option<u32>) -> Post {
        Post {
            id: format!("{author}-{ticker}"),
            created_utc: 0,
            author_id: author.to_string(),
            text: String::new(),
            flair: None,
            sentiment_label: SentimentLabel::Bullish,
            sentiment_score: 0.5,
            topic_id: topic,
            tickers: vec![ticker.to_string()],
            is_dd: false,
            dd_label: None,
            num_comments: 1,
            max_comment_depth: 0,
            contains_url: false,
            word_count: 0,
            trading_day: Some(0),
        }
    }

    /// 7 SPY authors of whom 3 also post AAPL; 5 AAPL authors in total.
    fn figure_example() -> Vec<Post> {
        let mut posts = Vec::new();
        for a in ["a1", "a2", "a3", "a4", "a5", "a6", "a7"] {
            posts.push(post(a, "SPY", None));
        }
        for a in ["a1", "a2", "a3", "b1", "b2"] {
            posts.push(post(a, "AAPL", None));
        }
        posts
    }

    #[test]
    fn figure_edge_weight() {
        let g = build_submission_network(&figure_example(), 1, 0.2);
        let w = g.weight_between("SPY", "AAPL").unwrap();
        assert!((w - (3.0 / 7.0 + 3.0 / 5.0)).abs() < 1e-15);
    }

    #[test]
    fn below_threshold_no_edge() {
        let mut posts = Vec::new();
        for i in 0..10 {
            posts.push(post(&format!("x{i}"), "GME", None));
            posts.push(post(&format!("y{i}"), "AMC", None));
        }
        // one shared author in both directions: overlap 1/10 < 0.2
        posts.push(post("shared", "GME", None));
        posts.push(post("shared", "AMC", None));
        let g = build_submission_network(&posts, 1, 0.2);
        assert!(g.weight_between("GME", "AMC").is_none());
    }

    #[test]
    fn disjoint_authors_empty_edges() {
        let mut posts = Vec::new();
        for i in 0..5 {
            posts.push(post(&format!("x{i}"), "GME", None));
            posts.push(post(&format!("y{i}"), "AMC", None));
        }
        let g = build_submission_network(&posts, 1, 0.2);
        assert!(g.edges.is_empty());
        assert_eq!(g.nodes.len(), 2);
    }

    #[test]
    fn min_mentions_drops_nodes() {
        let mut posts = Vec::new();
        for i in 0..4 {
            posts.push(post(&format!("a{i}"), "GME", None));
        }
        posts.push(post("b", "AMC", None));
        let g = build_submission_network(&posts, 2, 0.2);
        assert_eq!(g.nodes, vec!["GME"]);
    }

    #[test]
    fn permutation_invariance() {
        let mut posts = figure_example();
        let g1 = build_submission_network(&posts, 1, 0.2);
        posts.reverse();
        let g2 = build_submission_network(&posts, 1, 0.2);
        assert_eq!(g1.nodes, g2.nodes);
        assert_eq!(g1.edges.len(), g2.edges.len());
        for (a, b) in g1.edges.iter().zip(&g2.edges) {
            assert_eq!(a.0, b.0);
            assert_eq!(a.1, b.1);
            assert!((a.2 - b.2).abs() < 1e-15);
        }
    }

    #[test]
    fn submission_weights_in_range() {
        let g = build_submission_network(&figure_example(), 1, 0.2);
        for (_, _, w) in &g.edges {
            assert!(*w > 0.0 && *w <= 2.0);
        }
    }

    #[test]
    fn topic_network_cosine() {
        let mut posts = Vec::new();
        // identical profiles
        for topic in [1u32, 2] {
            posts.push(post("a", "GME", Some(topic)));
            posts.push(post("b", "AMC", Some(topic)));
        }
        let (g, _) = build_topic_network(&posts, 1, 0.0);
        assert!((g.weight_between("GME", "AMC").unwrap() - 1.0).abs() < 1e-12);

        // disjoint topic support
        let posts = vec![post("a", "GME", Some(1)), post("b", "AMC", Some(2))];
        let (g, _) = build_topic_network(&posts, 1, 0.0);
        assert!(g.weight_between("GME", "AMC").is_none());

        // profiles (0.5, 0.5, 0) and (0, 0.5, 0.5): cosine 0.5
        let posts = vec![
            post("a", "GME", Some(1)),
            post("a", "GME", Some(2)),
            post("b", "AMC", Some(2)),
            post("b", "AMC", Some(3)),
        ];
        let (g, _) = build_topic_network(&posts, 1, 0.0);
        assert!((g.weight_between("GME", "AMC").unwrap() - 0.5).abs() < 1e-12);
        // and a threshold above 0.5 drops it
        let (g, _) = build_topic_network(&posts, 1, 0.6);
        assert!(g.weight_between("GME", "AMC").is_none());
    }

    #[test]
    fn topic_network_excludes_unlabeled_tickers() {
        let posts = vec![
            post("a", "GME", Some(1)),
            post("b", "AMC", None),
            post("c", "AMC", None),
        ];
        let (g, excluded) = build_topic_network(&posts, 1, 0.0);
        assert_eq!(g.nodes, vec!["GME"]);
        assert_eq!(excluded, vec!["AMC"]);
    }

    #[test]
    fn cluster_report_rows_and_thresholds() {
        use crate::marketdata::PriceSeries;
        let nodes = vec!["GME".to_string(), "AMC".to_string(), "SNAP".to_string()];
        let graph = AssetGraph {
            nodes,
            edges: vec![(0, 1, 1.0)],
            provenance: Provenance::Submission,
        };
        let clustering = Clustering {
            membership: vec![0, 0, 1],
            quality: 0.0,
            seed: 0,
            resolution: 1.0,
            quality_history: vec![],
        };
        let mut prices = BTreeMap::new();
        let wobble: Vec<f64> = vec![50.0, 51.5, 49.8, 52.2, 53.0, 51.1, 54.4, 53.9, 55.2, 56.0];
        for t in ["GME", "AMC"] {
            prices.insert(
                t.to_string(),
                PriceSeries::new(t, (0..10).collect(), wobble.clone()).unwrap(),
            );
        }
        let snap: Vec<f64> = (0..10).map(|i| 20.0 * 0.998f64.powi(i)).collect();
        prices.insert(
            "SNAP".to_string(),
            PriceSeries::new("SNAP", (0..10).collect(), snap).unwrap(),
        );
        let mut posts = Vec::new();
        for (i, ticker) in ["GME", "GME", "GME", "AMC", "SNAP", "SNAP"].iter().enumerate() {
            let mut p = post(&format!("u{i}"), ticker, None);
            p.trading_day = Some(i % 5);
            posts.push(p);
        }
        let rows = cluster_report(&clustering, &graph, &posts, &prices, 10, 3).unwrap();
        // cluster 1 (SNAP) has only 2 samples: below the threshold
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].cluster, 0);
        assert_eq!(rows[0].n_posts, 4);
        // members share a growth rate: correlation exactly 1
        assert!((rows[0].within_correlation.unwrap() - 1.0).abs() < 1e-9);
        assert!(rows[0].stats.sd >= 0.0);
    }

    #[test]
    fn identical_series_correlate_to_one() {
        let mut prices = BTreeMap::new();
        let vals: Vec<f64> = vec![100.0, 101.0, 99.5, 102.0, 103.0];
        prices.insert(
            "A".to_string(),
            PriceSeries::new("A", (0..5).collect(), vals.clone()).unwrap(),
        );
        prices.insert(
            "B".to_string(),
            PriceSeries::new("B", (0..5).collect(), vals).unwrap(),
        );
        let corr =
            mean_pairwise_correlation(&["A".into(), "B".into()], &prices, 5).unwrap();
        assert!((corr - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_ticker_has_no_correlation() {
        let mut prices = BTreeMap::new();
        prices.insert(
            "A".to_string(),
            PriceSeries::new("A", (0..3).collect(), vec![1.0, 2.0, 3.0]).unwrap(),
        );
        assert!(mean_pairwise_correlation(&["A".into()], &prices, 3).is_none());
    }
}
