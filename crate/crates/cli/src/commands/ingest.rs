//! `ingest`: load, validate, and enrich the corpus; write the enriched
//! JSONL plus a summary table.

use std::io::Write;

use anyhow::Result;
use serde_json::json;
use tickerflow_core::corpus::{DdLabel, SentimentLabel};
use tickerflow_core::table::{write_table, Cell};

use crate::dataset::Dataset;
use crate::manifest::ManifestBuilder;
use crate::settings::Paths;

pub fn run(paths: &Paths) -> Result<()> {
    paths.validate(false)?;
    super::ensure_out_dir(&paths.out)?;
    let data = Dataset::load(paths, &[])?;

    let enriched_path = paths.out.join("posts_enriched.jsonl");
    let mut file = std::io::BufWriter::new(std::fs::File::create(&enriched_path)?);
    for post in &data.posts {
        let (title, selftext) = match post.text.split_once('\n') {
            Some((t, b)) => (t.to_string(), Some(b.to_string())),
            None => (post.text.clone(), None),
        };
        let record = json!({
            "id": post.id,
            "created_utc": post.created_utc,
            "author_id": post.author_id,
            "title": title,
            "selftext": selftext,
            "flair": post.flair,
            "sentiment_label": match post.sentiment_label {
                SentimentLabel::Bullish => "bullish",
                SentimentLabel::Bearish => "bearish",
                SentimentLabel::Neutral => "neutral",
            },
            "sentiment_score": post.sentiment_score,
            "topic_id": post.topic_id,
            "tickers": post.tickers,
            "is_dd": post.is_dd,
            "dd_label": post.dd_label.map(|l| match l {
                DdLabel::Bullish => "bullish",
                DdLabel::Bearish => "bearish",
            }),
            "num_comments": post.num_comments,
            "max_comment_depth": post.max_comment_depth,
            "contains_url": post.contains_url,
            "word_count": post.word_count,
        });
        writeln!(file, "{record}")?;
    }
    file.flush()?;
    drop(file);

    let ranked = data.tickers_by_mentions();
    let dd_posts = data.posts.iter().filter(|p| p.is_dd && p.dd_label.is_some()).count();
    let flaired = data
        .posts
        .iter()
        .filter(|p| p.flair.as_deref() == Some("DD"))
        .count();
    let summary_path = paths.out.join("ingest_summary.csv");
    let rows = vec![
        vec![Cell::from("posts_single_ticker"), Cell::from(data.posts.len())],
        vec![Cell::from("posts_after_calendar_dropped"), Cell::from(data.dropped_after_calendar)],
        vec![Cell::from("distinct_tickers"), Cell::from(ranked.len())],
        vec![Cell::from("labeled_dd_posts"), Cell::from(dd_posts)],
        vec![Cell::from("flaired_dd_posts"), Cell::from(flaired)],
        vec![Cell::from("trading_days"), Cell::from(data.calendar.len())],
        vec![Cell::from("priced_tickers"), Cell::from(data.prices.len())],
    ];
    write_table(&summary_path, &["metric", "value"], &rows)?;

    ManifestBuilder::new("ingest", &paths.out)
        .input(&paths.posts)
        .input(&paths.universe)
        .input(&paths.index)
        .output(&enriched_path)
        .output(&summary_path)
        .write()?;
    println!(
        "ingest: {} posts over {} trading days, {} tickers",
        data.posts.len(),
        data.calendar.len(),
        ranked.len()
    );
    Ok(())
}
