//! Forum-corpus loading, validation, and enrichment: ticker extraction,
//! single-ticker filtering, trading-day alignment, and due-diligence
//! feature annotation.

use std::collections::BTreeMap;
use std::io::BufRead;
use std::path::Path;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::marketdata::TradingCalendar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SentimentLabel {
    Bullish,
    Bearish,
    Neutral,
}

impl SentimentLabel {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "bullish" => Ok(Self::Bullish),
            "bearish" => Ok(Self::Bearish),
            "neutral" => Ok(Self::Neutral),
            other => Err(Error::Schema(format!(
                "unknown sentiment_label `{other}` (expected bullish/bearish/neutral)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DdLabel {
    Bullish,
    Bearish,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exchange {
    Nyse,
    Nasdaq,
    Other,
}

impl Exchange {
    fn parse(s: &str) -> Self {
        match s.to_ascii_uppercase().as_str() {
            "NYSE" => Self::Nyse,
            "NASDAQ" => Self::Nasdaq,
            _ => Self::Other,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct UniverseEntry {
    pub exchange: Exchange,
    /// Symbols forming common words match only as $-prefixed cashtags.
    pub requires_cashtag: bool,
    /// Blocked symbols are never emitted by extraction.
    pub blocked: bool,
}

/// Symbol table driving ticker extraction and filtering.
#[derive(Debug, Clone, Default)]
pub struct TickerUniverse {
    entries: BTreeMap<String, UniverseEntry>,
}

impl TickerUniverse {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, symbol: impl Into<String>, entry: UniverseEntry) -> Result<()> {
        let symbol = symbol.into();
        if symbol.is_empty() || symbol.chars().any(|c| c.is_ascii_lowercase()) {
            return Err(Error::Schema(format!(
                "universe symbol `{symbol}` must be a non-empty uppercase string"
            )));
        }
        self.entries.insert(symbol, entry);
        Ok(())
    }

    pub fn get(&self, symbol: &str) -> Option<&UniverseEntry> {
        self.entries.get(symbol)
    }

    pub fn symbols(&self) -> impl Iterator<Item = &String> {
        self.entries.keys()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Reads `symbol,exchange,requires_cashtag,blocked` rows.
    pub fn load<P: AsRef<Path>>(path: P) -> Result<Self> {
        let path_str = path.as_ref().display().to_string();
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_path(path.as_ref())?;
        let mut universe = Self::new();
        for (i, record) in reader.records().enumerate() {
            let line = i + 2;
            let record = record?;
            if record.len() < 4 {
                return Err(Error::Parse {
                    path: path_str.clone(),
                    line,
                    message: "expected 4 columns".into(),
                });
            }
            let parse_bool = |s: &str| match s {
                "true" | "1" => Ok(true),
                "false" | "0" => Ok(false),
                other => Err(Error::Parse {
                    path: path_str.clone(),
                    line,
                    message: format!("bad boolean `{other}`"),
                }),
            };
            universe.insert(
                record[0].to_string(),
                UniverseEntry {
                    exchange: Exchange::parse(&record[1]),
                    requires_cashtag: parse_bool(&record[2])?,
                    blocked: parse_bool(&record[3])?,
                },
            )?;
        }
        Ok(universe)
    }
}

/// One forum submission with its classifier outputs and cascade features.
#[derive(Debug, Clone)]
pub struct Post {
    pub id: String,
    pub created_utc: i64,
    pub author_id: String,
    /// Title and body concatenated.
    pub text: String,
    pub flair: Option<String>,
    pub sentiment_label: SentimentLabel,
    /// Bullish-minus-bearish classifier output in [-1, 1].
    pub sentiment_score: f64,
    pub topic_id: Option<u32>,
    pub tickers: Vec<String>,
    pub is_dd: bool,
    pub dd_label: Option<DdLabel>,
    /// The submission counts as its own first comment.
    pub num_comments: u32,
    pub max_comment_depth: u32,
    pub contains_url: bool,
    pub word_count: u32,
    /// Filled by trading-day alignment.
    pub trading_day: Option<usize>,
}

impl Post {
    /// Max cascade depth normalized by log comment count; zero for
    /// submission-only cascades.
    pub fn normalized_depth(&self) -> f64 {
        if self.num_comments >= 2 {
            self.max_comment_depth as f64 / (self.num_comments as f64).ln()
        } else {
            0.0
        }
    }

    pub fn single_ticker(&self) -> Option<&str> {
        if self.tickers.len() == 1 {
            Some(&self.tickers[0])
        } else {
            None
        }
    }
}

/// JSONL record; derived fields are nullable and recomputed when absent.
#[derive(Debug, Deserialize)]
struct RawPost {
    id: String,
    created_utc: i64,
    author_id: String,
    title: String,
    selftext: Option<String>,
    flair: Option<String>,
    sentiment_label: String,
    sentiment_score: f64,
    topic_id: Option<u32>,
    tickers: Option<Vec<String>>,
    is_dd: Option<bool>,
    dd_label: Option<String>,
    num_comments: Option<u32>,
    max_comment_depth: Option<u32>,
    contains_url: Option<bool>,
    word_count: Option<u32>,
}

/// Loads posts from a JSONL file, computing missing derived fields and
/// sorting by creation time.
pub fn load_posts<P: AsRef<Path>>(path: P, universe: &TickerUniverse) -> Result<Vec<Post>> {
    let path_str = path.as_ref().display().to_string();
    let file = std::fs::File::open(path.as_ref())?;
    let reader = std::io::BufReader::new(file);
    let mut posts = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawPost = serde_json::from_str(&line).map_err(|e| Error::Parse {
            path: path_str.clone(),
            line: line_no,
            message: e.to_string(),
        })?;
        let post = enrich(raw, universe).map_err(|e| Error::Parse {
            path: path_str.clone(),
            line: line_no,
            message: e.to_string(),
        })?;
        posts.push(post);
    }
    posts.sort_by_key(|p| p.created_utc);
    Ok(posts)
}

fn enrich(raw: RawPost, universe: &TickerUniverse) -> Result<Post> {
    let sentiment_label = SentimentLabel::parse(&raw.sentiment_label)?;
    match sentiment_label {
        SentimentLabel::Bullish if raw.sentiment_score <= 0.0 => {
            return Err(Error::Schema(format!(
                "bullish post {} has nonpositive sentiment_score {}",
                raw.id, raw.sentiment_score
            )));
        }
        SentimentLabel::Bearish if raw.sentiment_score >= 0.0 => {
            return Err(Error::Schema(format!(
                "bearish post {} has nonnegative sentiment_score {}",
                raw.id, raw.sentiment_score
            )));
        }
        SentimentLabel::Neutral if raw.sentiment_score != 0.0 => {
            return Err(Error::Schema(format!(
                "neutral post {} has nonzero sentiment_score {}",
                raw.id, raw.sentiment_score
            )));
        }
        _ => {}
    }
    if raw.sentiment_score.abs() > 1.0 {
        return Err(Error::Schema(format!(
            "post {} sentiment_score {} outside [-1, 1]",
            raw.id, raw.sentiment_score
        )));
    }
    let dd_label = match raw.dd_label.as_deref() {
        None => None,
        Some("bullish") => Some(DdLabel::Bullish),
        Some("bearish") => Some(DdLabel::Bearish),
        Some(other) => {
            return Err(Error::Schema(format!(
                "unknown dd_label `{other}` (expected bullish/bearish)"
            )));
        }
    };
    if let Some(n) = raw.num_comments {
        if n == 0 {
            return Err(Error::Schema(format!(
                "post {} has num_comments 0; the submission counts as a comment",
                raw.id
            )));
        }
    }
    let text = match &raw.selftext {
        Some(body) if !body.is_empty() => format!("{}\n{}", raw.title, body),
        _ => raw.title.clone(),
    };
    let tickers = match raw.tickers {
        Some(list) => {
            let mut seen = Vec::new();
            for t in list {
                if !seen.contains(&t) {
                    seen.push(t);
                }
            }
            seen
        }
        None => extract_tickers(&text, universe),
    };
    let word_count = raw
        .word_count
        .unwrap_or_else(|| text.split_whitespace().count() as u32);
    let contains_url = raw.contains_url.unwrap_or_else(|| contains_url(&text));
    Ok(Post {
        id: raw.id,
        created_utc: raw.created_utc,
        author_id: raw.author_id,
        text,
        flair: raw.flair,
        sentiment_label,
        sentiment_score: raw.sentiment_score,
        topic_id: raw.topic_id,
        tickers,
        is_dd: raw.is_dd.unwrap_or(false),
        dd_label,
        num_comments: raw.num_comments.unwrap_or(1),
        max_comment_depth: raw.max_comment_depth.unwrap_or(0),
        contains_url,
        word_count,
        trading_day: None,
    })
}

/// Whole-token, case-strict ticker extraction. Token boundaries are any
/// non-alphanumeric character; cashtag-only symbols need an immediately
/// preceding `$`; blocked symbols never match. Result is deduplicated in
/// first-seen order.
pub fn extract_tickers(text: &str, universe: &TickerUniverse) -> Vec<String> {
    let bytes = text.as_bytes();
    let mut found: Vec<String> = Vec::new();
    let mut start = None;
    let push_token = |from: usize, to: usize, found: &mut Vec<String>| {
        let token = &text[from..to];
        if let Some(entry) = universe.get(token) {
            if entry.blocked {
                return;
            }
            if entry.requires_cashtag {
                let preceded = from > 0 && bytes[from - 1] == b'$';
                if !preceded {
                    return;
                }
            }
            if !found.iter().any(|t| t == token) {
                found.push(token.to_string());
            }
        }
    };
    for (i, b) in bytes.iter().enumerate() {
        if b.is_ascii_alphanumeric() {
            if start.is_none() {
                start = Some(i);
            }
        } else if let Some(s) = start.take() {
            push_token(s, i, &mut found);
        }
    }
    if let Some(s) = start {
        push_token(s, bytes.len(), &mut found);
    }
    found
}

fn url_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?i)\b(?:https?://|www\.)[^\s<>()\[\]]+").unwrap())
}

const IMAGE_EXTENSIONS: [&str; 7] = ["png", "jpg", "jpeg", "gif", "bmp", "webp", "svg"];

/// URL detection excluding image links.
pub fn contains_url(text: &str) -> bool {
    for m in url_regex().find_iter(text) {
        let url = m.as_str().trim_end_matches(['.', ',', '!', '?', ';', ':']);
        let path = url.split(['?', '#']).next().unwrap_or(url);
        let is_image = path
            .rsplit('.')
            .next()
            .is_some_and(|ext| IMAGE_EXTENSIONS.contains(&ext.to_ascii_lowercase().as_str()));
        if !is_image {
            return true;
        }
    }
    false
}

/// Single-ticker retention policy.
#[derive(Debug, Clone, Copy)]
pub struct FilterConfig {
    /// Number of tickers a post must mention after cleanup (1 in the
    /// reference pipeline).
    pub required_ticker_count: usize,
    /// Drop symbols listed outside NYSE/NASDAQ before counting.
    pub nyse_nasdaq_only: bool,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self {
            required_ticker_count: 1,
            nyse_nasdaq_only: true,
        }
    }
}

/// Retains posts whose ticker list, after removing blocked / off-exchange
/// symbols, has exactly the required length. Ticker lists of retained
/// posts are replaced by the cleaned list; order is preserved.
pub fn filter_posts(
    posts: &[Post],
    universe: &TickerUniverse,
    config: FilterConfig,
) -> Vec<Post> {
    posts
        .iter()
        .filter_map(|post| {
            let kept: Vec<String> = post
                .tickers
                .iter()
                .filter(|t| {
                    universe.get(t).is_some_and(|e| {
                        !e.blocked
                            && (!config.nyse_nasdaq_only
                                || matches!(e.exchange, Exchange::Nyse | Exchange::Nasdaq))
                    })
                })
                .cloned()
                .collect();
            if kept.len() == config.required_ticker_count {
                let mut p = post.clone();
                p.tickers = kept;
                Some(p)
            } else {
                None
            }
        })
        .collect()
}

/// Fills `trading_day` on every post; posts after the last calendar close
/// are dropped and counted.
pub fn align_posts(posts: Vec<Post>, calendar: &TradingCalendar) -> (Vec<Post>, usize) {
    let mut aligned = Vec::with_capacity(posts.len());
    let mut dropped = 0;
    for mut post in posts {
        match calendar.align(post.created_utc) {
            Ok(idx) => {
                post.trading_day = Some(idx);
                aligned.push(post);
            }
            Err(_) => dropped += 1,
        }
    }
    (aligned, dropped)
}

/// Comment metadata for cascade-feature annotation; the submission itself
/// sits at depth 0 and is not part of the list.
#[derive(Debug, Clone, Copy)]
pub struct CommentMeta {
    pub created_utc: i64,
    pub depth: i64,
}

const DAY_SECONDS: i64 = 24 * 3600;

/// Recomputes the cascade features of a DD post from its comment list,
/// counting only comments within 24 hours of submission.
pub fn annotate_dd_features(post: &Post, comments: &[CommentMeta]) -> Result<Post> {
    if !post.is_dd {
        return Err(Error::Invalid(format!("post {} is not a DD post", post.id)));
    }
    let mut num_comments: u32 = 1; // the submission itself
    let mut max_depth: u32 = 0;
    for c in comments {
        if c.depth < 0 {
            return Err(Error::Schema(format!(
                "negative comment depth {} on post {}",
                c.depth, post.id
            )));
        }
        let dt = c.created_utc - post.created_utc;
        if (0..=DAY_SECONDS).contains(&dt) {
            num_comments += 1;
            max_depth = max_depth.max(c.depth as u32);
        }
    }
    let mut annotated = post.clone();
    annotated.num_comments = num_comments;
    annotated.max_comment_depth = max_depth;
    annotated.contains_url = contains_url(&post.text);
    Ok(annotated)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::marketdata::TradingCalendar;
    use chrono::NaiveDate;
    use std::io::Write;

    fn universe() -> TickerUniverse {
        let mut u = TickerUniverse::new();
        let plain = |ex| UniverseEntry {
            exchange: ex,
            requires_cashtag: false,
            blocked: false,
        };
        u.insert("GME", plain(Exchange::Nyse)).unwrap();
        u.insert("AMC", plain(Exchange::Nyse)).unwrap();
        u.insert(
            "WISH",
            UniverseEntry {
                exchange: Exchange::Nasdaq,
                requires_cashtag: true,
                blocked: false,
            },
        )
        .unwrap();
        u.insert(
            "SI",
            UniverseEntry {
                exchange: Exchange::Nyse,
                requires_cashtag: false,
                blocked: true,
            },
        )
        .unwrap();
        u.insert("PINK", plain(Exchange::Other)).unwrap();
        u
    }

    #[test]
    fn cashtag_required_symbol() {
        let u = universe();
        assert_eq!(extract_tickers("buying $WISH calls", &u), vec!["WISH"]);
        assert!(extract_tickers("I WISH I had sold", &u).is_empty());
    }

    #[test]
    fn blocked_symbol_never_matches() {
        let u = universe();
        assert!(extract_tickers("SI is at 140%", &u).is_empty());
        assert!(extract_tickers("$SI squeeze", &u).is_empty());
    }

    #[test]
    fn whole_token_and_case_strict() {
        let u = universe();
        assert_eq!(extract_tickers("GME to the moon", &u), vec!["GME"]);
        assert!(extract_tickers("gme to the moon", &u).is_empty());
        assert!(extract_tickers("AGMEX is not GMEs", &u).is_empty());
        assert_eq!(extract_tickers("GME,AMC!GME", &u), vec!["GME", "AMC"]);
    }

    #[test]
    fn extraction_is_idempotent_on_lowercased_text() {
        let u = universe();
        let text = "buying $WISH and GME before SI drops";
        let found = extract_tickers(text, &u);
        assert_eq!(found, vec!["WISH", "GME"]);
        assert!(extract_tickers(&text.to_lowercase(), &u).is_empty());
    }

    #[test]
    fn url_detection_skips_images() {
        assert!(contains_url("see https://example.com/report for details"));
        assert!(!contains_url("chart: https://i.example.com/chart.png"));
        assert!(!contains_url("chart: https://i.example.com/chart.PNG?w=300"));
        assert!(contains_url("www.example.org/filing.pdf"));
        assert!(!contains_url("no links here"));
    }

    fn post_line(extra: &str) -> String {
        format!(
            concat!(
                r#"{{"id":"p1","created_utc":1609459200,"author_id":"a1","title":"GME to the moon","selftext":null,"#,
                r#""flair":null,"sentiment_label":"bullish","sentiment_score":0.8,"topic_id":3,{}"#,
                r#""is_dd":false,"dd_label":null,"num_comments":5,"max_comment_depth":2,"contains_url":false,"word_count":4}}"#
            ),
            extra
        )
    }

    #[test]
    fn load_posts_identity_and_derivation() {
        let u = universe();
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "{}", post_line(r#""tickers":["GME"],"#)).unwrap();
        writeln!(f, "{}", post_line(r#""tickers":null,"#)).unwrap();
        let posts = load_posts(f.path(), &u).unwrap();
        assert_eq!(posts.len(), 2);
        // provided list echoed, missing list extracted
        assert_eq!(posts[0].tickers, vec!["GME"]);
        assert_eq!(posts[1].tickers, vec!["GME"]);
        assert_eq!(posts[0].num_comments, 5);
    }

    #[test]
    fn load_posts_rejects_unknown_label() {
        let u = universe();
        let mut f = tempfile::NamedTempFile::new().unwrap();
        let line = post_line(r#""tickers":["GME"],"#).replace("bullish", "sideways");
        // keep the score consistent with nothing: label parse fails first
        writeln!(f, "{line}").unwrap();
        match load_posts(f.path(), &u) {
            Err(Error::Parse { line, message, .. }) => {
                assert_eq!(line, 1);
                assert!(message.contains("sentiment_label"), "{message}");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn load_posts_rejects_sign_mismatch() {
        let u = universe();
        let mut f = tempfile::NamedTempFile::new().unwrap();
        let line = post_line(r#""tickers":["GME"],"#).replace("0.8", "-0.8");
        writeln!(f, "{line}").unwrap();
        assert!(load_posts(f.path(), &u).is_err());
    }

    #[test]
    fn load_posts_reports_malformed_line_number() {
        let u = universe();
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "{}", post_line(r#""tickers":["GME"],"#)).unwrap();
        writeln!(f, "{{not json").unwrap();
        match load_posts(f.path(), &u) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    fn mk_post(tickers: &[&str]) -> Post {
        Post {
            id: "x".into(),
            created_utc: 0,
            author_id: "a".into(),
            text: String::new(),
            flair: None,
            sentiment_label: SentimentLabel::Neutral,
            sentiment_score: 0.0,
            topic_id: None,
            tickers: tickers.iter().map(|s| s.to_string()).collect(),
            is_dd: false,
            dd_label: None,
            num_comments: 1,
            max_comment_depth: 0,
            contains_url: false,
            word_count: 0,
            trading_day: None,
        }
    }

    #[test]
    fn filter_keeps_exactly_one_ticker() {
        let u = universe();
        let posts = vec![
            mk_post(&["GME"]),
            mk_post(&["GME", "AMC"]),
            mk_post(&["GME", "PINK"]), // off-exchange symbol removed first
            mk_post(&[]),
        ];
        let kept = filter_posts(&posts, &u, FilterConfig::default());
        assert_eq!(kept.len(), 2);
        assert_eq!(kept[0].tickers, vec!["GME"]);
        assert_eq!(kept[1].tickers, vec!["GME"]);
    }

    #[test]
    fn filter_output_is_subsequence() {
        let u = universe();
        let posts: Vec<Post> = (0..20)
            .map(|i| {
                let mut p = mk_post(if i % 3 == 0 { &["GME", "AMC"] } else { &["AMC"] });
                p.id = format!("p{i}");
                p
            })
            .collect();
        let kept = filter_posts(&posts, &u, FilterConfig::default());
        let ids: Vec<&str> = posts.iter().map(|p| p.id.as_str()).collect();
        let mut cursor = 0;
        for k in &kept {
            let pos = ids[cursor..].iter().position(|id| *id == k.id).unwrap();
            cursor += pos + 1;
        }
        for k in &kept {
            let entry = u.get(&k.tickers[0]).unwrap();
            assert!(!entry.blocked);
        }
    }

    #[test]
    fn align_is_monotone() {
        let dates: Vec<NaiveDate> = (1..=28)
            .filter_map(|d| NaiveDate::from_ymd_opt(2021, 6, d))
            .filter(|d| {
                use chrono::Datelike;
                d.weekday().number_from_monday() <= 5
            })
            .collect();
        let cal = TradingCalendar::new(dates).unwrap();
        let base = 1622548800; // 2021-06-01 12:00 UTC
        let mut prev = 0;
        for k in 0..200 {
            let ts = base + k * 7200;
            if let Ok(idx) = cal.align(ts) {
                assert!(idx >= prev);
                prev = idx;
            }
        }
    }

    #[test]
    fn dd_annotation_counts_24h_window() {
        let mut post = mk_post(&["GME"]);
        post.is_dd = true;
        post.text = "deep dive https://example.com/source".into();
        // no comments: submission-only cascade
        let solo = annotate_dd_features(&post, &[]).unwrap();
        assert_eq!(solo.num_comments, 1);
        assert_eq!(solo.normalized_depth(), 0.0);
        // three comments in 24h at depths 1,1,2; one at +25h excluded
        let comments = [
            CommentMeta { created_utc: 600, depth: 1 },
            CommentMeta { created_utc: 3_600, depth: 1 },
            CommentMeta { created_utc: 80_000, depth: 2 },
            CommentMeta { created_utc: 25 * 3600, depth: 9 },
        ];
        let annotated = annotate_dd_features(&post, &comments).unwrap();
        assert_eq!(annotated.num_comments, 4);
        assert_eq!(annotated.max_comment_depth, 2);
        let expect = 2.0 / 4.0f64.ln();
        assert!((annotated.normalized_depth() - expect).abs() < 1e-12);
        assert!(annotated.contains_url);
    }

    #[test]
    fn dd_annotation_rejects_negative_depth() {
        let mut post = mk_post(&["GME"]);
        post.is_dd = true;
        let comments = [CommentMeta { created_utc: 10, depth: -1 }];
        assert!(annotate_dd_features(&post, &comments).is_err());
    }
}
