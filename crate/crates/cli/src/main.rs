mod commands;
mod dataset;
mod manifest;
mod replicate;
mod settings;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::network::NetworkParams;
use settings::{require_seed, FileConfig, PathInputs, Paths};

#[derive(Parser)]
#[command(
    name = "tickerflow",
    version,
    about = "Forum-sentiment market analytics: signals, event studies, causality tests, networks, and backtests"
)]
struct Cli {
    #[command(flatten)]
    globals: Globals,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Globals {
    /// JSON config mirroring the flags; flags override file values
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Corpus JSONL
    #[arg(long, global = true)]
    posts: Option<PathBuf>,
    /// Ticker universe CSV
    #[arg(long, global = true)]
    universe: Option<PathBuf>,
    /// Market index CSV; its dates define the trading calendar
    #[arg(long, global = true)]
    index: Option<PathBuf>,
    /// Directory of per-ticker price CSVs
    #[arg(long = "prices-dir", global = true)]
    prices_dir: Option<PathBuf>,
    /// Monthly volatility-index CSV
    #[arg(long, global = true)]
    vix: Option<PathBuf>,
    /// RNG seed; required by stochastic commands
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Replication dataset directory; switches published-value assertions on
    #[arg(long, global = true)]
    replicate: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Load, validate, and enrich the corpus
    Ingest,
    /// Per-ticker daily sentiment series
    Signals {
        #[arg(long, value_delimiter = ',')]
        tickers: Vec<String>,
        #[arg(long)]
        top: Option<usize>,
        /// Activity window: calendar|trading
        #[arg(long)]
        activity: Option<String>,
        /// day|week|month; week/month emit the long-horizon panel
        #[arg(long)]
        period: Option<String>,
    },
    /// Event-window CAR profiles around posts
    Car {
        #[arg(long, value_delimiter = ',')]
        tickers: Vec<String>,
        #[arg(long)]
        top: Option<usize>,
        #[arg(long = "half-width")]
        half_width: Option<usize>,
        #[arg(long)]
        window: Option<usize>,
        #[arg(long = "min-obs")]
        min_obs: Option<usize>,
        /// Drop GME and AMC before profiling
        #[arg(long = "exclude-memes")]
        exclude_memes: bool,
    },
    /// Sentiment-change to return Granger tests
    Granger {
        #[arg(long, value_delimiter = ',')]
        tickers: Vec<String>,
        #[arg(long)]
        top: Option<usize>,
        /// cutoff2016|first-mention
        #[arg(long = "start-rule")]
        start_rule: Option<String>,
        #[arg(long)]
        activity: Option<String>,
    },
    /// Build and cluster an asset network
    Network {
        /// topic|submission
        #[arg(long)]
        kind: String,
        #[arg(long = "min-mentions")]
        min_mentions: Option<usize>,
        #[arg(long)]
        threshold: Option<f64>,
        #[arg(long)]
        resolution: Option<f64>,
    },
    /// Per-cluster return statistics
    Cluster {
        #[arg(long)]
        kind: String,
        #[arg(long = "min-mentions")]
        min_mentions: Option<usize>,
        #[arg(long)]
        threshold: Option<f64>,
        #[arg(long)]
        resolution: Option<f64>,
        #[arg(long = "min-posts")]
        min_posts: Option<usize>,
    },
    /// Sentiment and control portfolios
    Backtest,
    /// The 3,744-model due-diligence regression grid
    Ddgrid {
        #[arg(long)]
        window: Option<usize>,
        #[arg(long = "min-obs")]
        min_obs: Option<usize>,
        /// Proactive-test level
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// Monthly topic entropy and the next-month volatility regression
    EntropyVix,
    /// Run the full pipeline
    Report {
        #[arg(long)]
        top: Option<usize>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let category = categorize(&e);
            eprintln!("error[{category}]: {e:#}");
            ExitCode::from(match category {
                "config" => 2,
                "data" => 3,
                "compute" => 4,
                "replication" => 6,
                _ => 1,
            })
        }
    }
}

fn categorize(e: &anyhow::Error) -> &'static str {
    use tickerflow_core::Error as CoreError;
    if let Some(core) = e.downcast_ref::<CoreError>() {
        return match core {
            CoreError::Parse { .. } | CoreError::Schema(_) | CoreError::MissingData(_) => "data",
            CoreError::Invalid(_) => "config",
            CoreError::Singular(_)
            | CoreError::Insufficient(_)
            | CoreError::Undefined(_)
            | CoreError::AfterCalendar(_) => "compute",
            CoreError::Io(_) | CoreError::Csv(_) => "io",
        };
    }
    let msg = format!("{e:#}");
    if msg.contains("replication mismatch") {
        "replication"
    } else if msg.contains("missing") || msg.contains("--") || msg.contains("config") {
        "config"
    } else {
        "io"
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let file = FileConfig::load(cli.globals.config.as_deref())?;
    if let Some(threads) = cli.globals.threads.or(file.threads) {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .ok();
    }
    let replicate_dir = cli.globals.replicate.clone().or(file.replicate.clone());
    let replicate = replicate_dir.is_some();
    let paths = Paths::resolve(PathInputs {
        posts: cli.globals.posts.clone().or(file.posts.clone()),
        universe: cli.globals.universe.clone().or(file.universe.clone()),
        index: cli.globals.index.clone().or(file.index.clone()),
        prices_dir: cli.globals.prices_dir.clone().or(file.prices_dir.clone()),
        vix: cli.globals.vix.clone().or(file.vix.clone()),
        out: cli.globals.out.clone().or(file.out.clone()),
        replicate: replicate_dir,
    })?;
    let seed = cli.globals.seed.or(file.seed);
    let exclude = file.exclude.clone().unwrap_or_else(|| vec!["SPY".to_string()]);

    match cli.command {
        Command::Ingest => commands::ingest::run(&paths),
        Command::Signals { tickers, top, activity, period } => commands::signals::run(
            &paths,
            &commands::signals::SignalsParams {
                tickers: non_empty(tickers, file.tickers.clone()),
                top: top.or(file.top),
                activity: activity
                    .or(file.activity.clone())
                    .unwrap_or_else(|| "calendar".into()),
                period: period
                    .or(file.period.clone())
                    .unwrap_or_else(|| "day".into()),
            },
        ),
        Command::Car { tickers, top, half_width, window, min_obs, exclude_memes } => {
            commands::car::run(
                &paths,
                &commands::car::CarParams {
                    tickers: non_empty(tickers, file.tickers.clone()),
                    top: top.or(file.top),
                    half_width: half_width.or(file.half_width).unwrap_or(14),
                    window: window.or(file.window).unwrap_or(180),
                    min_obs: min_obs.or(file.min_obs).unwrap_or(60),
                    exclude_memes: exclude_memes || file.exclude_memes.unwrap_or(false),
                    exclude: exclude.clone(),
                },
            )
        }
        Command::Granger { tickers, top, start_rule, activity } => commands::granger::run(
            &paths,
            &commands::granger::GrangerParams {
                tickers: non_empty(tickers, file.tickers.clone()),
                top: top.or(file.top),
                start_rule: start_rule
                    .or(file.start_rule.clone())
                    .unwrap_or_else(|| "cutoff2016".into()),
                activity: activity
                    .or(file.activity.clone())
                    .unwrap_or_else(|| "calendar".into()),
                exclude: exclude.clone(),
            },
        ),
        Command::Network { kind, min_mentions, threshold, resolution } => commands::network::run(
            &paths,
            &NetworkParams {
                kind,
                min_mentions: min_mentions.or(file.min_mentions).unwrap_or(150),
                threshold: threshold.or(file.threshold),
                resolution: resolution.or(file.resolution).unwrap_or(1.0),
                seed: require_seed(seed)?,
            },
        ),
        Command::Cluster { kind, min_mentions, threshold, resolution, min_posts } => {
            commands::cluster::run(
                &paths,
                &commands::cluster::ClusterParams {
                    network: NetworkParams {
                        kind: kind.clone(),
                        min_mentions: min_mentions.or(file.min_mentions).unwrap_or(150),
                        threshold: threshold.or(file.threshold),
                        resolution: resolution.or(file.resolution).unwrap_or(1.0),
                        seed: require_seed(seed)?,
                    },
                    min_posts: min_posts
                        .or(file.min_posts)
                        .unwrap_or(if kind == "topic" { 1000 } else { 100 }),
                    exclude: exclude.clone(),
                },
            )
        }
        Command::Backtest => commands::backtest::run(
            &paths,
            &commands::backtest::BacktestParams {
                seed: require_seed(seed)?,
                exclude: exclude.clone(),
                replicate,
            },
        ),
        Command::Ddgrid { window, min_obs, alpha } => commands::ddgrid::run(
            &paths,
            &commands::ddgrid::DdGridParams {
                window: window.or(file.window).unwrap_or(180),
                min_obs: min_obs.or(file.min_obs).unwrap_or(60),
                alpha: alpha.or(file.alpha).unwrap_or(0.05),
                exclude: exclude.clone(),
                replicate,
            },
        ),
        Command::EntropyVix => commands::entropy::run(
            &paths,
            &commands::entropy::EntropyParams { replicate },
        ),
        Command::Report { top } => commands::report::run(
            &paths,
            &commands::report::ReportParams {
                seed: require_seed(seed)?,
                exclude: exclude.clone(),
                top: top.or(file.top).unwrap_or(8),
                replicate,
            },
        ),
    }
}

fn non_empty(flag: Vec<String>, file: Option<Vec<String>>) -> Vec<String> {
    if flag.is_empty() {
        file.unwrap_or_default()
    } else {
        flag
    }
}
