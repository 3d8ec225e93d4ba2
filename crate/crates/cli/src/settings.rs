//! Run configuration: a JSON file mirroring the CLI flags, with flags
//! taking precedence over file values.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;

/// Optional values read from `--config <file>`.
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub posts: Option<PathBuf>,
    pub universe: Option<PathBuf>,
    pub index: Option<PathBuf>,
    pub prices_dir: Option<PathBuf>,
    pub vix: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub replicate: Option<PathBuf>,
    pub tickers: Option<Vec<String>>,
    pub top: Option<usize>,
    pub activity: Option<String>,
    pub period: Option<String>,
    pub half_width: Option<usize>,
    pub window: Option<usize>,
    pub min_obs: Option<usize>,
    pub exclude_memes: Option<bool>,
    pub start_rule: Option<String>,
    pub min_mentions: Option<usize>,
    pub threshold: Option<f64>,
    pub resolution: Option<f64>,
    pub min_posts: Option<usize>,
    pub exclude: Option<Vec<String>>,
    pub alpha: Option<f64>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let body = std::fs::read_to_string(p)
                    .with_context(|| format!("cannot read config {}", p.display()))?;
                serde_json::from_str(&body)
                    .with_context(|| format!("invalid config {}", p.display()))
            }
        }
    }
}

/// Fully resolved input paths; `--replicate <dir>` fills defaults from a
/// conventional dataset layout.
#[derive(Debug, Clone)]
pub struct Paths {
    pub posts: PathBuf,
    pub universe: PathBuf,
    pub index: PathBuf,
    pub prices_dir: PathBuf,
    pub vix: Option<PathBuf>,
    pub out: PathBuf,
}

pub struct PathInputs {
    pub posts: Option<PathBuf>,
    pub universe: Option<PathBuf>,
    pub index: Option<PathBuf>,
    pub prices_dir: Option<PathBuf>,
    pub vix: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub replicate: Option<PathBuf>,
}

impl Paths {
    pub fn resolve(inputs: PathInputs) -> Result<Self> {
        let from_dataset = |name: &str| -> Option<PathBuf> {
            inputs.replicate.as_ref().map(|dir| dir.join(name))
        };
        let posts = inputs
            .posts
            .or_else(|| from_dataset("posts.jsonl"))
            .context("missing --posts (or --replicate dataset dir)")?;
        let universe = inputs
            .universe
            .or_else(|| from_dataset("universe.csv"))
            .context("missing --universe")?;
        let index = inputs
            .index
            .or_else(|| from_dataset("index.csv"))
            .context("missing --index")?;
        let prices_dir = inputs
            .prices_dir
            .or_else(|| from_dataset("prices"))
            .context("missing --prices-dir")?;
        let vix = inputs.vix.or_else(|| from_dataset("vix_monthly.csv"));
        let out = inputs.out.context("missing --out")?;
        Ok(Self {
            posts,
            universe,
            index,
            prices_dir,
            vix,
            out,
        })
    }

    /// Every referenced input must exist before any computation starts.
    pub fn validate(&self, need_vix: bool) -> Result<()> {
        let mut missing = Vec::new();
        for (label, path) in [
            ("posts", &self.posts),
            ("universe", &self.universe),
            ("index", &self.index),
            ("prices-dir", &self.prices_dir),
        ] {
            if !path.exists() {
                missing.push(format!("{label}: {}", path.display()));
            }
        }
        if need_vix {
            match &self.vix {
                Some(p) if p.exists() => {}
                Some(p) => missing.push(format!("vix: {}", p.display())),
                None => missing.push("vix: not configured".to_string()),
            }
        }
        if !missing.is_empty() {
            bail!("missing inputs:\n  {}", missing.join("\n  "));
        }
        Ok(())
    }
}

pub fn require_seed(seed: Option<u64>) -> Result<u64> {
    seed.context("--seed is required for this command (stochastic analysis)")
}
