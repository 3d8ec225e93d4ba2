//! `report`: runs the full pipeline into one output tree.

use anyhow::Result;

use crate::commands::{backtest, car, cluster, ddgrid, entropy, granger, ingest, network, signals};
use crate::commands::network::NetworkParams;
use crate::manifest::ManifestBuilder;
use crate::settings::Paths;

pub struct ReportParams {
    pub seed: u64,
    pub exclude: Vec<String>,
    pub top: usize,
    pub replicate: bool,
}

fn sub(paths: &Paths, dir: &str) -> Paths {
    let mut p = paths.clone();
    p.out = paths.out.join(dir);
    p
}

pub fn run(paths: &Paths, params: &ReportParams) -> Result<()> {
    paths.validate(paths.vix.is_some())?;
    super::ensure_out_dir(&paths.out)?;

    ingest::run(&sub(paths, "ingest"))?;
    signals::run(
        &sub(paths, "signals"),
        &signals::SignalsParams {
            tickers: Vec::new(),
            top: Some(params.top),
            activity: "calendar".into(),
            period: "day".into(),
        },
    )?;
    signals::run(
        &sub(paths, "longterm"),
        &signals::SignalsParams {
            tickers: Vec::new(),
            top: Some(params.top),
            activity: "calendar".into(),
            period: "month".into(),
        },
    )?;
    car::run(
        &sub(paths, "car"),
        &car::CarParams {
            tickers: Vec::new(),
            top: Some(params.top),
            half_width: 14,
            window: 180,
            min_obs: 60,
            exclude_memes: false,
            exclude: params.exclude.clone(),
        },
    )?;
    granger::run(
        &sub(paths, "granger"),
        &granger::GrangerParams {
            tickers: Vec::new(),
            top: Some(params.top),
            start_rule: "cutoff2016".into(),
            activity: "calendar".into(),
            exclude: params.exclude.clone(),
        },
    )?;
    for kind in ["topic", "submission"] {
        let net = NetworkParams {
            kind: kind.into(),
            min_mentions: 30,
            threshold: None,
            resolution: 1.0,
            seed: params.seed,
        };
        network::run(&sub(paths, &format!("network_{kind}")), &net)?;
        cluster::run(
            &sub(paths, &format!("cluster_{kind}")),
            &cluster::ClusterParams {
                network: NetworkParams {
                    kind: kind.into(),
                    min_mentions: 30,
                    threshold: None,
                    resolution: 1.0,
                    seed: params.seed,
                },
                min_posts: 10,
                exclude: params.exclude.clone(),
            },
        )?;
    }
    backtest::run(
        &sub(paths, "backtest"),
        &backtest::BacktestParams {
            seed: params.seed,
            exclude: params.exclude.clone(),
            replicate: params.replicate,
        },
    )?;
    ddgrid::run(
        &sub(paths, "ddgrid"),
        &ddgrid::DdGridParams {
            window: 180,
            min_obs: 60,
            alpha: 0.05,
            exclude: params.exclude.clone(),
            replicate: params.replicate,
        },
    )?;
    if paths.vix.is_some() {
        entropy::run(
            &sub(paths, "entropy_vix"),
            &entropy::EntropyParams {
                replicate: params.replicate,
            },
        )?;
    }

    // top-level manifest lists the sub-manifests
    let mut manifest = ManifestBuilder::new("report", &paths.out);
    manifest
        .param("seed", params.seed)
        .param("top", params.top)
        .param("exclude", &params.exclude);
    let mut dirs: Vec<String> = std::fs::read_dir(&paths.out)?
        .collect::<std::io::Result<Vec<_>>>()?
        .into_iter()
        .filter(|e| e.path().is_dir())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .collect();
    dirs.sort();
    for dir in dirs {
        let sub_manifest = paths.out.join(&dir).join("manifest.json");
        if sub_manifest.exists() {
            manifest.output(&sub_manifest);
        }
    }
    manifest.write()?;
    println!("report: complete at {}", paths.out.display());
    Ok(())
}
