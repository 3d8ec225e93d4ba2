//! `entropy-vix`: monthly topic entropy and the next-month volatility
//! regression.

use anyhow::{Context, Result};
use tickerflow_core::backtest::entropy_vix_regression;
use tickerflow_core::marketdata::load_monthly_series;
use tickerflow_core::signals::monthly_entropy_series;
use tickerflow_core::table::{write_table, Cell};

use crate::dataset::Dataset;
use crate::manifest::ManifestBuilder;
use crate::replicate::{finish, VIX_TARGET};
use crate::settings::Paths;

pub struct EntropyParams {
    pub replicate: bool,
}

pub fn run(paths: &Paths, params: &EntropyParams) -> Result<()> {
    paths.validate(true)?;
    let vix_path = paths.vix.as_ref().expect("validated above");
    let data = Dataset::load(paths, &[])?;
    super::ensure_out_dir(&paths.out)?;

    let entropy = monthly_entropy_series(&data.posts);
    let vix = load_monthly_series(vix_path)
        .with_context(|| format!("loading VIX {}", vix_path.display()))?;

    let series_path = paths.out.join("entropy_series.csv");
    let series_rows: Vec<Vec<Cell>> = entropy
        .iter()
        .map(|((y, m), h)| vec![Cell::from(format!("{y}-{m:02}")), Cell::from(*h)])
        .collect();
    write_table(&series_path, &["month", "entropy"], &series_rows)?;

    let result = entropy_vix_regression(&entropy, &vix)?;
    let reg_path = paths.out.join("entropy_vix.csv");
    let reg_rows: Vec<Vec<Cell>> = result
        .to_rows()
        .into_iter()
        .map(|r| r.into_iter().map(Cell::Str).collect())
        .collect();
    write_table(&reg_path, &["variable", "coef", "se", "t", "p"], &reg_rows)?;

    ManifestBuilder::new("entropy-vix", &paths.out)
        .input(&paths.posts)
        .input(vix_path)
        .param("months", result.n_obs + 1)
        .param("r_squared", result.r_squared)
        .output(&series_path)
        .output(&reg_path)
        .write()?;
    println!(
        "entropy-vix: {} regression rows, R2 {:.3}",
        result.n_obs, result.r_squared
    );

    if params.replicate {
        let mut failures = Vec::new();
        let mut check = |label: &str, got: f64, want: f64, decimals: i32| {
            let f = 10f64.powi(decimals);
            if (got * f).round() / f != want {
                failures.push(format!("{label}: got {got}, published {want}"));
            }
        };
        check("const", result.coef("const").unwrap_or(f64::NAN), VIX_TARGET.constant, 4);
        check(
            "adj_close",
            result.coef("adj_close").unwrap_or(f64::NAN),
            VIX_TARGET.adj_close,
            4,
        );
        check(
            "entropy",
            result.coef("entropy").unwrap_or(f64::NAN),
            VIX_TARGET.entropy,
            4,
        );
        check("r_squared", result.r_squared, VIX_TARGET.r_squared, 3);
        if result.n_obs != VIX_TARGET.n {
            failures.push(format!("n: got {}, published {}", result.n_obs, VIX_TARGET.n));
        }
        finish("entropy-vix", failures)?;
    }
    Ok(())
}
