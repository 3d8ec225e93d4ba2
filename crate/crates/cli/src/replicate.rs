//! Replication targets: published headline values asserted only when the
//! original dataset is supplied via `--replicate`. The pipeline is
//! deterministic, so equality is checked at printed precision.

use anyhow::{bail, Result};
use tickerflow_core::econometrics::SummaryStats;

/// Round to the precision the value was printed at.
fn printed(x: f64, decimals: i32) -> f64 {
    let f = 10f64.powi(decimals);
    (x * f).round() / f
}

pub struct PortfolioTarget {
    pub row: &'static str,
    pub mean: f64,
    pub sd: f64,
    pub p_value: f64,
    pub n: usize,
}

pub const PORTFOLIO_TARGETS: [PortfolioTarget; 6] = [
    PortfolioTarget { row: "all_submissions", mean: -0.0177, sd: 0.22, p_value: 0.00, n: 199_104 },
    PortfolioTarget { row: "flaired_dd", mean: 0.0074, sd: 0.19, p_value: 0.02, n: 3_629 },
    PortfolioTarget { row: "labeled_dd", mean: 0.0054, sd: 0.14, p_value: 0.08, n: 2_117 },
    PortfolioTarget { row: "stock_returns", mean: 0.0000, sd: 0.04, p_value: 0.52, n: 10_411_549 },
    PortfolioTarget { row: "previous", mean: 0.0238, sd: 0.35, p_value: 0.00, n: 199_104 },
    PortfolioTarget { row: "random", mean: 0.0002, sd: 0.05, p_value: 0.06, n: 198_779 },
];

pub struct VixTarget {
    pub constant: f64,
    pub adj_close: f64,
    pub entropy: f64,
    pub r_squared: f64,
    pub n: usize,
}

pub const VIX_TARGET: VixTarget = VixTarget {
    constant: 12.1893,
    adj_close: 0.6656,
    entropy: -2.4950,
    r_squared: 0.493,
    n: 77,
};

pub fn check_portfolio(
    target: &PortfolioTarget,
    stats: &SummaryStats,
    failures: &mut Vec<String>,
) {
    let mut check = |label: &str, got: f64, want: f64, decimals: i32| {
        if printed(got, decimals) != want {
            failures.push(format!(
                "{}.{label}: got {got:.*}, published {want:.*}",
                target.row,
                decimals as usize,
                decimals as usize
            ));
        }
    };
    check("mean", stats.mean, target.mean, 4);
    check("sd", stats.sd, target.sd, 2);
    if let Some(p) = stats.p_value_mean_zero {
        check("p_value", p, target.p_value, 2);
    } else {
        failures.push(format!("{}.p_value: undefined", target.row));
    }
    if stats.n != target.n {
        failures.push(format!(
            "{}.n: got {}, published {}",
            target.row, stats.n, target.n
        ));
    }
}

pub fn finish(context: &str, failures: Vec<String>) -> Result<()> {
    if failures.is_empty() {
        println!("replication[{context}]: PASS");
        Ok(())
    } else {
        for f in &failures {
            println!("replication[{context}]: FAIL {f}");
        }
        bail!("{} replication mismatches in {context}", failures.len());
    }
}
