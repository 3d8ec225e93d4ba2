//! Self-contained statistical kernel: OLS with inference, summary
//! statistics, distribution tails, unit-root and Granger-causality tests,
//! and panel fixed-effects estimation.

pub mod adf;
pub mod dist;
pub mod granger;
pub mod ols;
pub mod panel;
pub mod summary;

pub use adf::{adf_test, AdfResult};
pub use dist::{tail_probability, TailDist};
pub use granger::{granger_test, GrangerResult, GrangerVariant};
pub use ols::{ols, Design, RegressionResult};
pub use panel::panel_fe;
pub use summary::{mean_zero_ttest, summary_stats, SummaryStats};
