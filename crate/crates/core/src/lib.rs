//! Batch analytics over a labeled social-forum corpus and daily price
//! series: sentiment time series, CAPM event studies with cumulative
//! abnormal returns, Granger-causality tests, asset co-mention networks
//! with Leiden community detection, portfolio backtests, a due-diligence
//! panel-regression grid, and a topic-entropy volatility regression.

pub mod backtest;
pub mod corpus;
pub mod econometrics;
pub mod error;
pub mod eventstudy;
pub mod marketdata;
pub mod networks;
pub mod signals;
pub mod table;

pub use error::{Error, Result};
