//! Dynamic credit hedging toolkit.
//!
//! The pipeline builds three daily signals (credit risk from option-implied
//! risk-neutral distributions, a DTS-weighted liquidity factor from cleaned
//! bond trades, and time-series momentum on duration-neutral returns), times
//! short positions in credit ETFs with rolling OLS or CCA models, and replays
//! the resulting hedge through a cost-, funding- and volume-aware backtester.
//!
//! Data-parallel work (per-date fits, grid cells, lag runs) goes through
//! [`par::Execution`], which uses rayon when the `parallel` feature is on and
//! falls back to plain iterators otherwise.

pub mod backtest;
pub mod durneutral;
pub mod error;
pub mod marketdata;
pub mod metrics;
pub mod models;
pub mod par;
pub mod rnd;
pub mod signals;
pub mod stats;

pub use error::{Error, Result};
