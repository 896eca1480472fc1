//! Date-aligned inputs shared by every backtest on one dataset.

use chrono::NaiveDate;

use crate::durneutral::{fund_neutral, instrument_neutral};
use crate::marketdata::MarketDataset;
use crate::par::Execution;
use crate::signals::{build_signals, SignalConfig, SignalName, SignalSet};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct HedgeInputs {
    pub name: String,
    /// Duration-neutral daily returns; `NaN` on the first date.
    pub neutral: Vec<f64>,
    pub close: Vec<f64>,
    pub volume: Vec<f64>,
    /// `(ask - bid) / (ask + bid)`, zero when quotes are missing.
    pub half_spread: Vec<f64>,
}

/// Everything a backtest reads, aligned on [`PreparedData::dates`].
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedData {
    pub dates: Vec<NaiveDate>,
    pub fund: String,
    pub fund_neutral: Vec<f64>,
    pub hedges: Vec<HedgeInputs>,
    /// Every signal that could be built, aligned with `NaN` for gaps.
    pub signals: Vec<(SignalName, Vec<f64>)>,
    pub costs_available: bool,
    pub warnings: Vec<String>,
}

impl PreparedData {
    /// Build signals and duration-neutral series for `fund` and `hedges`.
    pub fn build(
        ds: &MarketDataset,
        signal_cfg: &SignalConfig,
        fund: &str,
        hedges: &[String],
        exec: Execution,
    ) -> Result<Self> {
        let set = build_signals(ds, signal_cfg, exec);
        Self::from_signals(ds, &set, fund, hedges)
    }

    pub fn from_signals(ds: &MarketDataset, set: &SignalSet, fund: &str, hedges: &[String]) -> Result<Self> {
        if ds.dates.len() < 2 {
            return Err(Error::InsufficientHistory("dataset has fewer than two dates".into()));
        }
        let fund_neutral = fund_neutral(ds, fund)?.neutral_return;
        let mut hs = Vec::with_capacity(hedges.len());
        for h in hedges {
            let bars = ds.prices_of(h)?;
            hs.push(HedgeInputs {
                name: h.clone(),
                neutral: instrument_neutral(ds, h)?.neutral_return,
                close: bars.iter().map(|b| b.close).collect(),
                volume: bars.iter().map(|b| b.volume).collect(),
                half_spread: bars.iter().map(|b| b.half_spread().unwrap_or(0.0)).collect(),
            });
        }
        let signals = set
            .available()
            .into_iter()
            .map(|s| (s.name, s.aligned(&ds.dates)))
            .collect();
        Ok(PreparedData {
            dates: ds.dates.clone(),
            fund: fund.to_string(),
            fund_neutral,
            hedges: hs,
            signals,
            costs_available: ds.costs_available,
            warnings: set.warnings.clone(),
        })
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    /// Signal columns in the requested order.
    pub fn signal_columns(&self, names: &[SignalName]) -> Result<Vec<&[f64]>> {
        names
            .iter()
            .map(|n| {
                self.signals
                    .iter()
                    .find(|(m, _)| m == n)
                    .map(|(_, v)| v.as_slice())
                    .ok_or_else(|| Error::InvalidInput(format!("{n} signal is not available for this dataset")))
            })
            .collect()
    }

    pub fn hedge(&self, name: &str) -> Result<&HedgeInputs> {
        self.hedges
            .iter()
            .find(|h| h.name == name)
            .ok_or_else(|| Error::InvalidInput(format!("hedge `{name}` was not prepared")))
    }

    /// Index of the first date on or after `d`.
    pub fn index_of(&self, d: NaiveDate) -> usize {
        self.dates.partition_point(|x| *x < d)
    }
}
