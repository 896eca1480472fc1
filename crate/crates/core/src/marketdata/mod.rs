//! Market data: domain types, trade cleaning, yield math, CSV ingestion and
//! a seeded synthetic market generator.

mod bond;
mod io;
mod synth;
mod trace;
mod types;

use std::collections::BTreeMap;

use chrono::NaiveDate;

pub use bond::{
    accrued_interest, clean_price, compute_spread, match_treasury, modified_duration, trade_yield,
    year_fraction, yield_to_maturity,
};
pub use io::{
    load_dataset, write_dataset, DatasetPaths, DatasetSchema, FUNDS_FILE, PRICES_FILE, ROSTER_FILE,
    SMILES_FILE, TRADES_FILE, TREASURIES_FILE,
};
pub use synth::{generate_synthetic_market, PlantedDrawdown, SynthConfig, SynthHedge, VolumeRegime};
pub use trace::{clean_trace, filter_reports, standardize, CleanTradeSet, Rejection, RemovalCounts};
pub use types::{
    BondTrade, ConstituentRoster, FundReturn, PriceBar, RawTrade, TradeStatus, TreasuryPoint, VolSmile,
};

use crate::{Error, Result};

/// Date-aligned market data. Immutable once built.
///
/// Price, treasury and fund series all share [`MarketDataset::dates`]; smiles,
/// trade reports and the roster are event tables and keep their own dates.
#[derive(Debug, Clone, PartialEq)]
pub struct MarketDataset {
    pub dates: Vec<NaiveDate>,
    pub prices: BTreeMap<String, Vec<PriceBar>>,
    pub treasuries: BTreeMap<String, Vec<TreasuryPoint>>,
    pub funds: BTreeMap<String, Vec<FundReturn>>,
    pub smiles: Vec<VolSmile>,
    pub trades: Vec<RawTrade>,
    pub roster: Option<ConstituentRoster>,
    /// False when any price row lacks bid or ask; backtests then run
    /// frictionless and say so in their output.
    pub costs_available: bool,
    /// Dates dropped while aligning series.
    pub gaps: Vec<NaiveDate>,
}

impl MarketDataset {
    pub fn prices_of(&self, instrument: &str) -> Result<&[PriceBar]> {
        self.prices
            .get(instrument)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::InvalidInput(format!("no prices for instrument `{instrument}`")))
    }

    pub fn fund_of(&self, fund: &str) -> Result<&[FundReturn]> {
        self.funds
            .get(fund)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::InvalidInput(format!("no returns for fund `{fund}`")))
    }

    /// All treasury observations, flattened.
    pub fn treasury_points(&self) -> Vec<TreasuryPoint> {
        let mut v: Vec<TreasuryPoint> = self.treasuries.values().flatten().cloned().collect();
        v.sort_by(|a, b| (a.date, &a.instrument).cmp(&(b.date, &b.instrument)));
        v
    }

    /// Daily total returns of an exchange-traded instrument: price change
    /// plus one day of dividend accrual. The first date has no return and is
    /// reported as `NaN`.
    pub fn instrument_returns(&self, instrument: &str) -> Result<Vec<f64>> {
        let bars = self.prices_of(instrument)?;
        let mut out = Vec::with_capacity(bars.len());
        out.push(f64::NAN);
        for w in bars.windows(2) {
            out.push(w[1].close / w[0].close - 1.0 + w[0].dividend_yield / 252.0);
        }
        Ok(out)
    }

    /// Everything dated on or before `last`.
    pub fn truncated(&self, last: NaiveDate) -> MarketDataset {
        let keep = |d: NaiveDate| d <= last;
        MarketDataset {
            dates: self.dates.iter().copied().filter(|d| keep(*d)).collect(),
            prices: self
                .prices
                .iter()
                .map(|(k, v)| (k.clone(), v.iter().filter(|b| keep(b.date)).cloned().collect()))
                .collect(),
            treasuries: self
                .treasuries
                .iter()
                .map(|(k, v)| (k.clone(), v.iter().filter(|b| keep(b.date)).cloned().collect()))
                .collect(),
            funds: self
                .funds
                .iter()
                .map(|(k, v)| (k.clone(), v.iter().filter(|b| keep(b.date)).cloned().collect()))
                .collect(),
            smiles: self.smiles.iter().filter(|s| keep(s.date)).cloned().collect(),
            trades: self.trades.iter().filter(|t| keep(t.date)).cloned().collect(),
            roster: self.roster.as_ref().map(|r| ConstituentRoster {
                snapshots: r.snapshots.range(..=last).map(|(d, m)| (*d, m.clone())).collect(),
            }),
            costs_available: self.costs_available,
            gaps: self.gaps.iter().copied().filter(|d| keep(*d)).collect(),
        }
    }
}
