//! Duration-times-spread liquidity factor over index constituent bonds.

use std::collections::BTreeMap;

use chrono::{Duration, NaiveDate};
use serde::{Deserialize, Serialize};

use super::{SignalName, SignalSeries};
use crate::marketdata::{
    compute_spread, modified_duration, trade_yield, year_fraction, BondTrade, ConstituentRoster,
    TreasuryPoint,
};
use crate::{Error, Result};

/// Bonds count toward the factor for this many calendar days after their
/// first index inclusion.
pub const LIQUIDITY_WINDOW_DAYS: i64 = 1095;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BondObservation {
    pub date: NaiveDate,
    pub cusip: String,
    /// Dollar volume of the trade.
    pub market_value: f64,
    pub duration: f64,
    /// Decimal yield spread over the matched treasury.
    pub spread: f64,
}

/// Price each cleaned trade: yield, modified duration and spread over the
/// matched treasury. Trades whose yield cannot be solved are returned
/// separately rather than failing the whole set.
pub fn bond_observations(
    trades: &[BondTrade],
    treasuries: &[TreasuryPoint],
) -> (Vec<BondObservation>, Vec<Error>) {
    let mut by_date: BTreeMap<NaiveDate, Vec<TreasuryPoint>> = BTreeMap::new();
    for p in treasuries {
        by_date.entry(p.date).or_default().push(p.clone());
    }
    let empty = Vec::new();
    let mut obs = Vec::with_capacity(trades.len());
    let mut failed = Vec::new();
    for t in trades {
        let curve = by_date.get(&t.date).unwrap_or(&empty);
        let priced = trade_yield(t).and_then(|y| {
            let spread = compute_spread(t, curve)?;
            Ok((y, spread))
        });
        match priced {
            Ok((y, spread)) => obs.push(BondObservation {
                date: t.date,
                cusip: t.cusip.clone(),
                market_value: t.volume,
                duration: modified_duration(t.coupon, year_fraction(t.date, t.maturity), y),
                spread,
            }),
            Err(e) => failed.push(e),
        }
    }
    (obs, failed)
}

/// Market-value-weighted duration times spread, per day, over bonds within
/// [`LIQUIDITY_WINDOW_DAYS`] of first inclusion in the roster. A bond counts
/// only once a snapshot dated on or before the trade lists it.
pub fn liquidity_factor(
    obs: &[BondObservation],
    roster: &ConstituentRoster,
    calendar: &[NaiveDate],
    max_fill: usize,
) -> Result<SignalSeries> {
    let first = roster.first_listings();
    let mut sums: BTreeMap<NaiveDate, (f64, f64)> = BTreeMap::new();
    for o in obs {
        let Some(&(listed, inc)) = first.get(&o.cusip) else {
            continue;
        };
        if o.date < listed || o.date < inc || o.date > inc + Duration::days(LIQUIDITY_WINDOW_DAYS) {
            continue;
        }
        if !(o.market_value >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "bond {} has market value {} on {}",
                o.cusip, o.market_value, o.date
            )));
        }
        let e = sums.entry(o.date).or_insert((0.0, 0.0));
        e.0 += o.market_value * o.duration * o.spread;
        e.1 += o.market_value;
    }
    let mut values = BTreeMap::new();
    for (d, (num, den)) in sums {
        if den <= 0.0 {
            return Err(Error::Degenerate(format!("all qualifying bonds have zero market value on {d}")));
        }
        values.insert(d, num / den);
    }
    SignalSeries::from_observations(SignalName::Liquidity, calendar, &values, max_fill)
}
