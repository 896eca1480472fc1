use std::collections::BTreeMap;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

/// One day of market data for an exchange-traded instrument.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceBar {
    pub date: NaiveDate,
    pub close: f64,
    pub bid: Option<f64>,
    pub ask: Option<f64>,
    /// Shares traded.
    pub volume: f64,
    /// Effective duration in years.
    pub duration: Option<f64>,
    /// Annualized decimal.
    pub dividend_yield: f64,
}

impl PriceBar {
    /// `(ask - bid) / (ask + bid)`, the half spread as a fraction of mid.
    pub fn half_spread(&self) -> Option<f64> {
        match (self.bid, self.ask) {
            (Some(b), Some(a)) if a + b > 0.0 => Some((a - b) / (a + b)),
            _ => None,
        }
    }
}

/// Implied volatilities quoted on a moneyness grid for one tenor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolSmile {
    pub date: NaiveDate,
    pub instrument: String,
    pub tenor: f64,
    /// `(X / S) * 100`, strictly increasing.
    pub moneyness: Vec<f64>,
    pub vols: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TradeStatus {
    Trade,
    Cancel,
    Correction,
    Reversal,
}

impl TradeStatus {
    pub fn parse(code: &str) -> Option<Self> {
        match code.trim().to_ascii_uppercase().as_str() {
            "T" | "TRADE" => Some(TradeStatus::Trade),
            "X" | "CANCEL" => Some(TradeStatus::Cancel),
            "C" | "CORRECTION" => Some(TradeStatus::Correction),
            "Y" | "REVERSAL" => Some(TradeStatus::Reversal),
            _ => None,
        }
    }

    pub fn code(self) -> &'static str {
        match self {
            TradeStatus::Trade => "T",
            TradeStatus::Cancel => "X",
            TradeStatus::Correction => "C",
            TradeStatus::Reversal => "Y",
        }
    }
}

/// A trade report as it appears in `trades.csv`, before status parsing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawTrade {
    pub trade_id: String,
    pub cusip: String,
    pub date: NaiveDate,
    /// Percent of par.
    pub price: f64,
    pub coupon: f64,
    pub maturity: NaiveDate,
    /// Dollar volume.
    pub volume: f64,
    pub status: String,
    pub reversal_flag: String,
}

/// A parsed trade report.
///
/// Cancel and correction records carry the `trade_id` of the report they
/// refer to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BondTrade {
    pub trade_id: String,
    pub cusip: String,
    pub date: NaiveDate,
    pub price: f64,
    pub coupon: f64,
    pub maturity: NaiveDate,
    pub volume: f64,
    pub status: TradeStatus,
    pub reversal_flag: bool,
}

impl BondTrade {
    pub fn to_raw(&self) -> RawTrade {
        RawTrade {
            trade_id: self.trade_id.clone(),
            cusip: self.cusip.clone(),
            date: self.date,
            price: self.price,
            coupon: self.coupon,
            maturity: self.maturity,
            volume: self.volume,
            status: self.status.code().to_string(),
            reversal_flag: if self.reversal_flag { "R" } else { "" }.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreasuryPoint {
    pub date: NaiveDate,
    pub instrument: String,
    pub coupon: f64,
    pub duration: f64,
    pub maturity: NaiveDate,
    pub yield_: f64,
    /// Daily simple return.
    pub ret: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FundReturn {
    pub date: NaiveDate,
    pub ret: f64,
    pub duration: f64,
}

/// Index membership snapshots, one per effective date.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConstituentRoster {
    pub snapshots: BTreeMap<NaiveDate, BTreeMap<String, NaiveDate>>,
}

impl ConstituentRoster {
    /// Earliest inclusion date recorded for `cusip` in any snapshot.
    pub fn first_inclusion(&self, cusip: &str) -> Option<NaiveDate> {
        self.snapshots
            .values()
            .filter_map(|m| m.get(cusip).copied())
            .min()
    }

    /// For each bond, the first snapshot date that lists it and the
    /// inclusion date recorded there. A bond is only known from that snapshot
    /// on, whatever its recorded inclusion date.
    pub fn first_listings(&self) -> BTreeMap<String, (NaiveDate, NaiveDate)> {
        let mut out: BTreeMap<String, (NaiveDate, NaiveDate)> = BTreeMap::new();
        // Snapshots iterate in date order, so the first hit is the earliest.
        for (eff, members) in &self.snapshots {
            for (cusip, inc) in members {
                out.entry(cusip.clone()).or_insert((*eff, *inc));
            }
        }
        out
    }

    pub fn first_inclusions(&self) -> BTreeMap<String, NaiveDate> {
        let mut out: BTreeMap<String, NaiveDate> = BTreeMap::new();
        for members in self.snapshots.values() {
            for (cusip, inc) in members {
                out.entry(cusip.clone())
                    .and_modify(|d| *d = (*d).min(*inc))
                    .or_insert(*inc);
            }
        }
        out
    }
}
