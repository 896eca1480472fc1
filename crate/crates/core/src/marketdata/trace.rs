//! TRACE-style trade report cleaning.
//!
//! Four passes: status standardization, same-day cancellation removal,
//! correction removal (both the correcting record and the report it
//! corrects), and reversal removal.

use std::collections::HashSet;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::types::{BondTrade, RawTrade, TradeStatus};

/// A raw record that could not be standardized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rejection {
    pub index: usize,
    pub trade_id: String,
    pub reason: String,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RemovalCounts {
    pub cancel_records: usize,
    pub cancelled_trades: usize,
    pub correction_records: usize,
    pub corrected_reports: usize,
    pub reversals: usize,
}

impl RemovalCounts {
    pub fn total(&self) -> usize {
        self.cancel_records
            + self.cancelled_trades
            + self.correction_records
            + self.corrected_reports
            + self.reversals
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CleanTradeSet {
    /// Surviving reports sorted by `(cusip, date, trade_id)`.
    pub trades: Vec<BondTrade>,
    pub rejected: Vec<Rejection>,
    pub removed: RemovalCounts,
}

pub fn parse_reversal_flag(s: &str) -> Option<bool> {
    match s.trim().to_ascii_uppercase().as_str() {
        "R" | "TRUE" | "1" => Some(true),
        "" | "N" | "FALSE" | "0" => Some(false),
        _ => None,
    }
}

/// Standardize one raw report.
pub fn standardize(raw: &RawTrade) -> Result<BondTrade, String> {
    let status = TradeStatus::parse(&raw.status)
        .ok_or_else(|| format!("unrecognized status code `{}`", raw.status))?;
    let reversal_flag = parse_reversal_flag(&raw.reversal_flag)
        .ok_or_else(|| format!("unrecognized reversal indicator `{}`", raw.reversal_flag))?;
    if !raw.volume.is_finite() || raw.volume < 0.0 {
        return Err(format!("non-numeric or negative volume {}", raw.volume));
    }
    if !(raw.price > 0.0) {
        return Err(format!("non-positive price {}", raw.price));
    }
    if raw.maturity <= raw.date {
        return Err(format!("maturity {} not after trade date {}", raw.maturity, raw.date));
    }
    Ok(BondTrade {
        trade_id: raw.trade_id.trim().to_string(),
        cusip: raw.cusip.trim().to_string(),
        date: raw.date,
        price: raw.price,
        coupon: raw.coupon,
        maturity: raw.maturity,
        volume: raw.volume,
        status,
        reversal_flag,
    })
}

/// Run the full cleaning procedure over raw reports.
pub fn clean_trace(raw: &[RawTrade]) -> CleanTradeSet {
    let mut parsed = Vec::with_capacity(raw.len());
    let mut rejected = Vec::new();
    for (index, r) in raw.iter().enumerate() {
        match standardize(r) {
            Ok(t) => parsed.push(t),
            Err(reason) => rejected.push(Rejection {
                index,
                trade_id: r.trade_id.clone(),
                reason,
            }),
        }
    }
    let (trades, removed) = filter_reports(&parsed);
    CleanTradeSet {
        trades,
        rejected,
        removed,
    }
}

/// Apply the cancellation, correction and reversal filters to parsed reports.
pub fn filter_reports(trades: &[BondTrade]) -> (Vec<BondTrade>, RemovalCounts) {
    let mut cancels: HashSet<(&str, &str, NaiveDate)> = HashSet::new();
    let mut corrections: HashSet<(&str, &str)> = HashSet::new();
    for t in trades {
        match t.status {
            TradeStatus::Cancel => {
                cancels.insert((&t.cusip, &t.trade_id, t.date));
            }
            TradeStatus::Correction => {
                corrections.insert((&t.cusip, &t.trade_id));
            }
            _ => {}
        }
    }

    let mut counts = RemovalCounts::default();
    let mut out = Vec::with_capacity(trades.len());
    for t in trades {
        match t.status {
            TradeStatus::Cancel => counts.cancel_records += 1,
            TradeStatus::Correction => counts.correction_records += 1,
            TradeStatus::Reversal if t.reversal_flag => counts.reversals += 1,
            TradeStatus::Trade if cancels.contains(&(t.cusip.as_str(), t.trade_id.as_str(), t.date)) => {
                counts.cancelled_trades += 1
            }
            TradeStatus::Trade if corrections.contains(&(t.cusip.as_str(), t.trade_id.as_str())) => {
                counts.corrected_reports += 1
            }
            _ => out.push(t.clone()),
        }
    }
    out.sort_by(|a, b| {
        (&a.cusip, a.date, &a.trade_id).cmp(&(&b.cusip, b.date, &b.trade_id))
    });
    (out, counts)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(y: i32, m: u32, day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, day).unwrap()
    }

    fn raw(id: &str, date: NaiveDate, status: &str, rev: &str) -> RawTrade {
        RawTrade {
            trade_id: id.into(),
            cusip: "AAA".into(),
            date,
            price: 101.0,
            coupon: 0.04,
            maturity: d(2030, 1, 1),
            volume: 1_000_000.0,
            status: status.into(),
            reversal_flag: rev.into(),
        }
    }

    #[test]
    fn same_day_cancel_removes_both() {
        let day = d(2020, 3, 2);
        let set = clean_trace(&[raw("T1", day, "T", ""), raw("T1", day, "X", "")]);
        assert!(set.trades.is_empty());
        assert_eq!(set.removed.cancel_records, 1);
        assert_eq!(set.removed.cancelled_trades, 1);
    }

    #[test]
    fn lone_trade_survives() {
        let set = clean_trace(&[raw("T1", d(2020, 3, 2), "T", "")]);
        assert_eq!(set.trades.len(), 1);
        assert_eq!(set.removed.total(), 0);
    }

    #[test]
    fn next_day_cancel_does_not_remove_original() {
        let set = clean_trace(&[raw("T1", d(2020, 3, 2), "T", ""), raw("T1", d(2020, 3, 3), "X", "")]);
        assert_eq!(set.trades.len(), 1);
        assert_eq!(set.removed.cancel_records, 1);
    }

    #[test]
    fn correction_removes_initial_report_and_itself() {
        let set = clean_trace(&[raw("T1", d(2020, 3, 2), "T", ""), raw("T1", d(2020, 3, 4), "C", "")]);
        assert!(set.trades.is_empty());
        assert_eq!(set.removed.corrected_reports, 1);
        assert_eq!(set.removed.correction_records, 1);
    }

    #[test]
    fn flagged_reversal_removed_unflagged_kept() {
        let day = d(2020, 3, 2);
        let set = clean_trace(&[raw("T1", day, "Y", "R"), raw("T2", day, "Y", "")]);
        assert_eq!(set.trades.len(), 1);
        assert_eq!(set.trades[0].trade_id, "T2");
    }

    #[test]
    fn unparseable_status_is_rejected_with_diagnostic() {
        let set = clean_trace(&[raw("T1", d(2020, 3, 2), "Q", ""), raw("T2", d(2020, 3, 2), "T", "")]);
        assert_eq!(set.trades.len(), 1);
        assert_eq!(set.rejected.len(), 1);
        assert_eq!(set.rejected[0].trade_id, "T1");
        assert!(set.rejected[0].reason.contains("status"));
    }
}
