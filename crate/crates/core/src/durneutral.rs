//! Duration neutralization against a bracketing pair of treasuries.

use std::collections::BTreeMap;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::marketdata::{MarketDataset, TreasuryPoint};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DurationBracket {
    pub lower_id: String,
    pub upper_id: String,
    pub d_lower: f64,
    pub d_upper: f64,
    pub w_lower: f64,
    pub w_upper: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DurationNeutralSeries {
    pub dates: Vec<NaiveDate>,
    pub raw_return: Vec<f64>,
    pub duration_return: Vec<f64>,
    pub neutral_return: Vec<f64>,
}

/// Pick the closest treasury at or below and at or above `target` and weight
/// them so the pair has duration `target`. An exact match gets weight one.
pub fn bracket_treasuries(target: f64, universe: &[(&str, f64)]) -> Result<DurationBracket> {
    if universe.is_empty() {
        return Err(Error::InvalidInput("empty treasury universe".into()));
    }
    if !target.is_finite() {
        return Err(Error::InvalidInput(format!("non-finite target duration {target}")));
    }
    let lo = universe.iter().map(|u| u.1).fold(f64::INFINITY, f64::min);
    let hi = universe.iter().map(|u| u.1).fold(f64::NEG_INFINITY, f64::max);

    // Ties on duration resolve to the smaller id so results do not depend on
    // input order.
    let better = |a: &(&str, f64), b: &(&str, f64), want_high: bool| {
        if a.1 != b.1 {
            (a.1 > b.1) == want_high
        } else {
            a.0 < b.0
        }
    };
    if let Some(exact) = universe
        .iter()
        .filter(|u| u.1 == target)
        .min_by(|a, b| a.0.cmp(b.0))
    {
        return Ok(DurationBracket {
            lower_id: exact.0.to_string(),
            upper_id: exact.0.to_string(),
            d_lower: exact.1,
            d_upper: exact.1,
            w_lower: 0.0,
            w_upper: 1.0,
        });
    }
    let mut lower: Option<&(&str, f64)> = None;
    let mut upper: Option<&(&str, f64)> = None;
    for u in universe {
        if u.1 < target && lower.is_none_or(|l| better(u, l, true)) {
            lower = Some(u);
        }
        if u.1 > target && upper.is_none_or(|h| better(u, h, false)) {
            upper = Some(u);
        }
    }
    let (Some(l), Some(h)) = (lower, upper) else {
        return Err(Error::Unbracketable {
            duration: target,
            lo,
            hi,
            date: None,
        });
    };
    let w_upper = (target - l.1) / (h.1 - l.1);
    Ok(DurationBracket {
        lower_id: l.0.to_string(),
        upper_id: h.0.to_string(),
        d_lower: l.1,
        d_upper: h.1,
        w_lower: 1.0 - w_upper,
        w_upper,
    })
}

/// Strip the duration-driven part out of a daily return series.
///
/// `durations[i]` is the asset's duration on `dates[i]`; each day is
/// re-bracketed against that day's treasuries. A `NaN` raw return (such as
/// the first day of a price series) passes through as `NaN`.
pub fn duration_neutral_returns(
    dates: &[NaiveDate],
    raw: &[f64],
    durations: &[f64],
    treasuries: &[TreasuryPoint],
) -> Result<DurationNeutralSeries> {
    if dates.len() != raw.len() || dates.len() != durations.len() {
        return Err(Error::InvalidInput(format!(
            "length mismatch: {} dates, {} returns, {} durations",
            dates.len(),
            raw.len(),
            durations.len()
        )));
    }
    let mut by_date: BTreeMap<NaiveDate, Vec<&TreasuryPoint>> = BTreeMap::new();
    for p in treasuries {
        by_date.entry(p.date).or_default().push(p);
    }

    let mut out = DurationNeutralSeries {
        dates: dates.to_vec(),
        raw_return: raw.to_vec(),
        duration_return: Vec::with_capacity(raw.len()),
        neutral_return: Vec::with_capacity(raw.len()),
    };
    for ((&date, &r), &dur) in dates.iter().zip(raw).zip(durations) {
        let curve = by_date.get(&date).ok_or_else(|| {
            Error::InvalidInput(format!("treasury panel has no observations on {date}"))
        })?;
        let universe: Vec<(&str, f64)> = curve.iter().map(|p| (p.instrument.as_str(), p.duration)).collect();
        let b = bracket_treasuries(dur, &universe).map_err(|e| match e {
            Error::Unbracketable { duration, lo, hi, .. } => Error::Unbracketable {
                duration,
                lo,
                hi,
                date: Some(date),
            },
            e => e.at(date),
        })?;
        let ret_of = |id: &str| curve.iter().find(|p| p.instrument == id).map(|p| p.ret).unwrap_or(0.0);
        let rd = if b.w_lower == 0.0 {
            b.w_upper * ret_of(&b.upper_id)
        } else {
            b.w_upper * ret_of(&b.upper_id) + b.w_lower * ret_of(&b.lower_id)
        };
        out.duration_return.push(rd);
        out.neutral_return.push(r - rd);
    }
    Ok(out)
}

/// Duration-neutral daily returns of an exchange-traded instrument in the
/// dataset. Requires a duration on every price row.
pub fn instrument_neutral(ds: &MarketDataset, instrument: &str) -> Result<DurationNeutralSeries> {
    let bars = ds.prices_of(instrument)?;
    let durations = bars
        .iter()
        .map(|b| {
            b.duration.ok_or_else(|| {
                Error::InvalidInput(format!("{instrument} has no duration on {}", b.date))
            })
        })
        .collect::<Result<Vec<f64>>>()?;
    let raw = ds.instrument_returns(instrument)?;
    duration_neutral_returns(&ds.dates, &raw, &durations, &ds.treasury_points())
}

pub fn fund_neutral(ds: &MarketDataset, fund: &str) -> Result<DurationNeutralSeries> {
    let rows = ds.fund_of(fund)?;
    let raw: Vec<f64> = rows.iter().map(|r| r.ret).collect();
    let durations: Vec<f64> = rows.iter().map(|r| r.duration).collect();
    duration_neutral_returns(&ds.dates, &raw, &durations, &ds.treasury_points())
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::Duration;

    fn panel(days: usize, rets: impl Fn(usize, f64) -> f64) -> (Vec<NaiveDate>, Vec<TreasuryPoint>) {
        let d0 = NaiveDate::from_ymd_opt(2020, 1, 1).unwrap();
        let dates: Vec<NaiveDate> = (0..days).map(|i| d0 + Duration::days(i as i64)).collect();
        let mut pts = Vec::new();
        for (i, &d) in dates.iter().enumerate() {
            for dur in [2.0, 4.0, 6.0, 9.0] {
                pts.push(TreasuryPoint {
                    date: d,
                    instrument: format!("T{dur}"),
                    coupon: 0.02,
                    duration: dur,
                    maturity: d + Duration::days((dur * 400.0) as i64),
                    yield_: 0.02,
                    ret: rets(i, dur),
                });
            }
        }
        (dates, pts)
    }

    #[test]
    fn bracket_weights() {
        let u = [("A", 4.0), ("B", 6.0)];
        let b = bracket_treasuries(5.0, &u).unwrap();
        assert_eq!((b.w_lower, b.w_upper), (0.5, 0.5));
        let b = bracket_treasuries(4.5, &u).unwrap();
        assert_eq!(b.w_upper, 0.25);
        assert_eq!(b.w_lower, 0.75);
        let b = bracket_treasuries(4.0, &u).unwrap();
        assert_eq!((b.upper_id.as_str(), b.w_upper), ("A", 1.0));
        assert!(matches!(
            bracket_treasuries(7.0, &u),
            Err(Error::Unbracketable { .. })
        ));
    }

    #[test]
    fn picks_tightest_pair() {
        let u = [("A", 1.0), ("B", 4.0), ("C", 6.0), ("D", 10.0)];
        let b = bracket_treasuries(5.2, &u).unwrap();
        assert_eq!((b.lower_id.as_str(), b.upper_id.as_str()), ("B", "C"));
        assert!((b.w_upper * b.d_upper + b.w_lower * b.d_lower - 5.2).abs() < 1e-12);
    }

    #[test]
    fn constructed_asset_recovers_alpha() {
        let (dates, pts) = panel(50, |i, d| 1e-4 * d * ((i as f64) * 0.7).sin());
        let t = |i: usize, d: f64| 1e-4 * d * ((i as f64) * 0.7).sin();
        let raw: Vec<f64> = (0..50).map(|i| 0.6 * t(i, 4.0) + 0.4 * t(i, 6.0) + 0.001).collect();
        let durs = vec![0.6 * 4.0 + 0.4 * 6.0; 50];
        let s = duration_neutral_returns(&dates, &raw, &durs, &pts).unwrap();
        for x in s.neutral_return {
            assert!((x - 0.001).abs() < 1e-12);
        }
    }

    #[test]
    fn self_neutralization_and_zero_legs() {
        let (dates, pts) = panel(10, |i, d| 1e-4 * d * i as f64);
        let raw: Vec<f64> = (0..10).map(|i| 1e-4 * 6.0 * i as f64).collect();
        let s = duration_neutral_returns(&dates, &raw, &[6.0; 10], &pts).unwrap();
        assert!(s.neutral_return.iter().all(|&x| x == 0.0));

        let (dates, pts) = panel(10, |_, _| 0.0);
        let raw: Vec<f64> = (0..10).map(|i| 0.001 * i as f64).collect();
        let s = duration_neutral_returns(&dates, &raw, &[5.0; 10], &pts).unwrap();
        assert_eq!(s.neutral_return, raw);
    }

    #[test]
    fn unbracketable_day_names_the_date() {
        let (dates, pts) = panel(3, |_, _| 0.0);
        let err = duration_neutral_returns(&dates, &[0.0; 3], &[5.0, 12.0, 5.0], &pts).unwrap_err();
        match err {
            Error::Unbracketable { date, .. } => assert_eq!(date, Some(dates[1])),
            e => panic!("unexpected {e}"),
        }
    }
}
