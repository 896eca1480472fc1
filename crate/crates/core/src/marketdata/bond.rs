//! Fixed-rate bond yield math: semiannual compounding, actual/365 time.

use chrono::NaiveDate;

use super::types::{BondTrade, TreasuryPoint};
use crate::{Error, Result};

const PAR: f64 = 100.0;
const PERIOD: f64 = 0.5;

/// Years between `from` and `to` on an actual/365 basis.
pub fn year_fraction(from: NaiveDate, to: NaiveDate) -> f64 {
    (to - from).num_days() as f64 / 365.0
}

/// Cash-flow times (years) for coupons counted back from maturity.
fn coupon_times(years: f64) -> impl Iterator<Item = f64> {
    let n = (years / PERIOD - 1e-12).ceil().max(1.0) as usize;
    (0..n).map(move |k| years - PERIOD * k as f64).filter(|t| *t > 1e-12)
}

/// Accrued interest per 100 par with linear accrual inside the current period.
pub fn accrued_interest(coupon: f64, years: f64) -> f64 {
    let next = coupon_times(years).fold(f64::INFINITY, f64::min);
    let remaining = (next / PERIOD).min(1.0);
    PAR * coupon / 2.0 * (1.0 - remaining)
}

/// Full (dirty) price per 100 par and its yield derivative.
fn dirty_price_and_slope(coupon: f64, years: f64, ytm: f64) -> (f64, f64) {
    let base = 1.0 + ytm / 2.0;
    let cf = PAR * coupon / 2.0;
    let mut price = 0.0;
    let mut slope = 0.0;
    let mut add = |amount: f64, t: f64| {
        let periods = 2.0 * t;
        let df = base.powf(-periods);
        price += amount * df;
        slope += -amount * periods * df / base / 2.0;
    };
    for t in coupon_times(years) {
        add(cf, t);
    }
    add(PAR, years);
    (price, slope)
}

/// Clean price per 100 par from yield to maturity.
pub fn clean_price(coupon: f64, years: f64, ytm: f64) -> f64 {
    dirty_price_and_slope(coupon, years, ytm).0 - accrued_interest(coupon, years)
}

/// Modified duration at the given yield.
pub fn modified_duration(coupon: f64, years: f64, ytm: f64) -> f64 {
    let (dirty, slope) = dirty_price_and_slope(coupon, years, ytm);
    -slope / dirty
}

/// Solve the clean-price identity for yield by safeguarded Newton iteration.
pub fn yield_to_maturity(price: f64, coupon: f64, years: f64) -> std::result::Result<f64, String> {
    if !(price > 0.0) {
        return Err(format!("non-positive price {price}"));
    }
    if !(years > 0.0) {
        return Err(format!("non-positive time to maturity {years}"));
    }
    let f = |y: f64| clean_price(coupon, years, y) - price;

    let mut lo = -0.5;
    let mut hi = 1.0;
    while f(hi) > 0.0 {
        hi *= 2.0;
        if hi > 64.0 {
            return Err(format!("price {price} implies a yield above {hi}"));
        }
    }
    if f(lo) < 0.0 {
        return Err(format!("price {price} implies a yield below {lo}"));
    }

    let mut y = coupon.clamp(lo, hi);
    for _ in 0..200 {
        let (dirty, slope) = dirty_price_and_slope(coupon, years, y);
        let g = dirty - accrued_interest(coupon, years) - price;
        if g.abs() < 1e-13 * price.max(1.0) {
            return Ok(y);
        }
        if g > 0.0 {
            lo = y;
        } else {
            hi = y;
        }
        let newton = y - g / slope;
        let next = if slope < 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - y).abs() < 1e-15 {
            return Ok(next);
        }
        y = next;
    }
    Err("yield iteration did not converge".into())
}

/// Treasury closest in maturity to the trade on its date; ties go to the
/// smallest coupon difference, then to the instrument id.
pub fn match_treasury<'a>(trade: &BondTrade, curve: &'a [TreasuryPoint]) -> Option<&'a TreasuryPoint> {
    curve
        .iter()
        .filter(|p| p.date == trade.date)
        .min_by(|a, b| {
            let ma = (a.maturity - trade.maturity).num_days().abs();
            let mb = (b.maturity - trade.maturity).num_days().abs();
            ma.cmp(&mb)
                .then_with(|| {
                    let ca = (a.coupon - trade.coupon).abs();
                    let cb = (b.coupon - trade.coupon).abs();
                    ca.total_cmp(&cb)
                })
                .then_with(|| a.instrument.cmp(&b.instrument))
        })
}

/// Credit spread of a trade over its matched treasury.
pub fn compute_spread(trade: &BondTrade, curve: &[TreasuryPoint]) -> Result<f64> {
    let ytm = trade_yield(trade)?;
    let tsy = match_treasury(trade, curve).ok_or_else(|| Error::NoMatchingTreasury {
        trade_id: trade.trade_id.clone(),
        date: trade.date,
    })?;
    Ok(ytm - tsy.yield_)
}

pub fn trade_yield(trade: &BondTrade) -> Result<f64> {
    let years = year_fraction(trade.date, trade.maturity);
    yield_to_maturity(trade.price, trade.coupon, years).map_err(|reason| Error::YieldSolver {
        trade_id: trade.trade_id.clone(),
        reason,
    })
}
