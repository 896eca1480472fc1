//! Time-series momentum of a duration-neutral index.

use chrono::NaiveDate;

use super::{SignalName, SignalSeries};
use crate::stats::{mean, sample_std};
use crate::{Error, Result};

/// One business month, skipped at the recent end of the momentum window.
pub const MOMENTUM_OFFSET: usize = 22;
const SIGMA_EPS: f64 = 1e-12;

/// Compound daily returns into an index starting at 1. Non-finite returns
/// (the first day of a series) count as zero.
pub fn cumulative_index(returns: &[f64]) -> Vec<f64> {
    let mut level = 1.0;
    returns
        .iter()
        .map(|r| {
            if r.is_finite() {
                level *= 1.0 + r;
            }
            level
        })
        .collect()
}

/// z-score of the `n`-day cumulative return lagged by `offset` days,
/// measured against the previous `n` values of that return.
pub fn momentum_signal(dates: &[NaiveDate], index: &[f64], n: usize, offset: usize) -> Result<SignalSeries> {
    if dates.len() != index.len() {
        return Err(Error::InvalidInput("momentum dates and index lengths differ".into()));
    }
    if n < 2 {
        return Err(Error::InvalidInput(format!("momentum window {n} must be at least 2")));
    }
    let first_c = n + offset;
    let first_z = first_c + n;
    if index.len() <= first_z {
        let need = first_z + 1;
        return Err(Error::InsufficientHistory(format!(
            "momentum with n={n}, offset={offset} needs {need} observations, have {}{}",
            index.len(),
            dates.first().map(|d| format!(" starting {d}")).unwrap_or_default()
        )));
    }
    let c: Vec<f64> = (first_c..index.len())
        .map(|t| index[t - offset] / index[t - n - offset] - 1.0)
        .collect();
    let mut out = SignalSeries::new(SignalName::Momentum, Vec::new(), Vec::new());
    for t in first_z..index.len() {
        let k = t - first_c;
        let prior = &c[k - n..k];
        let sd = sample_std(prior);
        let z = if sd < SIGMA_EPS { 0.0 } else { (c[k] - mean(prior)) / sd };
        out.dates.push(dates[t]);
        out.values.push(z);
        out.filled.push(false);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::Duration;

    fn dates(n: usize) -> Vec<NaiveDate> {
        let d0 = NaiveDate::from_ymd_opt(2015, 1, 1).unwrap();
        (0..n).map(|i| d0 + Duration::days(i as i64)).collect()
    }

    #[test]
    fn constant_and_geometric_indices_give_zero() {
        let d = dates(600);
        let s = momentum_signal(&d, &vec![3.0; 600], 252, 22).unwrap();
        assert!(s.values.iter().all(|&z| z == 0.0));
        let idx: Vec<f64> = (0..600).map(|i| 1.0001_f64.powi(i)).collect();
        let s = momentum_signal(&d, &idx, 252, 22).unwrap();
        assert!(s.values.iter().all(|&z| z == 0.0));
        // The window return itself is the compounded 252-day growth.
        let c = idx[300 - 22] / idx[300 - 252 - 22] - 1.0;
        assert!((c - (1.0001_f64.powi(252) - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn recent_returns_are_skipped() {
        let d = dates(200);
        let mut r = vec![0.001 * 0.5; 200];
        for (i, x) in r.iter_mut().enumerate() {
            *x *= ((i * 7) % 5) as f64 - 2.0;
        }
        let base = momentum_signal(&d, &cumulative_index(&r), 40, 22).unwrap();
        let mut r2 = r.clone();
        for x in r2.iter_mut().skip(200 - 22) {
            *x += 0.01;
        }
        let bumped = momentum_signal(&d, &cumulative_index(&r2), 40, 22).unwrap();
        assert_eq!(base.values.last(), bumped.values.last());
    }

    #[test]
    fn scale_invariant_and_history_checked() {
        let d = dates(150);
        let r: Vec<f64> = (0..150).map(|i| ((i as f64) * 0.37).sin() * 1e-3).collect();
        let idx = cumulative_index(&r);
        let a = momentum_signal(&d, &idx, 30, 22).unwrap();
        let scaled: Vec<f64> = idx.iter().map(|x| x * 4.0).collect();
        let b = momentum_signal(&d, &scaled, 30, 22).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            assert!((x - y).abs() < 1e-9);
        }
        assert!(matches!(
            momentum_signal(&d[..80], &idx[..80], 30, 22),
            Err(Error::InsufficientHistory(_))
        ));
    }
}
