//! Two-step OLS hedge timing: forecast the hedge's next-day return from the
//! signals, then size the hedge by the fund's beta to it.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, FisherSnedecor};

use crate::stats::{ols, ols_simple, sample_std};
use crate::{Error, Result};

pub const DEFAULT_GAMMA_OLS: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OlsFit {
    pub n: usize,
    pub intercept: f64,
    /// One slope per signal column, in column order.
    pub slopes: Vec<f64>,
    /// Next-day forecast from today's signals.
    pub forecast: f64,
    /// p-value of the F test that all slopes are zero.
    pub f_stat_p: f64,
    pub adjusted_r_squared: f64,
}

/// Regress `next_returns[s]` (the return on day s+1) on `signals` row s and
/// forecast from `today`.
pub fn ols_fit(signals: &DMatrix<f64>, next_returns: &[f64], today: &[f64]) -> Result<OlsFit> {
    let (n, k) = signals.shape();
    if n < 10 || n < 2 * k {
        return Err(Error::InsufficientHistory(format!(
            "OLS window of {n} rows for {k} signals (need at least max(10, {}))",
            2 * k
        )));
    }
    if today.len() != k {
        return Err(Error::InvalidInput(format!("{} forecast inputs for {k} signals", today.len())));
    }
    let fit = ols(signals, next_returns)?;
    let df2 = (n - k - 1) as f64;
    let explained = (fit.tss - fit.rss).max(0.0);
    let f_stat_p = if fit.rss <= f64::EPSILON * fit.tss.max(f64::MIN_POSITIVE) {
        0.0
    } else {
        let f = (explained / k as f64) / (fit.rss / df2);
        let dist = FisherSnedecor::new(k as f64, df2)
            .map_err(|e| Error::Degenerate(format!("F distribution: {e}")))?;
        (1.0 - dist.cdf(f)).clamp(0.0, 1.0)
    };
    Ok(OlsFit {
        n,
        intercept: fit.intercept,
        forecast: fit.predict(today),
        slopes: fit.slopes.clone(),
        f_stat_p,
        adjusted_r_squared: fit.adjusted_r_squared(),
    })
}

/// Hedge on when the forecast is negative and the fit is significant.
pub fn ols_indicator(fit: &OlsFit, gamma_ols: f64) -> bool {
    fit.forecast < 0.0 && fit.f_stat_p <= gamma_ols
}

/// Slope of the fund's neutral returns on the hedge's.
pub fn ols_hedge_beta(fund: &[f64], hedge: &[f64]) -> Result<f64> {
    if fund.len() != hedge.len() {
        return Err(Error::InvalidInput("fund and hedge windows differ in length".into()));
    }
    if fund.len() < 30 {
        return Err(Error::InsufficientHistory(format!(
            "hedge beta needs 30 observations, have {}",
            fund.len()
        )));
    }
    if sample_std(hedge) == 0.0 {
        return Err(Error::Degenerate("hedge returns have zero variance".into()));
    }
    Ok(ols_simple(hedge, fund)?.slopes[0])
}
