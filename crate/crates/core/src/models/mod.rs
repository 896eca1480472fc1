//! Hedge-timing models: rolling two-step OLS and rolling CCA with
//! hysteresis, plus weight capping and PCA hedge aggregation.

mod cca;
mod ols;
mod sizing;
mod state;

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

pub use cca::{canonical_correlation, cca_fit, CanonicalPair, CcaFit};
pub use ols::{ols_fit, ols_hedge_beta, ols_indicator, OlsFit, DEFAULT_GAMMA_OLS};
pub use sizing::{cap_and_scale, pca_first_component, PcaHedge};
pub use state::{hedge_state_step, HedgeTimingState, Indicator, StateCause};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum ModelKind {
    TwoStepOls,
    #[default]
    Cca,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::TwoStepOls => "ols",
            ModelKind::Cca => "cca",
        })
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ols" | "two_step_ols" | "twostepols" => Ok(ModelKind::TwoStepOls),
            "cca" => Ok(ModelKind::Cca),
            other => Err(Error::InvalidInput(format!("unknown model `{other}` (expected ols or cca)"))),
        }
    }
}

/// One row of per-date model output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDiagnostic {
    pub date: NaiveDate,
    pub model: ModelKind,
    /// Canonical correlation (CCA) or adjusted R² (OLS); `NaN` if no fit.
    pub achieved_corr: f64,
    pub forecast: f64,
    /// CCA z-score, or the F-test p-value for OLS.
    pub zscore: f64,
    pub indicator: bool,
    pub w_raw: f64,
    pub w_capped: f64,
}

pub fn write_diagnostics_csv<W: Write>(out: W, rows: &[ModelDiagnostic]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let wrap = |e: csv::Error| Error::InvalidInput(format!("writing diagnostics: {e}"));
    w.write_record(["date", "model", "achieved_corr", "forecast", "zscore", "indicator", "W_raw", "W_capped"])
        .map_err(wrap)?;
    for r in rows {
        w.write_record([
            r.date.to_string(),
            r.model.to_string(),
            r.achieved_corr.to_string(),
            r.forecast.to_string(),
            r.zscore.to_string(),
            u8::from(r.indicator).to_string(),
            r.w_raw.to_string(),
            r.w_capped.to_string(),
        ])
        .map_err(wrap)?;
    }
    w.flush().map_err(|e| Error::InvalidInput(format!("writing diagnostics: {e}")))
}
