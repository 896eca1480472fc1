use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::models::{ModelKind, DEFAULT_GAMMA_OLS};
use crate::signals::SignalName;
use crate::{Error, Result};

/// How the funding rate is turned into a daily charge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum FundingMode {
    /// `f_bps / 10_000 / 252` per active day.
    #[default]
    AnnualizedDaily,
    /// `f_bps / 1000` per active day, as the cost equation is printed.
    PaperLiteral,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum CostMode {
    Frictionless,
    /// Half-spread on the traded weight increment plus funding.
    #[default]
    Full,
    /// Half-spread on the full weight on any day with a trade, plus funding.
    PaperLiteral,
}

impl FromStr for FundingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "annualized_daily" | "annualized" => Ok(FundingMode::AnnualizedDaily),
            "paper_literal" | "literal" => Ok(FundingMode::PaperLiteral),
            other => Err(Error::InvalidInput(format!("unknown funding mode `{other}`"))),
        }
    }
}

impl FromStr for CostMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "frictionless" | "none" => Ok(CostMode::Frictionless),
            "full" => Ok(CostMode::Full),
            "paper_literal" | "literal" => Ok(CostMode::PaperLiteral),
            other => Err(Error::InvalidInput(format!("unknown cost mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BacktestConfig {
    pub fund: String,
    pub hedges: Vec<String>,
    /// Currency units.
    pub fund_size: f64,
    /// Annual funding rate on the short, in basis points.
    pub funding_bps: f64,
    pub funding_mode: FundingMode,
    pub cost_mode: CostMode,
    pub volume_cap_fraction: f64,
    pub volume_sma_days: usize,
    pub model: ModelKind,
    pub signals: Vec<SignalName>,
    pub lookback: usize,
    pub gamma_upper: f64,
    pub gamma_lower: f64,
    pub gamma_ols: f64,
    /// Trailing window for the volatility cap.
    pub vol_window: usize,
    /// Execute each decision this many business days after it is made.
    pub lag: i64,
    /// First date of the reported return series; defaults to the first day a
    /// hedge could be held.
    pub eval_start: Option<NaiveDate>,
}

impl Default for BacktestConfig {
    fn default() -> Self {
        BacktestConfig {
            fund: "FUND".into(),
            hedges: vec!["LQD".into()],
            fund_size: 500e6,
            funding_bps: 50.0,
            funding_mode: FundingMode::default(),
            cost_mode: CostMode::default(),
            volume_cap_fraction: 0.10,
            volume_sma_days: 252,
            model: ModelKind::default(),
            signals: SignalName::ALL.to_vec(),
            lookback: 60,
            gamma_upper: 2.5,
            gamma_lower: -1.5,
            gamma_ols: DEFAULT_GAMMA_OLS,
            vol_window: 252,
            lag: 0,
            eval_start: None,
        }
    }
}

impl BacktestConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidInput(m));
        if !(self.fund_size > 0.0) {
            return bad(format!("fund_size {} must be positive", self.fund_size));
        }
        if !(self.volume_cap_fraction > 0.0 && self.volume_cap_fraction <= 1.0) {
            return bad(format!("volume_cap_fraction {} not in (0, 1]", self.volume_cap_fraction));
        }
        if self.gamma_upper <= self.gamma_lower {
            return bad(format!(
                "gamma_upper {} must exceed gamma_lower {}",
                self.gamma_upper, self.gamma_lower
            ));
        }
        if self.hedges.is_empty() {
            return bad("no hedge instruments".into());
        }
        if self.signals.is_empty() {
            return bad("no signals selected".into());
        }
        if self.volume_sma_days == 0 || self.lookback < 2 || self.vol_window < 2 {
            return bad("volume_sma_days, lookback and vol_window must be positive".into());
        }
        if !(self.funding_bps >= 0.0) {
            return bad(format!("funding_bps {} must be non-negative", self.funding_bps));
        }
        Ok(())
    }

    /// Daily funding charge per unit of absolute weight.
    pub fn funding_daily(&self) -> f64 {
        match self.funding_mode {
            FundingMode::AnnualizedDaily => self.funding_bps / 1e4 / 252.0,
            FundingMode::PaperLiteral => self.funding_bps / 1000.0,
        }
    }

    /// Index of the first close at which a decision can be made.
    pub fn warmup(&self) -> usize {
        self.lookback.max(self.volume_sma_days - 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn funding_conversion() {
        let cfg = BacktestConfig {
            funding_bps: 50.0,
            ..BacktestConfig::default()
        };
        assert!((cfg.funding_daily() - 1.9841e-5).abs() < 1e-9);
        let lit = BacktestConfig {
            funding_mode: FundingMode::PaperLiteral,
            ..cfg
        };
        assert_eq!(lit.funding_daily(), 0.05);
    }

    #[test]
    fn validation() {
        assert!(BacktestConfig::default().validate().is_ok());
        let c = BacktestConfig {
            gamma_upper: -2.0,
            ..BacktestConfig::default()
        };
        assert!(c.validate().is_err());
        let c = BacktestConfig {
            volume_cap_fraction: 1.5,
            ..BacktestConfig::default()
        };
        assert!(c.validate().is_err());
    }
}
