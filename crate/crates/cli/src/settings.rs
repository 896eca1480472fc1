//! Flat `key = value` configuration with command-line overrides.

use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use dynhedge::backtest::BacktestConfig;
use dynhedge::marketdata::{DatasetSchema, SynthConfig};
use dynhedge::metrics::Grids;
use dynhedge::signals::SignalConfig;
use serde::Serialize;

pub const KEYS_HELP: &str = "\
Configuration keys (file lines `key = value`, `#` starts a comment; --set overrides):
  backtest:   fund=FUND  hedges=LQD  fund_size=500e6  funding_bps=50
              funding_mode=annualized_daily|paper_literal
              cost_mode=full|frictionless|paper_literal
              volume_cap_fraction=0.10  volume_sma_days=252
              model=cca|ols  signals=credit,liquidity,momentum
              lookback=60  gamma_upper=2.5  gamma_lower=-1.5  gamma_ols=<model default>
              vol_window=252  lag=0  eval_start=YYYY-MM-DD
  signals:    credit_etf=LQD  treasury_etf=IEF  momentum_instrument=LQD
              momentum_window=252  momentum_offset=22  tail_prob=0.01
              credit_measure=excess_drawdown|prob_exceeds  risk_free=0
              grid_lo_pct=50  grid_hi_pct=150  grid_step_pct=0.5  max_fill=5
  search:     grid_lookbacks=20,40,60,125,250  grid_gamma_uppers=2.0,2.5,3.0
              grid_gamma_lowers=-0.5,-1.0,-1.5,-2.0,-2.5,-3.0  lags=0,1,2,3,5,10
  data:       max_misaligned_dates=10
  synth:      synth_days=1500  synth_start=2013-01-02  seed=0
Numbers accept `inf`, so gamma_upper=inf disables the hedge.";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Settings {
    pub backtest: BacktestConfig,
    pub signals: SignalConfig,
    pub grids: Grids,
    pub lags: Vec<i64>,
    pub max_misaligned_dates: usize,
    pub synth_days: usize,
    pub synth_start: chrono::NaiveDate,
    pub seed: u64,
}

impl Default for Settings {
    fn default() -> Self {
        let synth = SynthConfig::default();
        Settings {
            backtest: BacktestConfig::default(),
            signals: SignalConfig::default(),
            grids: Grids::default(),
            lags: vec![0, 1, 2, 3, 5, 10],
            max_misaligned_dates: DatasetSchema::default().max_misaligned_dates,
            synth_days: synth.days,
            synth_start: synth.start,
            seed: 0,
        }
    }
}

fn parse<T>(key: &str, v: &str) -> Result<T>
where
    T: FromStr,
    T::Err: Display,
{
    v.parse::<T>().map_err(|e| anyhow!("`{key}`: cannot parse `{v}`: {e}"))
}

fn list<T>(key: &str, v: &str) -> Result<Vec<T>>
where
    T: FromStr,
    T::Err: Display,
{
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse(key, s))
        .collect()
}

impl Settings {
    pub fn schema(&self) -> DatasetSchema {
        DatasetSchema {
            max_misaligned_dates: self.max_misaligned_dates,
        }
    }

    pub fn synth_config(&self) -> SynthConfig {
        SynthConfig {
            days: self.synth_days,
            start: self.synth_start,
            ..SynthConfig::default()
        }
    }

    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        let (b, s) = (&mut self.backtest, &mut self.signals);
        match key {
            "fund" => b.fund = v.to_string(),
            "hedges" => b.hedges = list(key, v)?,
            "fund_size" => b.fund_size = parse(key, v)?,
            "funding_bps" => b.funding_bps = parse(key, v)?,
            "funding_mode" => b.funding_mode = parse(key, v)?,
            "cost_mode" => b.cost_mode = parse(key, v)?,
            "volume_cap_fraction" => b.volume_cap_fraction = parse(key, v)?,
            "volume_sma_days" => b.volume_sma_days = parse(key, v)?,
            "model" => b.model = parse(key, v)?,
            "signals" => b.signals = list(key, v)?,
            "lookback" => b.lookback = parse(key, v)?,
            "gamma_upper" => b.gamma_upper = parse(key, v)?,
            "gamma_lower" => b.gamma_lower = parse(key, v)?,
            "gamma_ols" => b.gamma_ols = parse(key, v)?,
            "vol_window" => b.vol_window = parse(key, v)?,
            "lag" => b.lag = parse(key, v)?,
            "eval_start" => b.eval_start = Some(parse(key, v)?),
            "credit_etf" => s.credit_etf = v.to_string(),
            "treasury_etf" => s.treasury_etf = v.to_string(),
            "momentum_instrument" => s.momentum_instrument = v.to_string(),
            "momentum_window" => s.momentum_window = parse(key, v)?,
            "momentum_offset" => s.momentum_offset = parse(key, v)?,
            "tail_prob" => s.tail_prob = parse(key, v)?,
            "credit_measure" => s.credit_measure = parse(key, v)?,
            "risk_free" => s.risk_free = parse(key, v)?,
            "grid_lo_pct" => s.grid_lo_pct = parse(key, v)?,
            "grid_hi_pct" => s.grid_hi_pct = parse(key, v)?,
            "grid_step_pct" => s.grid_step_pct = parse(key, v)?,
            "max_fill" => s.max_fill = parse(key, v)?,
            "grid_lookbacks" => self.grids.lookbacks = list(key, v)?,
            "grid_gamma_uppers" => self.grids.gamma_uppers = list(key, v)?,
            "grid_gamma_lowers" => self.grids.gamma_lowers = list(key, v)?,
            "lags" => self.lags = list(key, v)?,
            "max_misaligned_dates" => self.max_misaligned_dates = parse(key, v)?,
            "synth_days" => self.synth_days = parse(key, v)?,
            "synth_start" => self.synth_start = parse(key, v)?,
            "seed" => self.seed = parse(key, v)?,
            _ => bail!("unknown configuration key `{key}`"),
        }
        Ok(())
    }

    /// Apply `key=value` assignments in order. `origin` names the source in
    /// error messages.
    pub fn apply_lines(&mut self, text: &str, origin: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("{origin}:{}: expected `key = value`", i + 1))?;
            self.set(k.trim(), v.trim())
                .with_context(|| format!("{origin}:{}", i + 1))?;
        }
        Ok(())
    }

    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Settings> {
        let mut s = Settings::default();
        if let Some(p) = path {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            s.apply_lines(&text, &p.display().to_string())?;
        }
        for o in overrides {
            s.apply_lines(o, "--set")?;
        }
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use dynhedge::backtest::CostMode;
    use dynhedge::models::ModelKind;
    use dynhedge::signals::SignalName;

    #[test]
    fn file_then_overrides() {
        let mut s = Settings::default();
        s.apply_lines("model = ols # comment\nhedges = LQD, HYG\n\ncost_mode=frictionless", "f").unwrap();
        s.apply_lines("gamma_upper=inf", "--set").unwrap();
        assert_eq!(s.backtest.model, ModelKind::TwoStepOls);
        assert_eq!(s.backtest.hedges, vec!["LQD", "HYG"]);
        assert_eq!(s.backtest.cost_mode, CostMode::Frictionless);
        assert!(s.backtest.gamma_upper.is_infinite());
    }

    #[test]
    fn lists_and_signals() {
        let mut s = Settings::default();
        s.set("signals", "credit,momentum").unwrap();
        s.set("lags", "-2,0,4").unwrap();
        assert_eq!(s.backtest.signals, vec![SignalName::Credit, SignalName::Momentum]);
        assert_eq!(s.lags, vec![-2, 0, 4]);
    }

    #[test]
    fn bad_lines_name_their_origin() {
        let mut s = Settings::default();
        let e = s.apply_lines("lookback = 40\nlookback forty", "run.cfg").unwrap_err();
        assert!(e.to_string().contains("run.cfg:2"));
        let e = s.apply_lines("colour = blue", "run.cfg").unwrap_err();
        assert!(format!("{e:#}").contains("unknown configuration key"));
    }
}
