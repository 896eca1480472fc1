//! Build every signal the dataset supports.

use std::collections::BTreeMap;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::{
    bond_observations, cumulative_index, liquidity_factor, momentum_signal, SignalName, SignalSeries,
    MAX_FORWARD_FILL, MOMENTUM_OFFSET,
};
use crate::durneutral::instrument_neutral;
use crate::marketdata::{clean_trace, MarketDataset, VolSmile};
use crate::par::Execution;
use crate::rnd::{credit_signals, extract_distribution, fit_vol_curve, CreditRiskPoint, StrikeGrid, DEFAULT_TAIL_PROB};
use crate::{Error, Result};

/// Which credit-risk reading feeds the models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum CreditMeasure {
    /// Expected credit-ETF drawdown beyond the treasury threshold, net of
    /// the treasury's own.
    #[default]
    ExcessDrawdown,
    /// Probability of exceeding the threshold, less the tail probability.
    ProbExceeds,
}

impl FromStr for CreditMeasure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "excess_drawdown" => Ok(CreditMeasure::ExcessDrawdown),
            "prob_exceeds" => Ok(CreditMeasure::ProbExceeds),
            other => Err(Error::InvalidInput(format!(
                "unknown credit measure `{other}` (expected excess_drawdown or prob_exceeds)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalConfig {
    pub credit_etf: String,
    pub treasury_etf: String,
    /// Instrument whose duration-neutral index drives momentum.
    pub momentum_instrument: String,
    pub momentum_window: usize,
    pub momentum_offset: usize,
    pub tail_prob: f64,
    pub credit_measure: CreditMeasure,
    /// Annualized risk-free rate used in option pricing.
    pub risk_free: f64,
    /// Strike grid in percent of spot.
    pub grid_lo_pct: f64,
    pub grid_hi_pct: f64,
    pub grid_step_pct: f64,
    pub max_fill: usize,
}

impl Default for SignalConfig {
    fn default() -> Self {
        SignalConfig {
            credit_etf: "LQD".into(),
            treasury_etf: "IEF".into(),
            momentum_instrument: "LQD".into(),
            momentum_window: 252,
            momentum_offset: MOMENTUM_OFFSET,
            tail_prob: DEFAULT_TAIL_PROB,
            credit_measure: CreditMeasure::default(),
            risk_free: 0.0,
            grid_lo_pct: 50.0,
            grid_hi_pct: 150.0,
            grid_step_pct: 0.5,
            max_fill: MAX_FORWARD_FILL,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SignalSet {
    pub credit: Option<SignalSeries>,
    pub liquidity: Option<SignalSeries>,
    pub momentum: Option<SignalSeries>,
    pub credit_points: Vec<CreditRiskPoint>,
    /// One line per signal that could not be built, or per input problem
    /// that was worked around.
    pub warnings: Vec<String>,
}

impl SignalSet {
    pub fn get(&self, name: SignalName) -> Option<&SignalSeries> {
        match name {
            SignalName::Credit => self.credit.as_ref(),
            SignalName::Liquidity => self.liquidity.as_ref(),
            SignalName::Momentum => self.momentum.as_ref(),
        }
    }

    pub fn available(&self) -> Vec<&SignalSeries> {
        SignalName::ALL.iter().filter_map(|n| self.get(*n)).collect()
    }
}

fn smiles_by_date<'a>(smiles: &'a [VolSmile], instrument: &str) -> BTreeMap<NaiveDate, &'a VolSmile> {
    let mut out: BTreeMap<NaiveDate, &VolSmile> = BTreeMap::new();
    for s in smiles.iter().filter(|s| s.instrument == instrument) {
        // Several tenors on one date: keep the shortest.
        out.entry(s.date)
            .and_modify(|e| {
                if s.tenor < e.tenor {
                    *e = s
                }
            })
            .or_insert(s);
    }
    out
}

/// Daily credit-risk points for every dataset date on which both ETFs have
/// a smile, and the signal series built from them.
pub fn credit_series(
    ds: &MarketDataset,
    cfg: &SignalConfig,
    exec: Execution,
) -> Result<(SignalSeries, Vec<CreditRiskPoint>)> {
    let credit = smiles_by_date(&ds.smiles, &cfg.credit_etf);
    let treasury = smiles_by_date(&ds.smiles, &cfg.treasury_etf);
    if credit.is_empty() || treasury.is_empty() {
        return Err(Error::InvalidInput(format!(
            "no smiles for {} and {}",
            cfg.credit_etf, cfg.treasury_etf
        )));
    }
    let cbars = ds.prices_of(&cfg.credit_etf)?;
    let tbars = ds.prices_of(&cfg.treasury_etf)?;
    let jobs: Vec<(usize, &VolSmile, &VolSmile)> = ds
        .dates
        .iter()
        .enumerate()
        .filter_map(|(i, d)| match (credit.get(d), treasury.get(d)) {
            (Some(c), Some(t)) if c.tenor == t.tenor => Some((i, *c, *t)),
            _ => None,
        })
        .collect();
    let pct = |spot: f64| StrikeGrid {
        lo: spot * cfg.grid_lo_pct / 100.0,
        hi: spot * cfg.grid_hi_pct / 100.0,
        step: spot * cfg.grid_step_pct / 100.0,
    };
    let points: Vec<Result<CreditRiskPoint>> = exec.map(&jobs, |&(i, cs, ts)| {
        let date = ds.dates[i];
        let run = || -> Result<CreditRiskPoint> {
            let (cb, tb) = (&cbars[i], &tbars[i]);
            let cd = extract_distribution(&fit_vol_curve(cs)?, cb.close, cfg.risk_free, cb.dividend_yield, pct(cb.close))?;
            let td = extract_distribution(&fit_vol_curve(ts)?, tb.close, cfg.risk_free, tb.dividend_yield, pct(tb.close))?;
            credit_signals(&cd, &td, cfg.tail_prob)
        };
        run().map_err(|e| e.at(date))
    });
    let points = points.into_iter().collect::<Result<Vec<_>>>()?;
    let obs: BTreeMap<NaiveDate, f64> = points
        .iter()
        .map(|p| {
            let v = match cfg.credit_measure {
                CreditMeasure::ExcessDrawdown => p.excess_expected_drawdown,
                CreditMeasure::ProbExceeds => p.prob_exceeds - cfg.tail_prob,
            };
            (p.date, v)
        })
        .collect();
    let series = SignalSeries::from_observations(SignalName::Credit, &ds.dates, &obs, cfg.max_fill)?;
    Ok((series, points))
}

/// Liquidity factor from the dataset's trade reports, with the number of
/// trades that could not be priced.
pub fn liquidity_series(ds: &MarketDataset, cfg: &SignalConfig) -> Result<(SignalSeries, usize)> {
    let roster = ds
        .roster
        .as_ref()
        .ok_or_else(|| Error::InvalidInput("no constituent roster".into()))?;
    if ds.trades.is_empty() {
        return Err(Error::InvalidInput("no trade reports".into()));
    }
    let clean = clean_trace(&ds.trades);
    let (obs, failed) = bond_observations(&clean.trades, &ds.treasury_points());
    let series = liquidity_factor(&obs, roster, &ds.dates, cfg.max_fill)?;
    Ok((series, failed.len()))
}

/// Build all three signals. A signal whose inputs are missing or unusable
/// is left out with a warning; the caller decides whether that is fatal.
pub fn build_signals(ds: &MarketDataset, cfg: &SignalConfig, exec: Execution) -> SignalSet {
    let mut set = SignalSet::default();

    match credit_series(ds, cfg, exec) {
        Ok((s, pts)) => {
            set.credit = Some(s);
            set.credit_points = pts;
        }
        Err(e) => set.warnings.push(format!("credit signal skipped: {e}")),
    }

    match liquidity_series(ds, cfg) {
        Ok((s, dropped)) => {
            if dropped > 0 {
                set.warnings
                    .push(format!("liquidity: {dropped} trades could not be priced and were dropped"));
            }
            set.liquidity = Some(s);
        }
        Err(e) => set.warnings.push(format!("liquidity signal skipped: {e}")),
    }

    let momentum = instrument_neutral(ds, &cfg.momentum_instrument).and_then(|n| {
        let idx = cumulative_index(&n.neutral_return);
        momentum_signal(&ds.dates, &idx, cfg.momentum_window, cfg.momentum_offset)
    });
    match momentum {
        Ok(s) => set.momentum = Some(s),
        Err(e) => set.warnings.push(format!("momentum signal skipped: {e}")),
    }
    set
}
