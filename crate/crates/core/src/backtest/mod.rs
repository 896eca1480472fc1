//! Daily hedge backtest: model fits, hysteresis, volatility caps and
//! volume-limited execution with spread and funding costs.
//!
//! A run has two phases. [`fit_path`] fits the model at every close; those
//! fits are independent across dates and run on [`Execution`]. [`simulate`]
//! then walks the dates in order, stepping the hedge state and the position
//! ledger. Fits depend only on the lookback, model and signal choice, so grid
//! searches over thresholds and lag studies reuse one [`FitPath`].

mod config;
mod decide;
mod ledger;
mod prepare;

use std::io::Write;

use chrono::NaiveDate;
use serde::Serialize;

pub use config::{BacktestConfig, CostMode, FundingMode};
pub use ledger::{volume_cap, DayOutcome, InstrumentDay, PositionLedger};
pub use prepare::{HedgeInputs, PreparedData};

use crate::metrics::{summarize, Summary};
use crate::models::{hedge_state_step, HedgeTimingState, ModelDiagnostic, ModelKind};
use crate::par::Execution;
use crate::signals::SignalName;
use crate::{Error, Result};
use decide::Fit;

/// Model fits for every close from the warm-up index on.
#[derive(Debug, Clone, PartialEq)]
pub struct FitPath {
    start: usize,
    model: ModelKind,
    lookback: usize,
    signals: Vec<SignalName>,
    fits: Vec<Option<Fit>>,
}

impl FitPath {
    fn matches(&self, cfg: &BacktestConfig) -> bool {
        self.model == cfg.model
            && self.lookback == cfg.lookback
            && self.signals == cfg.signals
            && self.start == cfg.warmup()
    }

    /// Number of closes with a usable fit.
    pub fn fitted_days(&self) -> usize {
        self.fits.iter().filter(|f| f.is_some()).count()
    }
}

pub fn fit_path(data: &PreparedData, cfg: &BacktestConfig, exec: Execution) -> Result<FitPath> {
    cfg.validate()?;
    check_hedges(data, cfg)?;
    let needed = cfg.lookback + cfg.volume_sma_days + 30;
    if data.len() < needed {
        return Err(Error::InsufficientHistory(format!(
            "{} dates, need at least {needed} for lookback {} and a {}-day volume average",
            data.len(),
            cfg.lookback,
            cfg.volume_sma_days
        )));
    }
    let start = cfg.warmup();
    Ok(FitPath {
        start,
        model: cfg.model,
        lookback: cfg.lookback,
        signals: cfg.signals.clone(),
        fits: decide::fit_all(data, cfg, start, exec)?,
    })
}

fn check_hedges(data: &PreparedData, cfg: &BacktestConfig) -> Result<()> {
    let names: Vec<&str> = data.hedges.iter().map(|h| h.name.as_str()).collect();
    if names != cfg.hedges.iter().map(String::as_str).collect::<Vec<_>>() {
        return Err(Error::InvalidInput(format!(
            "data prepared for hedges {names:?}, config asks for {:?}",
            cfg.hedges
        )));
    }
    if data.fund != cfg.fund {
        return Err(Error::InvalidInput(format!(
            "data prepared for fund {}, config asks for {}",
            data.fund, cfg.fund
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BacktestResult {
    pub dates: Vec<NaiveDate>,
    pub instruments: Vec<String>,
    /// Index of the first reported date.
    pub eval_start: usize,
    pub fund_ret: Vec<f64>,
    pub frictionless_ret: Vec<f64>,
    pub spread_cost: Vec<f64>,
    pub funding_cost: Vec<f64>,
    pub hedged_ret: Vec<f64>,
    /// Weights after the trades at each close.
    pub weights: Vec<Vec<f64>>,
    /// Weights the models asked for at each close, after any lag shift.
    pub targets: Vec<Vec<f64>>,
    pub traded_shares: Vec<Vec<f64>>,
    pub cap_shares: Vec<Vec<f64>>,
    /// Whether the model wanted a hedge on at each close.
    pub hedge_on: Vec<bool>,
    pub diagnostics: Vec<ModelDiagnostic>,
    /// False when costs were switched off or unavailable.
    pub costs_charged: bool,
    pub warnings: Vec<String>,
    pub summary: Summary,
}

impl BacktestResult {
    pub fn eval_dates(&self) -> &[NaiveDate] {
        &self.dates[self.eval_start..]
    }

    pub fn eval_hedged(&self) -> &[f64] {
        &self.hedged_ret[self.eval_start..]
    }

    pub fn eval_fund(&self) -> &[f64] {
        &self.fund_ret[self.eval_start..]
    }

    pub fn ever_active(&self) -> bool {
        self.weights.iter().any(|w| w.iter().any(|x| *x != 0.0))
    }

    /// `date, fund_ret, hedged_ret, frictionless_ret, weight_<id>...,
    /// traded_<id>..., spread_cost, funding_cost, state` over the reported
    /// dates.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let wrap = |e: csv::Error| Error::InvalidInput(format!("writing backtest: {e}"));
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["date".to_string(), "fund_ret".into(), "hedged_ret".into(), "frictionless_ret".into()];
        header.extend(self.instruments.iter().map(|i| format!("weight_{i}")));
        header.extend(self.instruments.iter().map(|i| format!("traded_{i}")));
        header.extend(["spread_cost".into(), "funding_cost".into(), "state".into()]);
        w.write_record(&header).map_err(wrap)?;
        for t in self.eval_start..self.dates.len() {
            let mut row = vec![
                self.dates[t].to_string(),
                self.fund_ret[t].to_string(),
                self.hedged_ret[t].to_string(),
                self.frictionless_ret[t].to_string(),
            ];
            row.extend(self.weights[t].iter().map(f64::to_string));
            row.extend(self.traded_shares[t].iter().map(f64::to_string));
            row.push(self.spread_cost[t].to_string());
            row.push(self.funding_cost[t].to_string());
            row.push(if self.hedge_on[t] { "on" } else { "off" }.into());
            w.write_record(&row).map_err(wrap)?;
        }
        w.flush().map_err(|e| Error::InvalidInput(format!("writing backtest: {e}")))
    }
}

/// Fit and simulate in one go.
pub fn run_backtest(data: &PreparedData, cfg: &BacktestConfig, exec: Execution) -> Result<BacktestResult> {
    let path = fit_path(data, cfg, exec)?;
    simulate(data, cfg, &path)
}

fn no_fit(date: NaiveDate, model: ModelKind) -> ModelDiagnostic {
    ModelDiagnostic {
        date,
        model,
        achieved_corr: f64::NAN,
        forecast: f64::NAN,
        zscore: f64::NAN,
        indicator: false,
        w_raw: f64::NAN,
        w_capped: f64::NAN,
    }
}

/// Decided target weights per close, before any lag shift.
fn decide_targets(
    data: &PreparedData,
    cfg: &BacktestConfig,
    path: &FitPath,
) -> (Vec<Vec<f64>>, Vec<bool>, Vec<ModelDiagnostic>) {
    let n = data.len();
    let k = data.hedges.len();
    let mut targets = vec![vec![0.0; k]; n];
    let mut on = vec![false; n];
    let mut diags = Vec::with_capacity(n - path.start);
    let mut state = HedgeTimingState::default();
    let mut last = vec![0.0; k];
    let mut last_on = false;
    for (i, fit) in path.fits.iter().enumerate() {
        let t = path.start + i;
        let date = data.dates[t];
        match fit {
            Some(Fit::Cca {
                corr,
                forecast,
                zscore,
                w_star,
                w_capped,
                shares,
            }) => {
                state = hedge_state_step(state, date, *w_star, *zscore, cfg.gamma_upper, cfg.gamma_lower);
                // A long hedge is never taken; an on state with a positive
                // weight holds nothing.
                let total = if state.is_on() { w_capped.min(0.0) } else { 0.0 };
                last = shares.iter().map(|s| total * s).collect();
                last_on = state.is_on();
                diags.push(ModelDiagnostic {
                    date,
                    model: ModelKind::Cca,
                    achieved_corr: *corr,
                    forecast: *forecast,
                    zscore: *zscore,
                    indicator: state.is_on(),
                    w_raw: *w_star,
                    w_capped: *w_capped,
                });
            }
            Some(Fit::Ols {
                forecast,
                p_value,
                adj_r2,
                indicator,
                w_raw,
                w_capped,
            }) => {
                last = indicator
                    .iter()
                    .zip(w_capped)
                    .map(|(on, w)| if *on { w.min(0.0) } else { 0.0 })
                    .collect();
                last_on = indicator.iter().any(|x| *x);
                // Report the first hedge's regression.
                diags.push(ModelDiagnostic {
                    date,
                    model: ModelKind::TwoStepOls,
                    achieved_corr: adj_r2[0],
                    forecast: forecast[0],
                    zscore: p_value[0],
                    indicator: indicator[0],
                    w_raw: w_raw[0],
                    w_capped: w_capped[0],
                });
            }
            // Skipped day: hold the previous decision.
            None => diags.push(no_fit(date, cfg.model)),
        }
        targets[t].clone_from(&last);
        on[t] = last_on;
    }
    (targets, on, diags)
}

/// Walk the dates in order, executing the targets from `path`.
pub fn simulate(data: &PreparedData, cfg: &BacktestConfig, path: &FitPath) -> Result<BacktestResult> {
    cfg.validate()?;
    check_hedges(data, cfg)?;
    if !path.matches(cfg) {
        return Err(Error::InvalidInput(
            "fit path was built for a different lookback, model or signal set".into(),
        ));
    }
    let n = data.len();
    let k = data.hedges.len();
    let mut warnings = data.warnings.clone();
    let (decided, decided_on, diagnostics) = decide_targets(data, cfg, path);

    // Execution at t uses the decision made at t - lag.
    let lag = cfg.lag;
    if lag.unsigned_abs() as usize >= n || (lag > 0 && path.start + lag as usize >= n) {
        warnings.push(format!("lag {lag} reaches past the end of the data; no decision is executed"));
    }
    let shifted = |t: usize| -> Option<usize> {
        let s = t as i64 - lag;
        if s < 0 {
            None
        } else {
            Some((s as usize).min(n - 1))
        }
    };

    let charge = cfg.cost_mode != CostMode::Frictionless && data.costs_available;
    if cfg.cost_mode != CostMode::Frictionless && !data.costs_available {
        warnings.push("bid/ask quotes missing; results are frictionless".into());
    }

    let eval_start = cfg.eval_start.map(|d| data.index_of(d)).unwrap_or(path.start).max(1);
    if eval_start >= n {
        return Err(Error::InsufficientHistory(format!(
            "evaluation starts at index {eval_start} of {n}"
        )));
    }

    let mut ledger = PositionLedger::new(k);
    let mut res = BacktestResult {
        dates: data.dates.clone(),
        instruments: data.hedges.iter().map(|h| h.name.clone()).collect(),
        eval_start,
        fund_ret: Vec::with_capacity(n),
        frictionless_ret: Vec::with_capacity(n),
        spread_cost: Vec::with_capacity(n),
        funding_cost: Vec::with_capacity(n),
        hedged_ret: Vec::with_capacity(n),
        weights: Vec::with_capacity(n),
        targets: Vec::with_capacity(n),
        traded_shares: Vec::with_capacity(n),
        cap_shares: Vec::with_capacity(n),
        hedge_on: Vec::with_capacity(n),
        diagnostics,
        costs_charged: charge,
        warnings,
        summary: Summary::default(),
    };
    let mut inputs = Vec::with_capacity(k);
    for t in 0..n {
        let src = shifted(t);
        let tradable = t + 1 >= cfg.volume_sma_days;
        inputs.clear();
        let mut caps = Vec::with_capacity(k);
        for (i, h) in data.hedges.iter().enumerate() {
            let cap = if tradable {
                volume_cap(&h.volume, t, cfg.volume_sma_days, cfg.volume_cap_fraction).map_err(|e| e.at(data.dates[t]))?
            } else {
                0.0
            };
            caps.push(cap);
            inputs.push(InstrumentDay {
                ret: h.neutral[t],
                close: h.close[t],
                half_spread: h.half_spread[t],
                cap_shares: cap,
                target: src.map_or(0.0, |s| decided[s][i]),
            });
        }
        let out = ledger
            .step_day(data.fund_neutral[t], &inputs, cfg, charge)
            .map_err(|e| e.at(data.dates[t]))?;
        res.fund_ret.push(out.fund_ret);
        res.frictionless_ret.push(out.frictionless_ret);
        res.spread_cost.push(out.spread_cost);
        res.funding_cost.push(out.funding_cost);
        res.hedged_ret.push(out.hedged_ret);
        res.weights.push(ledger.weights.clone());
        res.targets.push(ledger.targets.clone());
        res.traded_shares.push(out.traded_shares);
        res.cap_shares.push(caps);
        res.hedge_on.push(src.is_some_and(|s| decided_on[s]));
    }
    for t in eval_start..n {
        if !res.fund_ret[t].is_finite() {
            return Err(Error::InvalidInput("fund return missing inside the evaluation window".into()).at(data.dates[t]));
        }
    }
    res.summary = summarize(&res)?;
    Ok(res)
}
