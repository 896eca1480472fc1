//! Volume-limited execution and the daily return identity.

use serde::{Deserialize, Serialize};

use super::{BacktestConfig, CostMode};
use crate::{Error, Result};

/// Relative slack when deciding that a remaining gap fits inside today's cap,
/// so a position built in exact cap-sized steps lands on its target.
const SNAP_TOLERANCE: f64 = 1e-9;

/// Most shares that may trade at index `t`:
/// `min(fraction * SMA(volume over the trailing sma_days, including t), V_t)`.
pub fn volume_cap(volumes: &[f64], t: usize, sma_days: usize, fraction: f64) -> Result<f64> {
    if sma_days == 0 || t >= volumes.len() || t + 1 < sma_days {
        return Err(Error::InsufficientHistory(format!(
            "volume cap at index {t} needs {sma_days} days of volume"
        )));
    }
    let window = &volumes[t + 1 - sma_days..=t];
    if window.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::InvalidInput(format!("bad volume in the {sma_days}-day window ending at index {t}")));
    }
    let sma = window.iter().sum::<f64>() / sma_days as f64;
    Ok((sma * fraction).min(volumes[t]).max(0.0))
}

/// Market inputs for one instrument on one day.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InstrumentDay {
    /// Duration-neutral return from the previous close.
    pub ret: f64,
    pub close: f64,
    pub half_spread: f64,
    /// Shares tradable at this close; zero blocks trading.
    pub cap_shares: f64,
    pub target: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DayOutcome {
    pub fund_ret: f64,
    pub frictionless_ret: f64,
    pub spread_cost: f64,
    pub funding_cost: f64,
    pub hedged_ret: f64,
    /// Signed shares traded at the close, negative for sales.
    pub traded_shares: Vec<f64>,
}

/// Per-instrument hedge weights. Weights are held constant between trades,
/// so a position of `W` earns `W` times the instrument return each day.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositionLedger {
    pub weights: Vec<f64>,
    pub targets: Vec<f64>,
    /// `fund_size * W / close` at the latest close.
    pub shares: Vec<f64>,
}

impl PositionLedger {
    pub fn new(instruments: usize) -> Self {
        PositionLedger {
            weights: vec![0.0; instruments],
            targets: vec![0.0; instruments],
            shares: vec![0.0; instruments],
        }
    }

    /// Earn the day's return on the weights held since the previous close,
    /// then trade toward the targets at this close. Trading costs are
    /// charged on the day the trade happens.
    pub fn step_day(
        &mut self,
        fund_ret: f64,
        inputs: &[InstrumentDay],
        cfg: &BacktestConfig,
        charge_costs: bool,
    ) -> Result<DayOutcome> {
        if inputs.len() != self.weights.len() {
            return Err(Error::InvalidInput(format!(
                "{} instrument inputs for a ledger of {}",
                inputs.len(),
                self.weights.len()
            )));
        }
        let funding_rate = cfg.funding_daily();
        let mut frictionless = fund_ret;
        let mut funding = 0.0;
        let mut spread = 0.0;
        let mut traded = Vec::with_capacity(inputs.len());
        for (i, x) in inputs.iter().enumerate() {
            let held = self.weights[i];
            if held != 0.0 {
                if !x.ret.is_finite() {
                    return Err(Error::InvalidInput(format!("no return for hedge {i} while a position is held")));
                }
                frictionless += held * x.ret;
                funding += held.abs() * funding_rate;
            }

            let target = x.target.clamp(-1.0, 1.0);
            self.targets[i] = target;
            let gap = target - held;
            if gap == 0.0 {
                traded.push(0.0);
                if x.close.is_finite() && x.close > 0.0 {
                    self.shares[i] = held * cfg.fund_size / x.close;
                }
                continue;
            }
            if !(x.close.is_finite() && x.close > 0.0) {
                return Err(Error::InvalidInput(format!("no usable close for hedge {i} on a trading day")));
            }
            let cap_w = x.cap_shares * x.close / cfg.fund_size;
            let next = if gap.abs() <= cap_w * (1.0 + SNAP_TOLERANCE) {
                target
            } else {
                held + cap_w.copysign(gap)
            };
            let dw = next - held;
            self.weights[i] = next;
            self.shares[i] = next * cfg.fund_size / x.close;
            traded.push(dw * cfg.fund_size / x.close);
            if dw != 0.0 {
                spread += match cfg.cost_mode {
                    CostMode::PaperLiteral => next.abs() * x.half_spread,
                    _ => dw.abs() * x.half_spread,
                };
            }
        }
        if !charge_costs || cfg.cost_mode == CostMode::Frictionless {
            spread = 0.0;
            funding = 0.0;
        }
        Ok(DayOutcome {
            fund_ret,
            frictionless_ret: frictionless,
            spread_cost: spread,
            funding_cost: funding,
            hedged_ret: frictionless - spread - funding,
            traded_shares: traded,
        })
    }
}
