//! On/off hedge state with separate entry and exit thresholds.

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Indicator {
    On,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StateCause {
    NeverOn,
    EntrySignal,
    ExitMeanRevert,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HedgeTimingState {
    pub indicator: Indicator,
    pub since: Option<NaiveDate>,
    pub cause: StateCause,
}

impl Default for HedgeTimingState {
    fn default() -> Self {
        HedgeTimingState {
            indicator: Indicator::Off,
            since: None,
            cause: StateCause::NeverOn,
        }
    }
}

impl HedgeTimingState {
    pub fn is_on(&self) -> bool {
        self.indicator == Indicator::On
    }
}

/// One day of the hysteresis rule:
///
/// * off, short weight and `z > upper`: switch on
/// * on and `z >= lower`: stay on
/// * on and `z < lower`: switch off
/// * otherwise: stay off
pub fn hedge_state_step(
    prev: HedgeTimingState,
    date: NaiveDate,
    w_star: f64,
    z: f64,
    upper: f64,
    lower: f64,
) -> HedgeTimingState {
    debug_assert!(upper > lower);
    match prev.indicator {
        Indicator::Off if w_star < 0.0 && z > upper => HedgeTimingState {
            indicator: Indicator::On,
            since: Some(date),
            cause: StateCause::EntrySignal,
        },
        Indicator::On if z < lower => HedgeTimingState {
            indicator: Indicator::Off,
            since: Some(date),
            cause: StateCause::ExitMeanRevert,
        },
        _ => prev,
    }
}
