//! The three hedge-timing signals (credit, liquidity, momentum) and their
//! orthogonality diagnostics.

mod liquidity;
mod momentum;
mod orthogonality;
mod pipeline;

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

pub use liquidity::{bond_observations, liquidity_factor, BondObservation, LIQUIDITY_WINDOW_DAYS};
pub use momentum::{cumulative_index, momentum_signal, MOMENTUM_OFFSET};
pub use orthogonality::{orthogonality_report, OrthogonalityReport, VarEquation};
pub use pipeline::{build_signals, credit_series, liquidity_series, CreditMeasure, SignalConfig, SignalSet};

use crate::{Error, Result};

/// Longest run of consecutive dates a signal may be carried forward.
pub const MAX_FORWARD_FILL: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SignalName {
    Credit,
    Liquidity,
    Momentum,
}

impl SignalName {
    pub const ALL: [SignalName; 3] = [SignalName::Credit, SignalName::Liquidity, SignalName::Momentum];

    pub fn as_str(self) -> &'static str {
        match self {
            SignalName::Credit => "credit",
            SignalName::Liquidity => "liquidity",
            SignalName::Momentum => "momentum",
        }
    }
}

impl fmt::Display for SignalName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SignalName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "credit" | "c" => Ok(SignalName::Credit),
            "liquidity" | "l" => Ok(SignalName::Liquidity),
            "momentum" | "m" => Ok(SignalName::Momentum),
            other => Err(Error::InvalidInput(format!("unknown signal `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalSeries {
    pub name: SignalName,
    pub dates: Vec<NaiveDate>,
    pub values: Vec<f64>,
    /// True where the value was carried forward from an earlier date.
    pub filled: Vec<bool>,
}

impl SignalSeries {
    pub fn new(name: SignalName, dates: Vec<NaiveDate>, values: Vec<f64>) -> Self {
        let filled = vec![false; dates.len()];
        SignalSeries {
            name,
            dates,
            values,
            filled,
        }
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    /// Values on `dates`, `NaN` where the series has no value.
    pub fn aligned(&self, dates: &[NaiveDate]) -> Vec<f64> {
        let map: BTreeMap<NaiveDate, f64> = self.dates.iter().copied().zip(self.values.iter().copied()).collect();
        dates.iter().map(|d| map.get(d).copied().unwrap_or(f64::NAN)).collect()
    }

    /// Build a series over `calendar` from sparse observations. The series
    /// starts at the first observation; later gaps are carried forward for
    /// at most `max_fill` consecutive dates.
    pub fn from_observations(
        name: SignalName,
        calendar: &[NaiveDate],
        obs: &BTreeMap<NaiveDate, f64>,
        max_fill: usize,
    ) -> Result<Self> {
        let mut out = SignalSeries::new(name, Vec::new(), Vec::new());
        let mut last: Option<f64> = None;
        let mut run = 0;
        for &d in calendar {
            match (obs.get(&d), last) {
                (Some(&v), _) => {
                    out.dates.push(d);
                    out.values.push(v);
                    out.filled.push(false);
                    last = Some(v);
                    run = 0;
                }
                (None, Some(v)) => {
                    run += 1;
                    if run > max_fill {
                        return Err(Error::InsufficientHistory(format!(
                            "{name} signal has no observation for more than {max_fill} consecutive dates (through {d})"
                        )));
                    }
                    out.dates.push(d);
                    out.values.push(v);
                    out.filled.push(true);
                }
                (None, None) => {}
            }
        }
        if out.is_empty() {
            return Err(Error::InsufficientHistory(format!("{name} signal has no observations")));
        }
        Ok(out)
    }
}

/// `date,name,value` rows for every series, ordered by date then name.
pub fn write_signals_csv<W: Write>(out: W, series: &[&SignalSeries]) -> Result<()> {
    let mut rows: Vec<(NaiveDate, SignalName, f64)> = series
        .iter()
        .flat_map(|s| s.dates.iter().zip(&s.values).map(move |(d, v)| (*d, s.name, *v)))
        .collect();
    rows.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
    let mut w = csv::Writer::from_writer(out);
    let wrap = |e: csv::Error| Error::InvalidInput(format!("writing signals: {e}"));
    w.write_record(["date", "name", "value"]).map_err(wrap)?;
    for (d, n, v) in rows {
        w.write_record([d.to_string(), n.to_string(), v.to_string()]).map_err(wrap)?;
    }
    w.flush().map_err(|e| Error::InvalidInput(format!("writing signals: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::Duration;

    fn cal(n: usize) -> Vec<NaiveDate> {
        let d0 = NaiveDate::from_ymd_opt(2021, 1, 4).unwrap();
        (0..n).map(|i| d0 + Duration::days(i as i64)).collect()
    }

    #[test]
    fn forward_fill_is_bounded_and_flagged() {
        let c = cal(10);
        let obs: BTreeMap<_, _> = [(c[1], 1.0), (c[4], 2.0)].into_iter().collect();
        let s = SignalSeries::from_observations(SignalName::Liquidity, &c, &obs, 5).unwrap();
        assert_eq!(s.dates[0], c[1]);
        assert_eq!(s.values, vec![1.0, 1.0, 1.0, 2.0, 2.0, 2.0, 2.0, 2.0, 2.0]);
        assert_eq!(s.filled.iter().filter(|f| **f).count(), 7);
        let err = SignalSeries::from_observations(SignalName::Liquidity, &c, &obs, 4).unwrap_err();
        assert!(err.to_string().contains("liquidity"));
    }

    #[test]
    fn csv_rows_are_sorted() {
        let c = cal(2);
        let a = SignalSeries::new(SignalName::Momentum, c.clone(), vec![1.0, 2.0]);
        let b = SignalSeries::new(SignalName::Credit, c.clone(), vec![3.0, 4.0]);
        let mut buf = Vec::new();
        write_signals_csv(&mut buf, &[&a, &b]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "date,name,value");
        assert_eq!(lines[1], "2021-01-04,credit,3");
        assert_eq!(lines[2], "2021-01-04,momentum,1");
    }

    #[test]
    fn names_round_trip() {
        for n in SignalName::ALL {
            assert_eq!(n.as_str().parse::<SignalName>().unwrap(), n);
        }
    }
}
