//! Performance metrics, hedged-minus-baseline deltas, the sequential grid
//! search and lag studies.

mod search;

use std::collections::BTreeMap;
use std::io::Write;

use chrono::{Datelike, NaiveDate};
use serde::Serialize;

pub use search::{
    full_grid, grid_search, lag_analysis, FullGridCell, GridCell, GridSearchReport, Grids, LagRow, Stage, StageReport,
};

use crate::backtest::BacktestResult;
use crate::stats::{mean, sample_std};
use crate::{Error, Result};

pub const PERIODS_PER_YEAR: f64 = 252.0;

/// Annualized return and risk figures. Non-finite values serialize as `null`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct MetricsBlock {
    pub ann_return: f64,
    pub ann_std: f64,
    pub ann_downside_std: f64,
    pub max_drawdown: f64,
    /// `+inf` when there are no negative returns; see `sortino_unbounded`.
    pub sortino: f64,
    pub sortino_unbounded: bool,
    pub annual_turnover: f64,
}

/// Return metrics for a daily series; turnover is left at zero.
pub fn metrics_block(daily: &[f64]) -> Result<MetricsBlock> {
    if daily.len() < 2 {
        return Err(Error::InsufficientHistory(format!(
            "metrics need at least two returns, got {}",
            daily.len()
        )));
    }
    if daily.iter().any(|r| !r.is_finite()) {
        return Err(Error::InvalidInput("non-finite daily return".into()));
    }
    let ann_return = mean(daily) * PERIODS_PER_YEAR;
    let ann_std = sample_std(daily) * PERIODS_PER_YEAR.sqrt();
    let down: f64 = daily.iter().filter(|r| **r < 0.0).map(|r| r * r).sum();
    let ann_downside_std = (down / daily.len() as f64).sqrt() * PERIODS_PER_YEAR.sqrt();
    let (sortino, sortino_unbounded) = if ann_downside_std > 0.0 {
        (ann_return / ann_downside_std, false)
    } else {
        (f64::INFINITY, true)
    };
    Ok(MetricsBlock {
        ann_return,
        ann_std,
        ann_downside_std,
        max_drawdown: max_drawdown(daily),
        sortino,
        sortino_unbounded,
        annual_turnover: 0.0,
    })
}

/// Worst peak-to-trough fall of the compounded index, starting from 1.
pub fn max_drawdown(daily: &[f64]) -> f64 {
    let mut index = 1.0;
    let mut peak = 1.0f64;
    let mut worst = 0.0f64;
    for r in daily {
        index *= 1.0 + r;
        peak = peak.max(index);
        worst = worst.min(index / peak - 1.0);
    }
    worst.max(-1.0)
}

/// Sum of absolute weight changes per calendar year, averaged over the years
/// the dates touch. `weights[0]` is the position before the first date.
pub fn annual_turnover(dates: &[NaiveDate], weights: &[Vec<f64>]) -> f64 {
    if dates.is_empty() || weights.len() != dates.len() + 1 {
        return 0.0;
    }
    let mut per_year: BTreeMap<i32, f64> = BTreeMap::new();
    for (t, d) in dates.iter().enumerate() {
        let change: f64 = weights[t + 1].iter().zip(&weights[t]).map(|(a, b)| (a - b).abs()).sum();
        *per_year.entry(d.year()).or_default() += change;
    }
    per_year.values().sum::<f64>() / per_year.len() as f64
}

/// Hedged minus baseline, metric by metric.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct DeltaMetrics {
    pub ann_return: f64,
    pub ann_std: f64,
    pub ann_downside_std: f64,
    pub max_drawdown: f64,
    pub sortino: f64,
    pub annual_turnover: f64,
}

impl DeltaMetrics {
    pub fn between(hedged: &MetricsBlock, baseline: &MetricsBlock) -> Self {
        // Two unbounded ratios compare equal rather than producing NaN.
        let sortino = if hedged.sortino == baseline.sortino {
            0.0
        } else {
            hedged.sortino - baseline.sortino
        };
        DeltaMetrics {
            ann_return: hedged.ann_return - baseline.ann_return,
            ann_std: hedged.ann_std - baseline.ann_std,
            ann_downside_std: hedged.ann_downside_std - baseline.ann_downside_std,
            max_drawdown: hedged.max_drawdown - baseline.max_drawdown,
            sortino,
            annual_turnover: hedged.annual_turnover - baseline.annual_turnover,
        }
    }

    pub const COLUMNS: [&'static str; 6] = [
        "d_std",
        "d_downside_std",
        "d_max_drawdown",
        "d_ann_return",
        "d_sortino",
        "d_turnover",
    ];

    /// Values in [`DeltaMetrics::COLUMNS`] order.
    pub fn values(&self) -> [f64; 6] {
        [
            self.ann_std,
            self.ann_downside_std,
            self.max_drawdown,
            self.ann_return,
            self.sortino,
            self.annual_turnover,
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Summary {
    pub hedged: MetricsBlock,
    pub baseline: MetricsBlock,
    pub delta: DeltaMetrics,
    pub observations: usize,
}

/// Metrics over a backtest's reported dates.
pub fn summarize(res: &BacktestResult) -> Result<Summary> {
    let s = res.eval_start;
    let mut hedged = metrics_block(res.eval_hedged())?;
    let baseline = metrics_block(res.eval_fund())?;
    hedged.annual_turnover = annual_turnover(res.eval_dates(), &res.weights[s - 1..]);
    Ok(Summary {
        hedged,
        baseline,
        delta: DeltaMetrics::between(&hedged, &baseline),
        observations: res.eval_hedged().len(),
    })
}

fn csv_err(e: csv::Error) -> Error {
    Error::InvalidInput(format!("writing csv: {e}"))
}

/// `stage, candidate, <six deltas>, status` with one row per grid cell.
pub fn write_gridsearch_csv<W: Write>(out: W, report: &GridSearchReport) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["stage", "candidate"];
    header.extend(DeltaMetrics::COLUMNS);
    header.push("status");
    w.write_record(&header).map_err(csv_err)?;
    for stage in &report.stages {
        for cell in &stage.cells {
            let mut row = vec![stage.stage.as_str().to_string(), cell.candidate.to_string()];
            match &cell.delta {
                Some(d) => row.extend(d.values().iter().map(f64::to_string)),
                None => row.extend(std::iter::repeat_n(String::new(), 6)),
            }
            row.push(cell.error.clone().unwrap_or_else(|| "ok".into()));
            w.write_record(&row).map_err(csv_err)?;
        }
    }
    w.flush().map_err(|e| Error::InvalidInput(format!("writing csv: {e}")))
}

/// `lag, <hedged metrics>, d_sortino`.
pub fn write_lags_csv<W: Write>(out: W, rows: &[LagRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "lag",
        "ann_return",
        "ann_std",
        "ann_downside_std",
        "max_drawdown",
        "sortino",
        "annual_turnover",
        "d_sortino",
    ])
    .map_err(csv_err)?;
    for r in rows {
        let m = &r.summary.hedged;
        w.write_record([
            r.lag.to_string(),
            m.ann_return.to_string(),
            m.ann_std.to_string(),
            m.ann_downside_std.to_string(),
            m.max_drawdown.to_string(),
            m.sortino.to_string(),
            m.annual_turnover.to_string(),
            r.summary.delta.sortino.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::InvalidInput(format!("writing csv: {e}")))
}
