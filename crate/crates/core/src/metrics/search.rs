//! Sequential grid search over lookback and thresholds, the full grid, and
//! execution-lag studies.

use chrono::NaiveDate;
use serde::Serialize;

use super::{DeltaMetrics, Summary};
use crate::backtest::{fit_path, simulate, BacktestConfig, FitPath, PreparedData};
use crate::par::Execution;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Grids {
    pub lookbacks: Vec<usize>,
    pub gamma_uppers: Vec<f64>,
    pub gamma_lowers: Vec<f64>,
}

impl Default for Grids {
    fn default() -> Self {
        Grids {
            lookbacks: vec![20, 40, 60, 125, 250],
            gamma_uppers: vec![2.0, 2.5, 3.0],
            gamma_lowers: vec![-0.5, -1.0, -1.5, -2.0, -2.5, -3.0],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Stage {
    Lookback,
    GammaUpper,
    GammaLower,
}

impl Stage {
    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Lookback => "lookback",
            Stage::GammaUpper => "gamma_upper",
            Stage::GammaLower => "gamma_lower",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridCell {
    pub candidate: f64,
    pub delta: Option<DeltaMetrics>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageReport {
    pub stage: Stage,
    pub cells: Vec<GridCell>,
    pub selected: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridSearchReport {
    pub stages: Vec<StageReport>,
    pub lookback: usize,
    pub gamma_upper: f64,
    pub gamma_lower: f64,
    /// Every cell is scored from this date.
    pub eval_start: NaiveDate,
    /// Metrics of the finally selected configuration.
    pub selected: Summary,
}

const TIE: f64 = 1e-12;

/// Highest ΔSortino; near-ties go to the lower turnover, then to the earlier
/// candidate.
fn select(cells: &[GridCell]) -> Option<usize> {
    let mut best: Option<(usize, DeltaMetrics)> = None;
    for (i, c) in cells.iter().enumerate() {
        let Some(d) = c.delta else { continue };
        if d.sortino.is_nan() {
            continue;
        }
        best = match best {
            None => Some((i, d)),
            Some((j, b)) => {
                let better = d.sortino > b.sortino + TIE
                    || ((d.sortino - b.sortino).abs() <= TIE && d.annual_turnover < b.annual_turnover - TIE);
                if better {
                    Some((i, d))
                } else {
                    Some((j, b))
                }
            }
        };
    }
    best.map(|(i, _)| i)
}

fn cell(candidate: f64, r: Result<Summary>) -> GridCell {
    match r {
        Ok(s) => GridCell {
            candidate,
            delta: Some(s.delta),
            error: None,
        },
        Err(e) => GridCell {
            candidate,
            delta: None,
            error: Some(e.to_string()),
        },
    }
}

fn common_start(data: &PreparedData, base: &BacktestConfig, lookbacks: &[usize]) -> Result<NaiveDate> {
    if let Some(d) = base.eval_start {
        return Ok(d);
    }
    let idx = lookbacks
        .iter()
        .map(|&l| BacktestConfig { lookback: l, ..base.clone() }.warmup())
        .max()
        .unwrap_or(0)
        .max(1);
    data.dates
        .get(idx)
        .copied()
        .ok_or_else(|| Error::InsufficientHistory(format!("grid warm-up of {idx} days exceeds the data")))
}

fn run_cell(data: &PreparedData, cfg: &BacktestConfig, path: &Result<FitPath>) -> Result<Summary> {
    match path {
        Ok(p) => simulate(data, cfg, p).map(|r| r.summary),
        Err(e) => Err(Error::InvalidInput(e.to_string())),
    }
}

/// Three sequential stages: lookback at the base thresholds, then the entry
/// threshold, then the exit threshold, each holding earlier choices fixed.
pub fn grid_search(
    data: &PreparedData,
    base: &BacktestConfig,
    grids: &Grids,
    exec: Execution,
) -> Result<GridSearchReport> {
    if grids.lookbacks.is_empty() || grids.gamma_uppers.is_empty() || grids.gamma_lowers.is_empty() {
        return Err(Error::InvalidInput("every grid needs at least one candidate".into()));
    }
    let eval_start = common_start(data, base, &grids.lookbacks)?;
    let base = BacktestConfig {
        eval_start: Some(eval_start),
        ..base.clone()
    };

    let paths: Vec<(BacktestConfig, Result<FitPath>)> = exec.map(&grids.lookbacks, |&l| {
        let cfg = BacktestConfig { lookback: l, ..base.clone() };
        // Fits inside one cell run sequentially; the cells are the parallel unit.
        let p = fit_path(data, &cfg, Execution::Sequential);
        (cfg, p)
    });
    let cells: Vec<GridCell> = exec.map(&paths, |(cfg, p)| cell(cfg.lookback as f64, run_cell(data, cfg, p)));
    let li = select(&cells).ok_or_else(|| Error::Degenerate("every lookback cell failed".into()))?;
    let (mut chosen, path) = paths.into_iter().nth(li).expect("selected index in range");
    let path = path?;
    let mut stages = vec![StageReport {
        stage: Stage::Lookback,
        selected: chosen.lookback as f64,
        cells,
    }];

    let cells = exec.map(&grids.gamma_uppers, |&g| {
        let cfg = BacktestConfig { gamma_upper: g, ..chosen.clone() };
        cell(g, simulate(data, &cfg, &path).map(|r| r.summary))
    });
    let ui = select(&cells).ok_or_else(|| Error::Degenerate("every entry-threshold cell failed".into()))?;
    chosen.gamma_upper = grids.gamma_uppers[ui];
    stages.push(StageReport {
        stage: Stage::GammaUpper,
        selected: chosen.gamma_upper,
        cells,
    });

    let cells = exec.map(&grids.gamma_lowers, |&g| {
        let cfg = BacktestConfig { gamma_lower: g, ..chosen.clone() };
        cell(g, simulate(data, &cfg, &path).map(|r| r.summary))
    });
    let wi = select(&cells).ok_or_else(|| Error::Degenerate("every exit-threshold cell failed".into()))?;
    chosen.gamma_lower = grids.gamma_lowers[wi];
    stages.push(StageReport {
        stage: Stage::GammaLower,
        selected: chosen.gamma_lower,
        cells,
    });

    let selected = simulate(data, &chosen, &path)?.summary;
    Ok(GridSearchReport {
        stages,
        lookback: chosen.lookback,
        gamma_upper: chosen.gamma_upper,
        gamma_lower: chosen.gamma_lower,
        eval_start,
        selected,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FullGridCell {
    pub lookback: usize,
    pub gamma_upper: f64,
    pub gamma_lower: f64,
    pub delta: Option<DeltaMetrics>,
    pub error: Option<String>,
}

/// Every lookback × entry × exit combination, scored from a common date.
pub fn full_grid(
    data: &PreparedData,
    base: &BacktestConfig,
    grids: &Grids,
    exec: Execution,
) -> Result<Vec<FullGridCell>> {
    let eval_start = common_start(data, base, &grids.lookbacks)?;
    let base = BacktestConfig {
        eval_start: Some(eval_start),
        ..base.clone()
    };
    let paths: Vec<Result<FitPath>> = exec.map(&grids.lookbacks, |&l| {
        fit_path(data, &BacktestConfig { lookback: l, ..base.clone() }, Execution::Sequential)
    });
    let mut jobs = Vec::new();
    for (li, &l) in grids.lookbacks.iter().enumerate() {
        for &u in &grids.gamma_uppers {
            for &w in &grids.gamma_lowers {
                jobs.push((li, l, u, w));
            }
        }
    }
    Ok(exec.map(&jobs, |&(li, l, u, w)| {
        let cfg = BacktestConfig {
            lookback: l,
            gamma_upper: u,
            gamma_lower: w,
            ..base.clone()
        };
        let c = cell(0.0, run_cell(data, &cfg, &paths[li]));
        FullGridCell {
            lookback: l,
            gamma_upper: u,
            gamma_lower: w,
            delta: c.delta,
            error: c.error,
        }
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LagRow {
    pub lag: i64,
    pub summary: Summary,
    pub warnings: Vec<String>,
}

/// Re-run `cfg` with execution shifted by each lag. Model fits are shared.
pub fn lag_analysis(data: &PreparedData, cfg: &BacktestConfig, lags: &[i64], exec: Execution) -> Result<Vec<LagRow>> {
    let path = fit_path(data, cfg, exec)?;
    exec.map(lags, |&lag| {
        let c = BacktestConfig { lag, ..cfg.clone() };
        let r = simulate(data, &c, &path)?;
        Ok(LagRow {
            lag,
            summary: r.summary,
            warnings: r.warnings,
        })
    })
    .into_iter()
    .collect()
}
