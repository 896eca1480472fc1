//! Per-date model fits. Each fit at close `t` reads only rows up to `t`, so
//! dates are independent and can be evaluated in parallel.

use nalgebra::DMatrix;

use super::{BacktestConfig, PreparedData};
use crate::models::{cap_and_scale, cca_fit, ols_fit, ols_hedge_beta, ols_indicator, pca_first_component, ModelKind};
use crate::par::Execution;
use crate::stats::sample_std;
use crate::{Error, Result};

const MIN_VOL_OBS: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Fit {
    Cca {
        corr: f64,
        forecast: f64,
        zscore: f64,
        w_star: f64,
        w_capped: f64,
        /// Split of the combined weight across hedges.
        shares: Vec<f64>,
    },
    Ols {
        forecast: Vec<f64>,
        p_value: Vec<f64>,
        adj_r2: Vec<f64>,
        indicator: Vec<bool>,
        w_raw: Vec<f64>,
        w_capped: Vec<f64>,
    },
}

/// Annualized sample volatility over the trailing `window` finite values
/// ending at `t`.
pub(crate) fn trailing_vol(series: &[f64], t: usize, window: usize) -> Option<f64> {
    let lo = (t + 1).saturating_sub(window);
    let xs: Vec<f64> = series[lo..=t].iter().copied().filter(|v| v.is_finite()).collect();
    if xs.len() < MIN_VOL_OBS {
        return None;
    }
    Some(sample_std(&xs) * 252f64.sqrt())
}

/// Soft failures: the day is skipped and the hedge state left alone.
fn is_skippable(e: &Error) -> bool {
    matches!(
        e,
        Error::DegenerateDirection(_) | Error::RankDeficient(_) | Error::Degenerate(_)
    )
}

struct Window<'a> {
    x: DMatrix<f64>,
    today: Vec<f64>,
    rows: std::ops::Range<usize>,
    data: &'a PreparedData,
}

fn window<'a>(data: &'a PreparedData, cols: &[&[f64]], t: usize, lookback: usize) -> Option<Window<'a>> {
    if t < lookback {
        return None;
    }
    let rows = t - lookback..t;
    // Signals at s pair with returns at s + 1, so returns run through t.
    let finite = rows.clone().all(|s| {
        cols.iter().all(|c| c[s].is_finite())
            && data.fund_neutral[s + 1].is_finite()
            && data.hedges.iter().all(|h| h.neutral[s + 1].is_finite())
    }) && cols.iter().all(|c| c[t].is_finite());
    if !finite {
        return None;
    }
    let x = DMatrix::from_fn(lookback, cols.len(), |i, j| cols[j][rows.start + i]);
    let today = cols.iter().map(|c| c[t]).collect();
    Some(Window { x, today, rows, data })
}

fn fit_cca(w: &Window, cfg: &BacktestConfig, t: usize) -> Result<Fit> {
    let data = w.data;
    let n = w.rows.len();
    let shares = if data.hedges.len() == 1 {
        vec![1.0]
    } else {
        let h = DMatrix::from_fn(n, data.hedges.len(), |i, j| data.hedges[j].neutral[w.rows.start + i + 1]);
        pca_first_component(&h)?.shares
    };
    // Only the rows the fit and the volatility cap read.
    let lo = w.rows.start.min((t + 1).saturating_sub(cfg.vol_window));
    let combined: Vec<f64> = if data.hedges.len() == 1 {
        data.hedges[0].neutral[..=t].to_vec()
    } else {
        (0..=t)
            .map(|s| {
                if s < lo {
                    f64::NAN
                } else {
                    data.hedges.iter().zip(&shares).map(|(h, k)| k * h.neutral[s]).sum()
                }
            })
            .collect()
    };
    let y = DMatrix::from_fn(n, 2, |i, j| {
        let s = w.rows.start + i + 1;
        if j == 0 {
            data.fund_neutral[s]
        } else {
            combined[s]
        }
    });
    let fit = cca_fit(&w.x, &y, &w.today)?;
    let (Some(sf), Some(sh)) = (
        trailing_vol(&data.fund_neutral, t, cfg.vol_window),
        trailing_vol(&combined, t, cfg.vol_window),
    ) else {
        return Err(Error::Degenerate("not enough history for the volatility cap".into()));
    };
    Ok(Fit::Cca {
        corr: fit.achieved_corr,
        forecast: fit.forecast,
        zscore: fit.zscore,
        w_star: fit.w_star,
        w_capped: cap_and_scale(fit.w_star, sf, sh)?,
        shares,
    })
}

fn fit_ols(w: &Window, cfg: &BacktestConfig, t: usize) -> Result<Fit> {
    let data = w.data;
    let k = data.hedges.len();
    let mut out = (vec![], vec![], vec![], vec![], vec![], vec![]);
    let beta_window = cfg.lookback.max(30);
    if t + 1 < beta_window + 1 {
        return Err(Error::Degenerate("not enough history for the hedge beta".into()));
    }
    let beta_rows = t + 1 - beta_window..t + 1;
    for h in &data.hedges {
        let y: Vec<f64> = w.rows.clone().map(|s| h.neutral[s + 1]).collect();
        let fit = ols_fit(&w.x, &y, &w.today)?;
        let ind = ols_indicator(&fit, cfg.gamma_ols);
        let f: Vec<f64> = beta_rows.clone().map(|s| data.fund_neutral[s]).collect();
        let hh: Vec<f64> = beta_rows.clone().map(|s| h.neutral[s]).collect();
        if f.iter().chain(&hh).any(|v| !v.is_finite()) {
            return Err(Error::Degenerate("gap in hedge beta window".into()));
        }
        let beta = ols_hedge_beta(&f, &hh)?;
        let w_raw = -beta * f64::from(u8::from(ind));
        let (Some(sf), Some(sh)) = (
            trailing_vol(&data.fund_neutral, t, cfg.vol_window),
            trailing_vol(&h.neutral, t, cfg.vol_window),
        ) else {
            return Err(Error::Degenerate("not enough history for the volatility cap".into()));
        };
        out.0.push(fit.forecast);
        out.1.push(fit.f_stat_p);
        out.2.push(fit.adjusted_r_squared);
        out.3.push(ind);
        out.4.push(w_raw);
        out.5.push(cap_and_scale(w_raw, sf, sh)?);
    }
    debug_assert_eq!(out.0.len(), k);
    Ok(Fit::Ols {
        forecast: out.0,
        p_value: out.1,
        adj_r2: out.2,
        indicator: out.3,
        w_raw: out.4,
        w_capped: out.5,
    })
}

/// Fits for every close from `start`; `None` where no fit is possible.
pub(crate) fn fit_all(
    data: &PreparedData,
    cfg: &BacktestConfig,
    start: usize,
    exec: Execution,
) -> Result<Vec<Option<Fit>>> {
    let cols = data.signal_columns(&cfg.signals)?;
    let n = data.len();
    let fits = exec.map_range(n.saturating_sub(start), |i| {
        let t = start + i;
        let Some(w) = window(data, &cols, t, cfg.lookback) else {
            return Ok(None);
        };
        let r = match cfg.model {
            ModelKind::Cca => fit_cca(&w, cfg, t),
            ModelKind::TwoStepOls => fit_ols(&w, cfg, t),
        };
        match r {
            Ok(f) => Ok(Some(f)),
            Err(e) if is_skippable(&e) => Ok(None),
            Err(e) => Err(e.at(data.dates[t])),
        }
    });
    fits.into_iter().collect()
}
