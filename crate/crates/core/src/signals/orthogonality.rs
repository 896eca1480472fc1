//! Pairwise correlations and equation-by-equation VAR(0) regressions of
//! each signal on the other two.

use chrono::NaiveDate;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::SignalSeries;
use crate::stats::{ols, pearson, sample_std};
use crate::{Error, Result};

const MIN_OBS: usize = 31;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarEquation {
    pub response: String,
    pub regressors: [String; 2],
    /// `None` when the two regressors are exactly collinear.
    pub intercept: Option<f64>,
    pub slopes: Option<[f64; 2]>,
    pub adjusted_r_squared: Option<f64>,
    #[serde(skip)]
    pub residuals: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrthogonalityReport {
    pub names: Vec<String>,
    pub observations: usize,
    pub start: NaiveDate,
    pub end: NaiveDate,
    /// Row-major Pearson matrix over `names`.
    pub correlation: Vec<Vec<f64>>,
    pub equations: Vec<VarEquation>,
}

/// Correlations over the fund's neutral returns and the three signals, and
/// the three VAR(0) equations, on the dates where every series is defined.
pub fn orthogonality_report(
    signals: [&SignalSeries; 3],
    fund_dates: &[NaiveDate],
    fund_neutral: &[f64],
) -> Result<OrthogonalityReport> {
    let mut dates = Vec::new();
    let mut cols: [Vec<f64>; 4] = Default::default();
    let aligned: Vec<Vec<f64>> = signals.iter().map(|s| s.aligned(fund_dates)).collect();
    for (i, &d) in fund_dates.iter().enumerate() {
        let row = [fund_neutral[i], aligned[0][i], aligned[1][i], aligned[2][i]];
        if row.iter().all(|v| v.is_finite()) {
            dates.push(d);
            for (c, v) in cols.iter_mut().zip(row) {
                c.push(v);
            }
        }
    }
    if dates.len() < MIN_OBS {
        return Err(Error::InsufficientHistory(format!(
            "orthogonality report needs more than 30 common observations, have {}",
            dates.len()
        )));
    }
    let mut names = vec!["fund".to_string()];
    names.extend(signals.iter().map(|s| s.name.to_string()));
    for (c, n) in cols.iter().zip(&names) {
        if sample_std(c) == 0.0 {
            return Err(Error::Degenerate(format!("series `{n}` is constant; correlation undefined")));
        }
    }
    let mut correlation = vec![vec![1.0; 4]; 4];
    for i in 0..4 {
        for j in i + 1..4 {
            let r = pearson(&cols[i], &cols[j])
                .ok_or_else(|| Error::Degenerate(format!("correlation of {} and {}", names[i], names[j])))?;
            correlation[i][j] = r;
            correlation[j][i] = r;
        }
    }

    let mut equations = Vec::with_capacity(3);
    for resp in 1..4 {
        let regs: Vec<usize> = (1..4).filter(|&j| j != resp).collect();
        let x = DMatrix::from_fn(dates.len(), 2, |i, j| cols[regs[j]][i]);
        let regressors = [names[regs[0]].clone(), names[regs[1]].clone()];
        match ols(&x, &cols[resp]) {
            Ok(fit) => equations.push(VarEquation {
                response: names[resp].clone(),
                regressors,
                intercept: Some(fit.intercept),
                slopes: Some([fit.slopes[0], fit.slopes[1]]),
                adjusted_r_squared: Some(fit.adjusted_r_squared().min(1.0)),
                residuals: fit.residuals,
            }),
            Err(Error::RankDeficient(_)) => equations.push(VarEquation {
                response: names[resp].clone(),
                regressors,
                intercept: None,
                slopes: None,
                adjusted_r_squared: None,
                residuals: Vec::new(),
            }),
            Err(e) => return Err(e),
        }
    }
    Ok(OrthogonalityReport {
        names,
        observations: dates.len(),
        start: dates[0],
        end: dates[dates.len() - 1],
        correlation,
        equations,
    })
}
