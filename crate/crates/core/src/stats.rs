//! Small statistical kernels shared across modules.

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (n - 1 denominator).
pub fn sample_std(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return f64::NAN;
    }
    let m = mean(xs);
    let ss: f64 = xs.iter().map(|x| (x - m) * (x - m)).sum();
    (ss / (n as f64 - 1.0)).sqrt()
}

/// Pearson correlation. `None` when either series has zero variance.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Option<f64> {
    assert_eq!(xs.len(), ys.len());
    let mx = mean(xs);
    let my = mean(ys);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let dx = x - mx;
        let dy = y - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Result of an ordinary least squares fit with an intercept.
#[derive(Debug, Clone)]
pub struct LinearFit {
    pub intercept: f64,
    pub slopes: Vec<f64>,
    pub residuals: Vec<f64>,
    pub rss: f64,
    pub tss: f64,
    pub n: usize,
}

impl LinearFit {
    pub fn r_squared(&self) -> f64 {
        if self.tss <= 0.0 {
            return if self.rss <= 0.0 { 1.0 } else { 0.0 };
        }
        1.0 - self.rss / self.tss
    }

    pub fn adjusted_r_squared(&self) -> f64 {
        let k = self.slopes.len() as f64;
        let n = self.n as f64;
        1.0 - (1.0 - self.r_squared()) * (n - 1.0) / (n - k - 1.0)
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        self.intercept + self.slopes.iter().zip(x).map(|(b, v)| b * v).sum::<f64>()
    }
}

const RANK_TOL: f64 = 1e-10;

/// OLS of `y` on the columns of `x` plus an intercept.
///
/// Regressors are centred and scaled before solving, so a constant column or
/// an exactly collinear set surfaces as [`Error::RankDeficient`] regardless of
/// the columns' units.
pub fn ols(x: &DMatrix<f64>, y: &[f64]) -> Result<LinearFit> {
    let n = x.nrows();
    let k = x.ncols();
    if y.len() != n {
        return Err(Error::InvalidInput(format!(
            "regression with {n} design rows but {} responses",
            y.len()
        )));
    }
    if n < k + 2 {
        return Err(Error::InsufficientHistory(format!(
            "{n} observations for {k} regressors"
        )));
    }
    let y_mean = mean(y);
    let mut means = vec![0.0; k];
    let mut scales = vec![0.0; k];
    let mut z = DMatrix::<f64>::zeros(n, k);
    for j in 0..k {
        let col = x.column(j);
        let m = col.mean();
        let ss: f64 = col.iter().map(|v| (v - m) * (v - m)).sum();
        if ss <= 0.0 || !ss.is_finite() {
            return Err(Error::RankDeficient(format!("regressor {j} is constant")));
        }
        let s = ss.sqrt();
        means[j] = m;
        scales[j] = s;
        for i in 0..n {
            z[(i, j)] = (x[(i, j)] - m) / s;
        }
    }
    let yc = DVector::from_iterator(n, y.iter().map(|v| v - y_mean));

    let svd = z.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if smin <= RANK_TOL * smax {
        return Err(Error::RankDeficient(format!(
            "condition number {:.3e} over {k} regressors",
            smax / smin.max(f64::MIN_POSITIVE)
        )));
    }
    let beta_z = svd
        .solve(&yc, 0.0)
        .map_err(|e| Error::RankDeficient(e.to_string()))?;

    let slopes: Vec<f64> = (0..k).map(|j| beta_z[j] / scales[j]).collect();
    let intercept = y_mean - slopes.iter().zip(&means).map(|(b, m)| b * m).sum::<f64>();

    let mut residuals = Vec::with_capacity(n);
    let mut rss = 0.0;
    let mut tss = 0.0;
    for i in 0..n {
        let fitted = intercept + (0..k).map(|j| slopes[j] * x[(i, j)]).sum::<f64>();
        let e = y[i] - fitted;
        residuals.push(e);
        rss += e * e;
        tss += (y[i] - y_mean) * (y[i] - y_mean);
    }
    Ok(LinearFit {
        intercept,
        slopes,
        residuals,
        rss,
        tss,
        n,
    })
}

/// Simple regression of `y` on a single regressor.
pub fn ols_simple(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    let m = DMatrix::from_column_slice(x.len(), 1, x);
    ols(&m, y)
}
