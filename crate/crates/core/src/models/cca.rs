//! Canonical correlation between signals and (fund, hedge) returns, and the
//! second-step regression that turns it into a timing forecast.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::stats::{mean, ols_simple, sample_std};
use crate::{Error, Result};

const EIG_TOL: f64 = 1e-12;
const DEGENERATE_FUND_WEIGHT: f64 = 1e-10;
const SD_EPS: f64 = 1e-12;

/// First canonical pair of two column sets.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalPair {
    /// Weights on the columns of X.
    pub x_weights: DVector<f64>,
    /// Weights on the columns of Y.
    pub y_weights: DVector<f64>,
    pub corr: f64,
}

fn centred(m: &DMatrix<f64>) -> DMatrix<f64> {
    let mut c = m.clone();
    for j in 0..m.ncols() {
        let mu = m.column(j).mean();
        c.column_mut(j).add_scalar_mut(-mu);
    }
    c
}

fn inverse_sqrt(cov: DMatrix<f64>, what: &str) -> Result<DMatrix<f64>> {
    let eig = SymmetricEigen::new(cov);
    let max = eig.eigenvalues.max();
    if !(max > 0.0) || eig.eigenvalues.min() <= EIG_TOL * max {
        return Err(Error::RankDeficient(format!("{what} covariance is singular")));
    }
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l.sqrt()));
    Ok(&eig.eigenvectors * d * eig.eigenvectors.transpose())
}

/// Whitened cross-covariance SVD. Weights are in the units of the input
/// columns; the pair is returned with non-negative correlation.
pub fn canonical_correlation(x: &DMatrix<f64>, y: &DMatrix<f64>) -> Result<CanonicalPair> {
    let n = x.nrows();
    if y.nrows() != n {
        return Err(Error::InvalidInput("X and Y have different row counts".into()));
    }
    if n < 2 {
        return Err(Error::InsufficientHistory("canonical correlation needs two rows".into()));
    }
    let (xc, yc) = (centred(x), centred(y));
    let scale = 1.0 / (n as f64 - 1.0);
    let kx = inverse_sqrt(xc.transpose() * &xc * scale, "signal")?;
    let ky = inverse_sqrt(yc.transpose() * &yc * scale, "response")?;
    let cxy = xc.transpose() * &yc * scale;
    let m = &kx * cxy * &ky;
    let svd = m.svd(true, true);
    let (u, vt) = (svd.u.expect("requested"), svd.v_t.expect("requested"));
    let i = svd.singular_values.imax();
    let x_weights = &kx * u.column(i);
    let y_weights = &ky * vt.row(i).transpose();
    Ok(CanonicalPair {
        x_weights,
        y_weights,
        corr: svd.singular_values[i].min(1.0),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CcaFit {
    pub n: usize,
    /// Response weights `(fund, hedge)` in return units, fund weight 1.
    pub a: Vec<f64>,
    /// Signal weights in signal units.
    pub b: Vec<f64>,
    pub achieved_corr: f64,
    /// Hedge weight per unit of fund.
    pub w_star: f64,
    pub omega: f64,
    pub beta: f64,
    #[serde(skip)]
    pub residuals: Vec<f64>,
    /// Forecast of tomorrow's hedged return from today's signals.
    pub forecast: f64,
    /// Forecast standardized against the window's fitted values.
    pub zscore: f64,
}

fn standardized(m: &DMatrix<f64>, what: &str) -> Result<(DMatrix<f64>, Vec<f64>)> {
    let mut out = m.clone();
    let mut sds = Vec::with_capacity(m.ncols());
    for j in 0..m.ncols() {
        let col: Vec<f64> = m.column(j).iter().copied().collect();
        let sd = sample_std(&col);
        if !(sd > 0.0) {
            return Err(Error::RankDeficient(format!("{what} column {j} is constant over the window")));
        }
        let mu = mean(&col);
        out.column_mut(j).apply(|v| *v = (*v - mu) / sd);
        sds.push(sd);
    }
    Ok((out, sds))
}

/// Fit on `signals` row s paired with `responses` row s (the returns of day
/// s+1), then forecast from `today`'s signals.
pub fn cca_fit(signals: &DMatrix<f64>, responses: &DMatrix<f64>, today: &[f64]) -> Result<CcaFit> {
    let n = signals.nrows();
    if n < 20 {
        return Err(Error::InsufficientHistory(format!("CCA window of {n} rows, need 20")));
    }
    if responses.ncols() != 2 {
        return Err(Error::InvalidInput(format!("CCA expects 2 response columns, got {}", responses.ncols())));
    }
    if today.len() != signals.ncols() {
        return Err(Error::InvalidInput("forecast input width differs from signal width".into()));
    }
    let (xs, sx) = standardized(signals, "signal")?;
    let (ys, sy) = standardized(responses, "response")?;
    let pair = canonical_correlation(&xs, &ys)?;

    let norm = pair.y_weights.norm();
    let fund_unit = pair.y_weights[0] / norm;
    if fund_unit.abs() < DEGENERATE_FUND_WEIGHT {
        return Err(Error::DegenerateDirection(fund_unit));
    }
    let sign = fund_unit.signum();
    let a_raw: Vec<f64> = (0..2).map(|j| sign * pair.y_weights[j] / sy[j]).collect();
    let b: Vec<f64> = (0..signals.ncols()).map(|j| sign * pair.x_weights[j] / sx[j]).collect();
    let w_star = a_raw[1] / a_raw[0];

    let hedged: Vec<f64> = (0..n).map(|i| responses[(i, 0)] + w_star * responses[(i, 1)]).collect();
    let joint: Vec<f64> = (0..n)
        .map(|i| (0..b.len()).map(|j| b[j] * signals[(i, j)]).sum())
        .collect();
    let second = ols_simple(&joint, &hedged)?;
    let (omega, beta) = (second.intercept, second.slopes[0]);
    let fitted: Vec<f64> = joint.iter().map(|s| omega + beta * s).collect();
    let today_joint: f64 = b.iter().zip(today).map(|(w, x)| w * x).sum();
    let forecast = omega + beta * today_joint;
    let sd = sample_std(&fitted);
    let zscore = if sd < SD_EPS { 0.0 } else { (forecast - mean(&fitted)) / sd };

    Ok(CcaFit {
        n,
        a: vec![1.0, w_star],
        b,
        achieved_corr: pair.corr,
        w_star,
        omega,
        beta,
        residuals: second.residuals,
        forecast,
        zscore,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::pearson;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn randm(rng: &mut ChaCha8Rng, n: usize, k: usize) -> DMatrix<f64> {
        DMatrix::from_fn(n, k, |_, _| StandardNormal.sample(rng))
    }

    #[test]
    fn exact_linear_map_has_unit_correlation() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let x = randm(&mut rng, 50, 3);
        let mut y = randm(&mut rng, 50, 2);
        for i in 0..50 {
            y[(i, 1)] = 0.3 * x[(i, 0)] - 2.0 * x[(i, 2)] + 1.0;
        }
        let p = canonical_correlation(&x, &y).unwrap();
        assert!((p.corr - 1.0).abs() < 1e-10);
    }

    #[test]
    fn one_dimensional_case_is_pearson() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = randm(&mut rng, 60, 1);
        let y = randm(&mut rng, 60, 1);
        let p = canonical_correlation(&x, &y).unwrap();
        let r = pearson(x.as_slice(), y.as_slice()).unwrap();
        assert!((p.corr - r.abs()).abs() < 1e-12);
    }

    #[test]
    fn fit_is_scale_invariant_and_signs_fund_positive() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let x = randm(&mut rng, 80, 3);
        let mut y = randm(&mut rng, 80, 2);
        for i in 0..80 {
            y[(i, 0)] += 0.5 * x[(i, 1)];
            y[(i, 1)] += 0.9 * x[(i, 1)];
        }
        let today = [0.1, 0.2, -0.3];
        let f = cca_fit(&x, &y, &today).unwrap();
        assert_eq!(f.a[0], 1.0);
        let mut x2 = x.clone();
        x2.column_mut(2).scale_mut(1000.0);
        let today2 = [0.1, 0.2, -300.0];
        let g = cca_fit(&x2, &y, &today2).unwrap();
        assert!((f.achieved_corr - g.achieved_corr).abs() < 1e-10);
        assert!((f.w_star - g.w_star).abs() < 1e-8);
        assert!((f.zscore - g.zscore).abs() < 1e-8);
        // Achieved correlation equals the correlation of the two variates.
        let xa: Vec<f64> = (0..80).map(|i| (0..3).map(|j| f.b[j] * x[(i, j)]).sum()).collect();
        let yb: Vec<f64> = (0..80).map(|i| y[(i, 0)] + f.w_star * y[(i, 1)]).collect();
        assert!((pearson(&xa, &yb).unwrap() - f.achieved_corr).abs() < 1e-10);
    }

    #[test]
    fn hedge_only_direction_is_degenerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let x = randm(&mut rng, 40, 3);
        let mut y = randm(&mut rng, 40, 2);
        // The hedge column is an exact function of the signals while the fund
        // is independent noise: the best direction puts no weight on the fund.
        for i in 0..40 {
            y[(i, 1)] = x[(i, 0)] + x[(i, 1)];
        }
        match cca_fit(&x, &y, &[0.0; 3]) {
            Err(Error::DegenerateDirection(w)) => assert!(w.abs() < 1e-10),
            Ok(f) => panic!("expected degenerate direction, got fund weight with w* {}", f.w_star),
            Err(e) => panic!("{e}"),
        }
    }
}
