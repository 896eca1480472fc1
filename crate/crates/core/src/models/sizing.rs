//! Hedge sizing: volatility-scaled caps and the first principal component
//! used to merge several hedges into one.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Limit `|w|` to `min(sigma_fund / sigma_hedge, 1)`, keeping its sign.
pub fn cap_and_scale(w: f64, sigma_fund: f64, sigma_hedge: f64) -> Result<f64> {
    if !(sigma_hedge > 0.0) {
        return Err(Error::Degenerate(format!("hedge volatility {sigma_hedge} is not positive")));
    }
    let cap = (sigma_fund / sigma_hedge).min(1.0);
    Ok(w.signum() * w.abs().min(cap))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaHedge {
    /// Unit-norm first eigenvector of the hedge return covariance, signed so
    /// the loadings sum to a positive number.
    pub loadings: Vec<f64>,
    /// Loadings rescaled to sum to one; the split of a combined hedge weight
    /// across instruments.
    pub shares: Vec<f64>,
    pub explained_variance: f64,
}

/// First principal component of the columns of `returns`.
pub fn pca_first_component(returns: &DMatrix<f64>) -> Result<PcaHedge> {
    let (n, k) = returns.shape();
    if k < 2 {
        return Err(Error::InvalidInput("PCA hedge needs at least two instruments".into()));
    }
    if n < 20 {
        return Err(Error::InsufficientHistory(format!("PCA window of {n} rows, need 20")));
    }
    let mut c = returns.clone();
    for j in 0..k {
        let mu = returns.column(j).mean();
        c.column_mut(j).add_scalar_mut(-mu);
    }
    let cov = c.transpose() * &c / (n as f64 - 1.0);
    if cov.iter().all(|v| *v == 0.0) {
        return Err(Error::Degenerate("hedge returns have zero covariance".into()));
    }
    let eig = SymmetricEigen::new(cov);
    let i = eig.eigenvalues.imax();
    let mut v: Vec<f64> = eig.eigenvectors.column(i).iter().copied().collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
    let sum: f64 = v.iter().sum();
    if sum < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    let sum = sum.abs();
    if sum < 1e-12 {
        return Err(Error::Degenerate("first principal component loadings sum to zero".into()));
    }
    let total: f64 = eig.eigenvalues.iter().sum();
    Ok(PcaHedge {
        shares: v.iter().map(|x| x / sum).collect(),
        loadings: v,
        explained_variance: eig.eigenvalues[i] / total,
    })
}
