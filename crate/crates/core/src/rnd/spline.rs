//! Clamped cubic splines over implied-vol smiles.

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::marketdata::VolSmile;
use crate::{Error, Result};

/// Absolute vol difference below which neighbouring quotes count as flat.
pub const FLAT_TOLERANCE: f64 = 1e-6;

/// A smile fitted with zero slope at both clamp points and held constant
/// beyond them. Moneyness is in percent of spot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolCurve {
    pub date: NaiveDate,
    pub tenor: f64,
    pub knots: Vec<f64>,
    pub values: Vec<f64>,
    /// Second derivatives at the knots.
    pub second: Vec<f64>,
    pub clamp_lo: f64,
    pub clamp_hi: f64,
    floor: f64,
}

impl VolCurve {
    pub fn vol(&self, moneyness: f64) -> f64 {
        let k = &self.knots;
        let n = k.len();
        if n == 1 || moneyness <= k[0] {
            return self.values[0];
        }
        if moneyness >= k[n - 1] {
            return self.values[n - 1];
        }
        let i = k.partition_point(|&x| x <= moneyness) - 1;
        let (x0, x1) = (k[i], k[i + 1]);
        let h = x1 - x0;
        let (a, b) = (x1 - moneyness, moneyness - x0);
        let (m0, m1) = (self.second[i], self.second[i + 1]);
        let v = m0 * a * a * a / (6.0 * h)
            + m1 * b * b * b / (6.0 * h)
            + (self.values[i] / h - m0 * h / 6.0) * a
            + (self.values[i + 1] / h - m1 * h / 6.0) * b;
        v.max(self.floor)
    }

    /// First derivative inside the clamped span, zero outside.
    pub fn slope(&self, moneyness: f64) -> f64 {
        let k = &self.knots;
        let n = k.len();
        if n == 1 || moneyness < k[0] || moneyness > k[n - 1] {
            return 0.0;
        }
        let i = (k.partition_point(|&x| x <= moneyness) - 1).min(n - 2);
        let h = k[i + 1] - k[i];
        let (a, b) = (k[i + 1] - moneyness, moneyness - k[i]);
        let (m0, m1) = (self.second[i], self.second[i + 1]);
        -m0 * a * a / (2.0 * h) + m1 * b * b / (2.0 * h) + (self.values[i + 1] - self.values[i]) / h
            - (m1 - m0) * h / 6.0
    }
}

/// Locate clamp points: scanning inward from each end, the clamp sits where
/// consecutive quotes stop being equal within [`FLAT_TOLERANCE`].
pub fn detect_clamps(moneyness: &[f64], vols: &[f64]) -> (usize, usize) {
    let n = vols.len();
    let mut lo = 0;
    while lo + 1 < n && (vols[lo + 1] - vols[lo]).abs() <= FLAT_TOLERANCE {
        lo += 1;
    }
    if lo == n - 1 {
        // Globally flat.
        return (0, n - 1);
    }
    let mut hi = n - 1;
    while hi > lo && (vols[hi] - vols[hi - 1]).abs() <= FLAT_TOLERANCE {
        hi -= 1;
    }
    debug_assert!(moneyness.len() == n);
    (lo, hi)
}

pub fn fit_vol_curve(smile: &VolSmile) -> Result<VolCurve> {
    let (m, v) = (&smile.moneyness, &smile.vols);
    if m.len() != v.len() {
        return Err(Error::InvalidInput("smile moneyness and vol lengths differ".into()));
    }
    if m.len() < 5 {
        return Err(Error::InvalidInput(format!(
            "smile for {} on {} has {} points, need at least 5",
            smile.instrument,
            smile.date,
            m.len()
        )));
    }
    if m.windows(2).any(|w| !(w[1] > w[0])) || m.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "smile moneyness grid for {} on {} is not strictly increasing",
            smile.instrument, smile.date
        )));
    }
    if v.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
        return Err(Error::InvalidInput(format!(
            "smile for {} on {} has non-positive vols",
            smile.instrument, smile.date
        )));
    }
    let (lo, hi) = detect_clamps(m, v);
    let min_vol = v.iter().copied().fold(f64::INFINITY, f64::min);
    let (knots, values) = if (0..m.len() - 1).all(|i| (v[i + 1] - v[i]).abs() <= FLAT_TOLERANCE) {
        (vec![m[0]], vec![v[0]])
    } else {
        (m[lo..=hi].to_vec(), v[lo..=hi].to_vec())
    };
    let second = clamped_second_derivatives(&knots, &values);
    let (clamp_lo, clamp_hi) = if knots.len() == 1 {
        (m[0], m[m.len() - 1])
    } else {
        (m[lo], m[hi])
    };
    Ok(VolCurve {
        date: smile.date,
        tenor: smile.tenor,
        knots,
        values,
        second,
        clamp_lo,
        clamp_hi,
        floor: 0.1 * min_vol,
    })
}

/// Second derivatives of the cubic spline through `(x, y)` with zero first
/// derivative at both ends (tridiagonal solve).
fn clamped_second_derivatives(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    if n < 2 {
        return vec![0.0; n];
    }
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let slope: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
    let mut sub = vec![0.0; n];
    let mut diag = vec![0.0; n];
    let mut sup = vec![0.0; n];
    let mut rhs = vec![0.0; n];
    diag[0] = 2.0 * h[0];
    sup[0] = h[0];
    rhs[0] = 6.0 * slope[0];
    for i in 1..n - 1 {
        sub[i] = h[i - 1];
        diag[i] = 2.0 * (h[i - 1] + h[i]);
        sup[i] = h[i];
        rhs[i] = 6.0 * (slope[i] - slope[i - 1]);
    }
    sub[n - 1] = h[n - 2];
    diag[n - 1] = 2.0 * h[n - 2];
    rhs[n - 1] = -6.0 * slope[n - 2];

    // Thomas algorithm; the system is strictly diagonally dominant.
    for i in 1..n {
        let w = sub[i] / diag[i - 1];
        diag[i] -= w * sup[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    let mut m = vec![0.0; n];
    m[n - 1] = rhs[n - 1] / diag[n - 1];
    for i in (0..n - 1).rev() {
        m[i] = (rhs[i] - sup[i] * m[i + 1]) / diag[i];
    }
    m
}
