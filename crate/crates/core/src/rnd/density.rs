//! Risk-neutral distributions from call prices by finite differences.

use std::io::Write;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::pricing::bs_call;
use super::spline::VolCurve;
use crate::{Error, Result};

/// Uniform strike grid in currency units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrikeGrid {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl StrikeGrid {
    /// 50%–150% of spot in steps of 0.5% of spot.
    pub fn around_spot(spot: f64) -> Self {
        StrikeGrid {
            lo: 0.5 * spot,
            hi: 1.5 * spot,
            step: 0.005 * spot,
        }
    }

    pub fn strikes(&self) -> Result<Vec<f64>> {
        if !(self.lo > 0.0 && self.hi > self.lo && self.step > 0.0) {
            return Err(Error::InvalidInput(format!(
                "bad strike grid lo={} hi={} step={}",
                self.lo, self.hi, self.step
            )));
        }
        let n = ((self.hi - self.lo) / self.step + 1e-9).floor() as usize + 1;
        if n < 10 {
            return Err(Error::InvalidInput(format!("strike grid has {n} points, need at least 10")));
        }
        Ok((0..n).map(|i| self.lo + i as f64 * self.step).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskNeutralDistribution {
    pub date: NaiveDate,
    pub spot: f64,
    pub tenor: f64,
    pub r: f64,
    pub q: f64,
    pub step: f64,
    pub strikes: Vec<f64>,
    /// Sanitized: non-decreasing and within [0, 1].
    pub cdf: Vec<f64>,
    /// Difference quotient of the sanitized cdf; never negative.
    pub pdf: Vec<f64>,
    /// Finite-difference estimates before sanitization.
    pub raw_cdf: Vec<f64>,
    pub raw_pdf: Vec<f64>,
}

impl RiskNeutralDistribution {
    /// Piecewise-linear cdf in strike space, flat beyond the grid.
    pub fn cdf_at(&self, strike: f64) -> f64 {
        interp(&self.strikes, &self.cdf, strike)
    }

    /// Strike of the first grid crossing of `p`, linearly interpolated.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        let (x, f) = (&self.strikes, &self.cdf);
        if p < f[0] || p > f[f.len() - 1] {
            return Err(Error::InvalidInput(format!(
                "probability {p} outside the distribution's cdf range [{}, {}] on {}",
                f[0],
                f[f.len() - 1],
                self.date
            )));
        }
        let i = f.partition_point(|&v| v < p);
        if i == 0 || f[i] == f[i - 1] {
            return Ok(x[i]);
        }
        let w = (p - f[i - 1]) / (f[i] - f[i - 1]);
        Ok(x[i - 1] + w * (x[i] - x[i - 1]))
    }

    /// `strike,cdf,pdf` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let wrap = |e: csv::Error| Error::InvalidInput(format!("writing distribution dump: {e}"));
        w.write_record(["strike", "cdf", "pdf"]).map_err(wrap)?;
        for ((x, c), p) in self.strikes.iter().zip(&self.cdf).zip(&self.pdf) {
            w.write_record([x.to_string(), c.to_string(), p.to_string()]).map_err(wrap)?;
        }
        w.flush().map_err(|e| Error::InvalidInput(format!("writing distribution dump: {e}")))
    }
}

pub(crate) fn interp(x: &[f64], y: &[f64], at: f64) -> f64 {
    let n = x.len();
    if at <= x[0] {
        return y[0];
    }
    if at >= x[n - 1] {
        return y[n - 1];
    }
    let i = x.partition_point(|&v| v <= at) - 1;
    let w = (at - x[i]) / (x[i + 1] - x[i]);
    y[i] + w * (y[i + 1] - y[i])
}

/// Running maximum then clipping to [0, 1].
pub fn sanitize_cdf(raw: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(raw.len());
    let mut run = f64::NEG_INFINITY;
    for &v in raw {
        let v = if v.is_nan() { run } else { v };
        run = run.max(v);
        out.push(run.clamp(0.0, 1.0));
    }
    out
}

/// Density from a sanitized cdf: centred differences inside, one-sided at
/// the ends. Non-negative because the cdf is non-decreasing.
pub fn pdf_from_cdf(cdf: &[f64], step: f64) -> Vec<f64> {
    let n = cdf.len();
    (0..n)
        .map(|k| match k {
            0 => (cdf[1] - cdf[0]) / step,
            k if k == n - 1 => (cdf[n - 1] - cdf[n - 2]) / step,
            k => (cdf[k + 1] - cdf[k - 1]) / (2.0 * step),
        })
        .collect()
}

pub fn extract_distribution(
    curve: &VolCurve,
    spot: f64,
    r: f64,
    q: f64,
    grid: StrikeGrid,
) -> Result<RiskNeutralDistribution> {
    if !(spot > 0.0) {
        return Err(Error::InvalidInput(format!("spot {spot} must be positive")));
    }
    let strikes = grid.strikes()?;
    let dx = grid.step;
    let tau = curve.tenor;
    let call = |x: f64| bs_call(spot, x, tau, r, q, curve.vol(100.0 * x / spot));
    // Derivatives are taken on a stencil of half the grid spacing; output
    // stays on the grid.
    let h = 0.5 * dx;
    let g = (r * tau).exp();
    let n = strikes.len();

    let mut raw_cdf = Vec::with_capacity(n);
    let mut raw_pdf = Vec::with_capacity(n);
    for (k, &x) in strikes.iter().enumerate() {
        let c = |j: i32| call(x + j as f64 * h);
        let (d1, d2) = if k == 0 {
            (
                (-3.0 * c(0) + 4.0 * c(1) - c(2)) / (2.0 * h),
                (2.0 * c(0) - 5.0 * c(1) + 4.0 * c(2) - c(3)) / (h * h),
            )
        } else if k == n - 1 {
            (
                (3.0 * c(0) - 4.0 * c(-1) + c(-2)) / (2.0 * h),
                (2.0 * c(0) - 5.0 * c(-1) + 4.0 * c(-2) - c(-3)) / (h * h),
            )
        } else {
            (
                (c(1) - c(-1)) / (2.0 * h),
                (c(1) - 2.0 * c(0) + c(-1)) / (h * h),
            )
        };
        raw_cdf.push(1.0 + g * d1);
        raw_pdf.push(g * d2);
    }
    let cdf = sanitize_cdf(&raw_cdf);
    let pdf = pdf_from_cdf(&cdf, dx);
    Ok(RiskNeutralDistribution {
        date: curve.date,
        spot,
        tenor: tau,
        r,
        q,
        step: dx,
        strikes,
        cdf,
        pdf,
        raw_cdf,
        raw_pdf,
    })
}
