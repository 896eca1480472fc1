//! Credit risk read off a pair of risk-neutral distributions.
//!
//! Both distributions are compared in relative-return space: a strike `x`
//! is the drawdown `x / spot - 1` of its own underlying. The treasury ETF
//! sets the drawdown level reached with probability `tail_prob`; the credit
//! ETF's extra mass and extra expected shortfall below that level are
//! attributed to credit.

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::density::RiskNeutralDistribution;
use crate::{Error, Result};

pub const DEFAULT_TAIL_PROB: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CreditRiskPoint {
    pub date: NaiveDate,
    /// Treasury ETF drawdown at `tail_prob`, as a fraction of spot.
    pub drawdown_level: f64,
    pub prob_exceeds: f64,
    pub excess_expected_drawdown: f64,
}

fn cdf_at_drawdown(d: &RiskNeutralDistribution, level: f64) -> f64 {
    d.cdf_at(d.spot * (1.0 + level))
}

/// E[(level - drawdown)^+] by the trapezoid rule on the grid.
fn expected_exceedance(d: &RiskNeutralDistribution, level: f64) -> f64 {
    let g: Vec<f64> = d
        .strikes
        .iter()
        .zip(&d.pdf)
        .map(|(&x, &p)| p * (level - (x / d.spot - 1.0)).max(0.0))
        .collect();
    g.windows(2).map(|w| 0.5 * (w[0] + w[1]) * d.step).sum()
}

pub fn credit_signals(
    credit: &RiskNeutralDistribution,
    treasury: &RiskNeutralDistribution,
    tail_prob: f64,
) -> Result<CreditRiskPoint> {
    if !(tail_prob > 0.0 && tail_prob < 0.5) {
        return Err(Error::InvalidInput(format!("tail probability {tail_prob} not in (0, 0.5)")));
    }
    if credit.date != treasury.date || credit.tenor != treasury.tenor {
        return Err(Error::InvalidInput(format!(
            "distributions differ in date or tenor ({} / {}, {} / {})",
            credit.date, treasury.date, credit.tenor, treasury.tenor
        )));
    }
    let level = treasury.quantile(tail_prob)? / treasury.spot - 1.0;
    // Written as a difference against the treasury's own cdf so a
    // distribution compared with itself gives exactly `tail_prob`.
    let prob = tail_prob + (cdf_at_drawdown(credit, level) - cdf_at_drawdown(treasury, level));
    let excess = expected_exceedance(credit, level) - expected_exceedance(treasury, level);
    Ok(CreditRiskPoint {
        date: credit.date,
        drawdown_level: level,
        prob_exceeds: prob.clamp(0.0, 1.0),
        excess_expected_drawdown: excess,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rnd::density::pdf_from_cdf;
    use statrs::distribution::{ContinuousCDF, LogNormal};

    fn from_cdf(spot: f64, cdf: impl Fn(f64) -> f64) -> RiskNeutralDistribution {
        let step = 0.25;
        let strikes: Vec<f64> = (0..=400).map(|i| 50.0 + step * i as f64).collect();
        let cdf: Vec<f64> = strikes.iter().map(|&x| cdf(x)).collect();
        let pdf = pdf_from_cdf(&cdf, step);
        RiskNeutralDistribution {
            date: NaiveDate::from_ymd_opt(2023, 3, 23).unwrap(),
            spot,
            tenor: 0.25,
            r: 0.0,
            q: 0.0,
            step,
            strikes,
            raw_cdf: cdf.clone(),
            raw_pdf: pdf.clone(),
            cdf,
            pdf,
        }
    }

    fn lognormal(shift: f64) -> impl Fn(f64) -> f64 {
        let sd = 0.1_f64;
        let ln = LogNormal::new(100.0_f64.ln() - 0.5 * sd * sd, sd).unwrap();
        move |x| ln.cdf(x + shift)
    }

    #[test]
    fn self_comparison_is_neutral() {
        let d = from_cdf(100.0, lognormal(0.0));
        let p = credit_signals(&d, &d, 0.01).unwrap();
        assert_eq!(p.prob_exceeds, 0.01);
        assert_eq!(p.excess_expected_drawdown, 0.0);
    }

    #[test]
    fn worked_example_half_percent() {
        // Treasury cdf reaches 1% at strike 85; the credit ETF has 1.5% there.
        let ief = from_cdf(100.0, |x| (0.01 * (x - 50.0) / 35.0).min(0.01 + (x - 85.0).max(0.0) / 65.0));
        let lqd = from_cdf(100.0, |x| (0.015 * (x - 50.0) / 35.0).min(0.015 + (x - 85.0).max(0.0) / 65.0 * 0.985));
        let p = credit_signals(&lqd, &ief, 0.01).unwrap();
        assert!((p.drawdown_level + 0.15).abs() < 1e-12);
        assert!((p.prob_exceeds - 0.01 - 0.005).abs() < 1e-12);
    }

    #[test]
    fn shifted_credit_distribution_is_riskier() {
        let ief = from_cdf(100.0, lognormal(0.0));
        let lqd = from_cdf(100.0, lognormal(5.0));
        let p = credit_signals(&lqd, &ief, 0.01).unwrap();

        // Brute-force oracle: the same quantities by direct summation over
        // a fine grid of the analytic cdfs.
        let (f_ief, f_lqd) = (lognormal(0.0), lognormal(5.0));
        let mut lo = 50.0;
        let mut hi = 150.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f_ief(mid) < 0.01 {
                lo = mid
            } else {
                hi = mid
            }
        }
        let level = lo / 100.0 - 1.0;
        assert!((p.drawdown_level - level).abs() < 1e-3);
        assert!((p.prob_exceeds - f_lqd(lo)).abs() < 1e-3);
        let h = 1e-3;
        let shortfall = |f: &dyn Fn(f64) -> f64| -> f64 {
            let mut acc = 0.0;
            let mut x = 50.0;
            while x < lo {
                acc += (f(x + h) - f(x)) * (level - ((x + 0.5 * h) / 100.0 - 1.0));
                x += h;
            }
            acc
        };
        let oracle = shortfall(&f_lqd) - shortfall(&f_ief);
        assert!(p.prob_exceeds > 0.01);
        assert!(p.excess_expected_drawdown > 0.0);
        assert!((p.excess_expected_drawdown - oracle).abs() < 2e-5, "{} vs {oracle}", p.excess_expected_drawdown);
    }

    #[test]
    fn rejects_mismatched_inputs() {
        let a = from_cdf(100.0, lognormal(0.0));
        let mut b = a.clone();
        b.tenor = 0.5;
        assert!(credit_signals(&a, &b, 0.01).is_err());
        assert!(credit_signals(&a, &a, 0.6).is_err());
    }
}
