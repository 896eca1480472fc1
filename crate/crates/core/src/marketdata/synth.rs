//! Seeded synthetic market with planted credit drawdowns.
//!
//! A latent stress level ramps up ahead of each planted window, holds through
//! it and decays afterwards. Stress widens bond spreads, steepens the credit
//! ETF smile, widens quoted spreads and lifts volume, while the window itself
//! drags the hedge instruments down by the planted depth. Treasury returns
//! are linear in duration, so duration-neutralizing a generated instrument
//! recovers its spread component exactly.

use std::collections::BTreeMap;

use chrono::{Datelike, Duration, NaiveDate, Weekday};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::bond::{clean_price, match_treasury, year_fraction};
use super::io::DatasetSchema;
use super::types::{ConstituentRoster, FundReturn, PriceBar, RawTrade, TreasuryPoint, VolSmile};
use super::MarketDataset;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedDrawdown {
    /// Index of the first drawdown day.
    pub start: usize,
    pub length: usize,
    /// Compounded loss over the window, e.g. `-0.15`.
    pub depth: f64,
    /// Bond spreads are scaled by up to this factor at peak stress.
    pub spread_multiplier: f64,
    /// Days of rising stress before the window opens.
    pub lead_days: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolumeRegime {
    pub start: usize,
    pub length: usize,
    pub multiplier: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthHedge {
    pub name: String,
    pub initial_price: f64,
    pub duration: f64,
    /// Exposure to planted drawdowns.
    pub drawdown_beta: f64,
    /// Exposure to the common spread noise.
    pub noise_beta: f64,
    pub idio_vol: f64,
    pub base_volume: f64,
    pub half_spread_bps: f64,
    pub dividend_yield: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub start: NaiveDate,
    pub days: usize,
    pub hedges: Vec<SynthHedge>,
    pub fund: String,
    pub fund_duration: f64,
    pub fund_noise_beta: f64,
    pub fund_drawdown_beta: f64,
    pub fund_idio_vol: f64,
    pub treasury_etf: String,
    pub treasury_etf_duration: f64,
    pub treasury_durations: Vec<f64>,
    pub drawdowns: Vec<PlantedDrawdown>,
    pub spread_drift: f64,
    pub spread_vol: f64,
    pub rates_vol: f64,
    pub base_yield: f64,
    pub volume_regimes: Vec<VolumeRegime>,
    pub smile_tenor: f64,
    pub smile_noise: f64,
    pub n_bonds: usize,
    pub trades_per_day: usize,
    pub base_spread: f64,
    pub bad_report_rate: f64,
    pub stress_half_life: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            start: NaiveDate::from_ymd_opt(2013, 1, 2).expect("valid date"),
            days: 1500,
            hedges: vec![
                SynthHedge {
                    name: "LQD".into(),
                    initial_price: 110.0,
                    duration: 8.5,
                    drawdown_beta: 1.0,
                    noise_beta: 1.0,
                    idio_vol: 0.0004,
                    base_volume: 1_000_000.0,
                    half_spread_bps: 1.0,
                    dividend_yield: 0.0,
                },
                SynthHedge {
                    name: "HYG".into(),
                    initial_price: 85.0,
                    duration: 3.8,
                    drawdown_beta: 1.2,
                    noise_beta: 1.3,
                    idio_vol: 0.0006,
                    base_volume: 1_500_000.0,
                    half_spread_bps: 1.5,
                    dividend_yield: 0.0,
                },
            ],
            fund: "FUND".into(),
            fund_duration: 6.0,
            fund_noise_beta: 0.8,
            fund_drawdown_beta: 0.35,
            fund_idio_vol: 0.0004,
            treasury_etf: "IEF".into(),
            treasury_etf_duration: 7.5,
            treasury_durations: vec![0.95, 1.9, 2.8, 4.6, 6.3, 8.6, 15.0, 19.5],
            drawdowns: vec![PlantedDrawdown {
                start: 1100,
                length: 20,
                depth: -0.15,
                spread_multiplier: 2.5,
                lead_days: 5,
            }],
            spread_drift: 0.0002,
            spread_vol: 0.0015,
            rates_vol: 0.0004,
            base_yield: 0.025,
            volume_regimes: Vec::new(),
            smile_tenor: 0.25,
            smile_noise: 0.02,
            n_bonds: 60,
            trades_per_day: 12,
            base_spread: 0.012,
            bad_report_rate: 0.02,
            stress_half_life: 10.0,
        }
    }
}

const MONEYNESS: [f64; 17] = [
    50.0, 60.0, 70.0, 80.0, 85.0, 90.0, 95.0, 97.5, 100.0, 102.5, 105.0, 110.0, 115.0, 120.0, 130.0,
    140.0, 150.0,
];
const CURVE_SLOPE: f64 = 0.0008;

fn business_days(start: NaiveDate, n: usize) -> Vec<NaiveDate> {
    let mut out = Vec::with_capacity(n);
    let mut d = start;
    while out.len() < n {
        if !matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
            out.push(d);
        }
        d += Duration::days(1);
    }
    out
}

fn stress_path(cfg: &SynthConfig, w: &PlantedDrawdown) -> Vec<f64> {
    let decay = std::f64::consts::LN_2 / cfg.stress_half_life.max(1e-9);
    let end = w.start + w.length;
    (0..cfg.days)
        .map(|t| {
            if t >= w.start && t < end {
                1.0
            } else if t < w.start && t + w.lead_days >= w.start {
                let k = (t + w.lead_days + 1 - w.start) as f64;
                k / (w.lead_days + 1) as f64
            } else if t >= end {
                (-(((t - end) + 1) as f64) * decay).exp()
            } else {
                0.0
            }
        })
        .collect()
}

fn smile_vols(atm: f64, skew: f64, curvature: f64) -> Vec<f64> {
    MONEYNESS
        .iter()
        .map(|m| {
            let x = (100.0 - m.clamp(80.0, 110.0)) / 20.0;
            atm * (1.0 + skew * x + curvature * x * x)
        })
        .collect()
}

/// Generate a complete dataset bundle. Pure function of `(cfg, seed)`.
pub fn generate_synthetic_market(cfg: &SynthConfig, seed: u64) -> Result<MarketDataset> {
    if cfg.days < 2 {
        return Err(Error::InvalidInput("synthetic horizon needs at least 2 days".into()));
    }
    for w in &cfg.drawdowns {
        if w.length == 0 || w.start + w.length > cfg.days {
            return Err(Error::InvalidInput(format!(
                "planted drawdown [{}, {}) lies outside the {}-day horizon",
                w.start,
                w.start + w.length,
                cfg.days
            )));
        }
        if !(w.depth > -1.0 && w.depth <= 0.0) {
            return Err(Error::InvalidInput(format!("drawdown depth {} not in (-1, 0]", w.depth)));
        }
    }
    for r in &cfg.volume_regimes {
        if r.start + r.length > cfg.days {
            return Err(Error::InvalidInput("volume regime outside horizon".into()));
        }
    }
    if cfg.treasury_durations.len() < 2 {
        return Err(Error::InvalidInput("need at least two treasury durations".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let std_normal = Normal::new(0.0, 1.0).expect("unit normal");
    let z = move |rng: &mut ChaCha8Rng| -> f64 { std_normal.sample(rng) };

    let dates = business_days(cfg.start, cfg.days);
    let n = cfg.days;

    // Latent stress and the planted drawdown drag.
    let paths: Vec<Vec<f64>> = cfg.drawdowns.iter().map(|w| stress_path(cfg, w)).collect();
    let stress: Vec<f64> = (0..n)
        .map(|t| paths.iter().map(|p| p[t]).fold(0.0, f64::max))
        .collect();
    let widening: Vec<f64> = (0..n)
        .map(|t| {
            cfg.drawdowns
                .iter()
                .zip(&paths)
                .map(|(w, p)| (w.spread_multiplier - 1.0) * p[t])
                .fold(0.0, f64::max)
        })
        .collect();
    let mut drag = vec![0.0; n];
    for w in &cfg.drawdowns {
        let daily = (1.0 + w.depth).powf(1.0 / w.length as f64) - 1.0;
        for d in drag.iter_mut().skip(w.start).take(w.length) {
            *d += daily;
        }
    }
    let volume_mult: Vec<f64> = (0..n)
        .map(|t| {
            cfg.volume_regimes
                .iter()
                .filter(|r| t >= r.start && t < r.start + r.length)
                .map(|r| r.multiplier)
                .product()
        })
        .collect();

    // Rates: one level plus a fixed slope in duration.
    let mut level = vec![cfg.base_yield; n];
    let mut dy = vec![0.0; n];
    for t in 1..n {
        dy[t] = cfg.rates_vol * z(&mut rng);
        level[t] = (level[t - 1] + dy[t]).max(0.0005);
        dy[t] = level[t] - level[t - 1];
    }
    let duration_return = |t: usize, dur: f64| -> f64 {
        if t == 0 {
            return 0.0;
        }
        (level[t - 1] + CURVE_SLOPE * dur) / 252.0 - dur * dy[t]
    };

    let common: Vec<f64> = (0..n)
        .map(|_| cfg.spread_drift + cfg.spread_vol * z(&mut rng))
        .collect();

    // Treasuries: constant-maturity points, maturity roughly 1.1x duration.
    let mut treasuries: BTreeMap<String, Vec<TreasuryPoint>> = BTreeMap::new();
    for &dur in &cfg.treasury_durations {
        let id = format!("UST{:04.1}", dur);
        let years = (dur * 1.1 * 2.0).round() / 2.0;
        let pts = (0..n)
            .map(|t| {
                let y = level[t] + CURVE_SLOPE * dur;
                TreasuryPoint {
                    date: dates[t],
                    instrument: id.clone(),
                    coupon: (y * 800.0).round() / 800.0,
                    duration: dur,
                    maturity: dates[t] + Duration::days((years * 365.0).round() as i64),
                    yield_: y,
                    ret: duration_return(t, dur),
                }
            })
            .collect();
        treasuries.insert(id, pts);
    }

    // Exchange-traded instruments.
    let mut prices: BTreeMap<String, Vec<PriceBar>> = BTreeMap::new();
    let vol_noise: Normal<f64> = Normal::new(-0.03125, 0.25).expect("volume noise");
    for h in &cfg.hedges {
        let mut close = h.initial_price;
        let mut bars = Vec::with_capacity(n);
        for t in 0..n {
            if t > 0 {
                let spread_ret =
                    h.noise_beta * common[t] + h.drawdown_beta * drag[t] + h.idio_vol * z(&mut rng);
                let total = spread_ret + duration_return(t, h.duration);
                close *= 1.0 + total - h.dividend_yield / 252.0;
            }
            let hs = h.half_spread_bps / 1e4 * (1.0 + 3.0 * stress[t]);
            let volume = (h.base_volume * volume_mult[t] * (1.0 + stress[t]) * vol_noise.sample(&mut rng).exp()).round();
            bars.push(PriceBar {
                date: dates[t],
                close,
                bid: Some(close * (1.0 - hs)),
                ask: Some(close * (1.0 + hs)),
                volume,
                duration: Some(h.duration),
                dividend_yield: h.dividend_yield,
            });
        }
        prices.insert(h.name.clone(), bars);
    }
    {
        let mut close = 100.0;
        let mut bars = Vec::with_capacity(n);
        for t in 0..n {
            if t > 0 {
                close *= 1.0 + duration_return(t, cfg.treasury_etf_duration);
            }
            bars.push(PriceBar {
                date: dates[t],
                close,
                bid: Some(close * (1.0 - 0.5e-4)),
                ask: Some(close * (1.0 + 0.5e-4)),
                volume: (3_000_000.0 * vol_noise.sample(&mut rng).exp()).round(),
                duration: Some(cfg.treasury_etf_duration),
                dividend_yield: 0.0,
            });
        }
        prices.insert(cfg.treasury_etf.clone(), bars);
    }

    let mut funds = BTreeMap::new();
    funds.insert(
        cfg.fund.clone(),
        (0..n)
            .map(|t| {
                let spread = if t == 0 {
                    0.0
                } else {
                    cfg.fund_noise_beta * common[t]
                        + cfg.fund_drawdown_beta * drag[t]
                        + cfg.fund_idio_vol * z(&mut rng)
                };
                FundReturn {
                    date: dates[t],
                    ret: spread + duration_return(t, cfg.fund_duration),
                    duration: cfg.fund_duration,
                }
            })
            .collect(),
    );

    // Smiles: the credit ETF steepens and lifts with stress; the treasury ETF
    // smile stays calm. Wings are flat beyond 80% and 110%.
    let mut smiles = Vec::with_capacity(2 * n);
    let credit_etf = cfg.hedges.first().map(|h| h.name.clone());
    for t in 0..n {
        let noise = (cfg.smile_noise * z(&mut rng)).exp();
        if let Some(name) = &credit_etf {
            let s = stress[t];
            smiles.push(VolSmile {
                date: dates[t],
                instrument: name.clone(),
                tenor: cfg.smile_tenor,
                moneyness: MONEYNESS.to_vec(),
                vols: smile_vols(0.07 * (1.0 + 1.5 * s) * noise, 0.8 * (1.0 + s), 0.6 * (1.0 + 2.0 * s)),
            });
        }
        let noise = (cfg.smile_noise * z(&mut rng)).exp();
        smiles.push(VolSmile {
            date: dates[t],
            instrument: cfg.treasury_etf.clone(),
            tenor: cfg.smile_tenor,
            moneyness: MONEYNESS.to_vec(),
            vols: smile_vols(0.06 * noise, 0.3, 0.2),
        });
    }

    // Constituent bonds, roster snapshots and trade reports.
    struct Bond {
        cusip: String,
        coupon: f64,
        maturity: NaiveDate,
        spread: f64,
        inclusion: NaiveDate,
    }
    let span_days = (dates[n - 1] - cfg.start).num_days();
    let bonds: Vec<Bond> = (0..cfg.n_bonds)
        .map(|i| {
            let coupon = (rng.random_range(0.025..0.06) * 800.0_f64).round() / 800.0;
            let years = rng.random_range(4.0..15.0_f64);
            // Inclusions are spread over the whole horizon so the index keeps
            // recently added bonds throughout.
            let inclusion = cfg.start + Duration::days(rng.random_range(-900..span_days.max(1)));
            Bond {
                cusip: format!("SYN{i:05}"),
                coupon,
                maturity: inclusion.max(cfg.start) + Duration::days((years * 365.0) as i64),
                spread: cfg.base_spread * rng.random_range(0.5..1.6),
                inclusion,
            }
        })
        .collect();
    let mut roster = ConstituentRoster::default();
    for t in (0..n).step_by(126) {
        let eff = dates[t];
        let members: BTreeMap<String, NaiveDate> = bonds
            .iter()
            .filter(|b| b.inclusion <= eff)
            .map(|b| (b.cusip.clone(), b.inclusion))
            .collect();
        if !members.is_empty() {
            roster.snapshots.insert(eff, members);
        }
    }

    let mut trades = Vec::new();
    let mut day_curve: Vec<TreasuryPoint> = Vec::new();
    for t in 0..n {
        if cfg.n_bonds == 0 {
            break;
        }
        day_curve.clear();
        day_curve.extend(treasuries.values().map(|v| v[t].clone()));
        for k in 0..cfg.trades_per_day {
            let b = &bonds[rng.random_range(0..bonds.len())];
            if b.maturity <= dates[t] + Duration::days(60) {
                continue;
            }
            let spread = b.spread * (1.0 + widening[t]) * (0.05 * z(&mut rng)).exp();
            let probe = super::types::BondTrade {
                trade_id: String::new(),
                cusip: b.cusip.clone(),
                date: dates[t],
                price: 100.0,
                coupon: b.coupon,
                maturity: b.maturity,
                volume: 0.0,
                status: super::types::TradeStatus::Trade,
                reversal_flag: false,
            };
            let tsy = match_treasury(&probe, &day_curve).expect("curve covers every date");
            let ytm = tsy.yield_ + spread;
            let years = year_fraction(dates[t], b.maturity);
            let price = clean_price(b.coupon, years, ytm);
            let trade_id = format!("{}-{k:03}", dates[t].format("%Y%m%d"));
            let volume = (2_000_000.0 * (1.0 + stress[t]) * vol_noise.sample(&mut rng).exp()).round();
            let base = RawTrade {
                trade_id: trade_id.clone(),
                cusip: b.cusip.clone(),
                date: dates[t],
                price,
                coupon: b.coupon,
                maturity: b.maturity,
                volume,
                status: "T".into(),
                reversal_flag: String::new(),
            };
            let roll: f64 = rng.random();
            trades.push(base.clone());
            if roll < cfg.bad_report_rate / 3.0 {
                trades.push(RawTrade {
                    status: "X".into(),
                    ..base
                });
            } else if roll < 2.0 * cfg.bad_report_rate / 3.0 {
                trades.push(RawTrade {
                    status: "C".into(),
                    price: base.price * 1.001,
                    ..base
                });
            } else if roll < cfg.bad_report_rate {
                trades.push(RawTrade {
                    trade_id: format!("{trade_id}R"),
                    status: "Y".into(),
                    reversal_flag: "R".into(),
                    ..base
                });
            }
        }
    }

    MarketDataset::aligned(
        prices,
        treasuries,
        funds,
        smiles,
        trades,
        Some(roster),
        &DatasetSchema::default(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SynthConfig {
        SynthConfig {
            days: 300,
            drawdowns: vec![PlantedDrawdown {
                start: 200,
                length: 20,
                depth: -0.15,
                spread_multiplier: 2.0,
                lead_days: 5,
            }],
            n_bonds: 10,
            trades_per_day: 3,
            ..SynthConfig::default()
        }
    }

    #[test]
    fn same_seed_is_bit_identical() {
        let a = generate_synthetic_market(&small(), 7).unwrap();
        let b = generate_synthetic_market(&small(), 7).unwrap();
        assert_eq!(a, b);
        let c = generate_synthetic_market(&small(), 8).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn window_outside_horizon_is_rejected() {
        let mut cfg = small();
        cfg.drawdowns[0].start = 290;
        assert!(matches!(generate_synthetic_market(&cfg, 1), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn bid_close_ask_ordering_holds() {
        let ds = generate_synthetic_market(&small(), 3).unwrap();
        assert!(ds.costs_available);
        for bars in ds.prices.values() {
            for b in bars {
                assert!(b.bid.unwrap() <= b.close && b.close <= b.ask.unwrap());
                assert!(b.volume >= 0.0);
            }
        }
        assert_eq!(ds.dates.len(), 300);
        assert!(ds.gaps.is_empty());
    }

    #[test]
    fn stress_ramps_then_decays() {
        let cfg = small();
        let s = stress_path(&cfg, &cfg.drawdowns[0]);
        assert_eq!(s[190], 0.0);
        assert!(s[195] > 0.0 && s[195] < s[199]);
        assert_eq!(s[200], 1.0);
        assert_eq!(s[219], 1.0);
        assert!(s[220] < 1.0 && s[230] < s[220]);
    }
}
