use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use chrono::NaiveDate;
use dynhedge::backtest::{run_backtest, PreparedData};
use dynhedge::durneutral::fund_neutral;
use dynhedge::marketdata::{generate_synthetic_market, load_dataset, write_dataset, DatasetPaths, MarketDataset};
use dynhedge::metrics::{full_grid, grid_search, lag_analysis, write_gridsearch_csv, write_lags_csv, DeltaMetrics, Summary};
use dynhedge::models::write_diagnostics_csv;
use dynhedge::par::Execution;
use dynhedge::signals::{build_signals, orthogonality_report, write_signals_csv, OrthogonalityReport};
use serde::Serialize;

use crate::manifest::RunManifest;
use crate::output::Outputs;
use crate::settings::Settings;

pub struct RunContext {
    pub settings: Settings,
    pub config_path: Option<PathBuf>,
    pub data_dir: PathBuf,
    pub out_dir: PathBuf,
    pub exec: Execution,
}

fn warn_all(warnings: &[String]) {
    for w in warnings {
        eprintln!("warning: {w}");
    }
}

fn load(ctx: &RunContext, command: &str) -> Result<(MarketDataset, RunManifest)> {
    let paths = DatasetPaths::in_dir(&ctx.data_dir);
    let ds = load_dataset(&paths, &ctx.settings.schema())
        .with_context(|| format!("loading dataset from {}", ctx.data_dir.display()))?;
    let manifest = RunManifest::new(command, ctx.config_path.as_deref(), &paths.all(), &ctx.settings)?;
    Ok((ds, manifest))
}

fn prepared(ctx: &RunContext, ds: &MarketDataset) -> Result<PreparedData> {
    let b = &ctx.settings.backtest;
    b.validate()?;
    let data = PreparedData::build(ds, &ctx.settings.signals, &b.fund, &b.hedges, ctx.exec)?;
    warn_all(&data.warnings);
    Ok(data)
}

fn finish(ctx: &RunContext, mut out: Outputs, manifest: &RunManifest) -> Result<()> {
    #[derive(Serialize)]
    struct Stamped<'a> {
        manifest_hash: String,
        #[serde(flatten)]
        manifest: &'a RunManifest,
    }
    out.add_json(
        "manifest.json",
        &Stamped {
            manifest_hash: manifest.hash(),
            manifest,
        },
    )?;
    for p in out.commit(&ctx.out_dir)? {
        eprintln!("wrote {}", p.display());
    }
    Ok(())
}

pub fn signals(ctx: &RunContext) -> Result<()> {
    let (ds, manifest) = load(ctx, "signals")?;
    let hash = manifest.hash();
    let set = build_signals(&ds, &ctx.settings.signals, ctx.exec);
    let mut warnings = set.warnings.clone();
    let available = set.available();
    if available.is_empty() {
        warn_all(&warnings);
        bail!("no signal could be built from {}", ctx.data_dir.display());
    }

    let report: Option<OrthogonalityReport> = match (&set.credit, &set.liquidity, &set.momentum) {
        (Some(c), Some(l), Some(m)) => {
            let r = fund_neutral(&ds, &ctx.settings.backtest.fund)
                .and_then(|f| orthogonality_report([c, l, m], &ds.dates, &f.neutral_return));
            match r {
                Ok(r) => Some(r),
                Err(e) => {
                    warnings.push(format!("orthogonality report skipped: {e}"));
                    None
                }
            }
        }
        _ => {
            warnings.push("orthogonality report needs all three signals".into());
            None
        }
    };
    warn_all(&warnings);

    #[derive(Serialize)]
    struct Orthogonality<'a> {
        manifest_hash: &'a str,
        signals: Vec<&'a str>,
        report: Option<OrthogonalityReport>,
        warnings: Vec<String>,
    }
    let mut out = Outputs::default();
    let mut body = Vec::new();
    write_signals_csv(&mut body, &available)?;
    out.add_csv("signals.csv", &hash, body);
    out.add_json(
        "orthogonality.json",
        &Orthogonality {
            manifest_hash: &hash,
            signals: available.iter().map(|s| s.name.as_str()).collect(),
            report,
            warnings,
        },
    )?;
    finish(ctx, out, &manifest)
}

#[derive(Serialize)]
struct BacktestSummary<'a> {
    manifest_hash: &'a str,
    model: String,
    fund: &'a str,
    hedges: &'a [String],
    eval_start: NaiveDate,
    costs_charged: bool,
    ever_active: bool,
    #[serde(flatten)]
    summary: Summary,
    warnings: Vec<String>,
}

pub fn backtest(ctx: &RunContext) -> Result<()> {
    let (ds, manifest) = load(ctx, "backtest")?;
    let hash = manifest.hash();
    let data = prepared(ctx, &ds)?;
    let cfg = &ctx.settings.backtest;
    let res = run_backtest(&data, cfg, ctx.exec)?;
    warn_all(&res.warnings);

    let mut out = Outputs::default();
    let mut body = Vec::new();
    res.write_csv(&mut body)?;
    out.add_csv("backtest.csv", &hash, body);
    let mut body = Vec::new();
    write_diagnostics_csv(&mut body, &res.diagnostics)?;
    out.add_csv("diagnostics.csv", &hash, body);
    out.add_json(
        "summary.json",
        &BacktestSummary {
            manifest_hash: &hash,
            model: cfg.model.to_string(),
            fund: &cfg.fund,
            hedges: &cfg.hedges,
            eval_start: res.dates[res.eval_start],
            costs_charged: res.costs_charged,
            ever_active: res.ever_active(),
            summary: res.summary,
            warnings: res.warnings.clone(),
        },
    )?;
    let s = &res.summary;
    eprintln!(
        "sortino {:.3} vs {:.3} baseline, max drawdown {:.4} vs {:.4}",
        s.hedged.sortino, s.baseline.sortino, s.hedged.max_drawdown, s.baseline.max_drawdown
    );
    finish(ctx, out, &manifest)
}

pub fn gridsearch(ctx: &RunContext, heatmap: bool) -> Result<()> {
    let (ds, manifest) = load(ctx, "gridsearch")?;
    let hash = manifest.hash();
    let data = prepared(ctx, &ds)?;
    let grids = &ctx.settings.grids;
    let report = grid_search(&data, &ctx.settings.backtest, grids, ctx.exec)?;

    let mut out = Outputs::default();
    let mut body = Vec::new();
    write_gridsearch_csv(&mut body, &report)?;
    out.add_csv("gridsearch.csv", &hash, body);

    #[derive(Serialize)]
    struct Stamped<'a, T> {
        manifest_hash: &'a str,
        #[serde(flatten)]
        inner: &'a T,
    }
    out.add_json(
        "gridsearch.json",
        &Stamped {
            manifest_hash: &hash,
            inner: &report,
        },
    )?;

    if heatmap {
        let cells = full_grid(&data, &ctx.settings.backtest, grids, ctx.exec)?;
        let mut s = String::from("lookback,gamma_upper,gamma_lower");
        for c in DeltaMetrics::COLUMNS {
            write!(s, ",{c}").expect("string write");
        }
        s.push_str(",status\n");
        for c in &cells {
            write!(s, "{},{},{}", c.lookback, c.gamma_upper, c.gamma_lower).expect("string write");
            match &c.delta {
                Some(d) => d.values().iter().for_each(|v| write!(s, ",{v}").expect("string write")),
                None => s.push_str(",,,,,,"),
            }
            writeln!(s, ",{}", c.error.as_deref().unwrap_or("ok").replace(',', ";")).expect("string write");
        }
        out.add_csv("heatmap.csv", &hash, s.into_bytes());
    }
    eprintln!(
        "selected lookback {} gamma_upper {} gamma_lower {} (d_sortino {:.3})",
        report.lookback, report.gamma_upper, report.gamma_lower, report.selected.delta.sortino
    );
    finish(ctx, out, &manifest)
}

pub fn lags(ctx: &RunContext) -> Result<()> {
    let (ds, manifest) = load(ctx, "lags")?;
    let hash = manifest.hash();
    let data = prepared(ctx, &ds)?;
    if ctx.settings.lags.is_empty() {
        bail!("`lags` is empty");
    }
    let rows = lag_analysis(&data, &ctx.settings.backtest, &ctx.settings.lags, ctx.exec)?;
    for r in &rows {
        warn_all(&r.warnings);
    }
    let mut out = Outputs::default();
    let mut body = Vec::new();
    write_lags_csv(&mut body, &rows)?;
    out.add_csv("lags.csv", &hash, body);
    finish(ctx, out, &manifest)
}

pub fn synth(ctx: &RunContext) -> Result<()> {
    let manifest = RunManifest::new("synth", ctx.config_path.as_deref(), &[], &ctx.settings)?;
    let hash = manifest.hash();
    let ds = generate_synthetic_market(&ctx.settings.synth_config(), ctx.settings.seed)?;

    // The dataset writer works on a directory; render into a scratch one and
    // carry the files over so the commit stays all-or-nothing.
    let scratch = scratch_dir(&ctx.out_dir);
    fs::create_dir_all(&scratch).with_context(|| format!("creating {}", scratch.display()))?;
    let rendered = write_dataset(&ds, &scratch).map_err(anyhow::Error::from).and_then(|_| {
        let mut files: Vec<(String, Vec<u8>)> = Vec::new();
        for entry in fs::read_dir(&scratch)? {
            let entry = entry?;
            let name = entry.file_name().to_string_lossy().into_owned();
            files.push((name, fs::read(entry.path())?));
        }
        files.sort();
        Ok(files)
    });
    let _ = fs::remove_dir_all(&scratch);
    let mut out = Outputs::default();
    for (name, bytes) in rendered? {
        out.add_csv(&name, &hash, bytes);
    }
    eprintln!("{} days, {} instruments", ds.dates.len(), ds.prices.len());
    finish(ctx, out, &manifest)
}

fn scratch_dir(out_dir: &Path) -> PathBuf {
    let parent = out_dir.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    parent.join(format!(".dynhedge-synth-{}", std::process::id()))
}
