use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::OnceLock;

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dynhedge"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

/// The default synthetic bundle, generated once per test binary.
fn bundle() -> &'static Path {
    static DIR: OnceLock<PathBuf> = OnceLock::new();
    DIR.get_or_init(|| {
        let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("cli-bundle");
        let _ = fs::remove_dir_all(&dir);
        ok(&["synth", "--seed", "7", "--out-dir", dir.to_str().unwrap()]);
        dir
    })
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json(p: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

/// Rows of a CSV artifact without the manifest line and header.
fn rows(p: &Path) -> Vec<Vec<String>> {
    let text = fs::read_to_string(p).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# manifest: "));
    lines.next().unwrap();
    lines.map(|l| l.split(',').map(str::to_string).collect()).collect()
}

const FUND: &str = "fund_size=50e6";

#[test]
fn synth_writes_a_loadable_stamped_bundle() {
    let dir = bundle();
    for f in ["prices.csv", "treasuries.csv", "fund_returns.csv", "smiles.csv", "trades.csv", "roster.csv"] {
        let text = fs::read_to_string(dir.join(f)).unwrap();
        assert!(text.starts_with("# manifest: "), "{f}");
    }
    let m = json(&dir.join("manifest.json"));
    assert_eq!(m["seed"], 7);
    assert_eq!(m["command"], "synth");
}

#[test]
fn signals_emit_three_columns_and_a_report() {
    let out = tempfile::tempdir().unwrap();
    ok(&["signals", "--data-dir", s(bundle()), "--out-dir", s(out.path())]);
    let names: std::collections::BTreeSet<String> =
        rows(&out.path().join("signals.csv")).into_iter().map(|r| r[1].clone()).collect();
    assert_eq!(names.into_iter().collect::<Vec<_>>(), vec!["credit", "liquidity", "momentum"]);
    let o = json(&out.path().join("orthogonality.json"));
    let eqs = o["report"]["equations"].as_array().unwrap();
    assert_eq!(eqs.len(), 3);
    for e in eqs {
        let r2 = e["adjusted_r_squared"].as_f64().unwrap();
        assert!(r2 < 1.0);
    }
}

#[test]
fn missing_smiles_skips_credit_only() {
    let data = tempfile::tempdir().unwrap();
    for e in fs::read_dir(bundle()).unwrap() {
        let e = e.unwrap();
        if e.file_name() != "smiles.csv" {
            fs::copy(e.path(), data.path().join(e.file_name())).unwrap();
        }
    }
    let out = tempfile::tempdir().unwrap();
    let o = ok(&["signals", "--data-dir", s(data.path()), "--out-dir", s(out.path())]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("credit signal skipped"));
    let report = json(&out.path().join("orthogonality.json"));
    assert_eq!(report["signals"], serde_json::json!(["liquidity", "momentum"]));
    assert!(report["report"].is_null());
}

#[test]
fn empty_dataset_fails_without_output() {
    let data = tempfile::tempdir().unwrap();
    fs::write(data.path().join("prices.csv"), "date,instrument,close,bid,ask,volume,duration,dividend_yield\n").unwrap();
    fs::write(data.path().join("treasuries.csv"), "date,instrument,yield,duration\n").unwrap();
    let out = tempfile::tempdir().unwrap();
    let dest = out.path().join("run");
    for cmd in ["signals", "backtest", "gridsearch", "lags"] {
        let o = run(&[cmd, "--data-dir", s(data.path()), "--out-dir", s(&dest)]);
        assert_eq!(o.status.code(), Some(1), "{cmd}");
        assert!(!dest.exists(), "{cmd} left output behind");
    }
}

#[test]
fn bad_configuration_is_an_input_error() {
    let out = tempfile::tempdir().unwrap();
    let o = run(&["backtest", "--data-dir", s(bundle()), "--out-dir", s(out.path()), "--set", "lookbak=40"]);
    assert_eq!(o.status.code(), Some(1));
    let o = run(&["backtest", "--data-dir", s(bundle()), "--out-dir", s(out.path()), "--set", "gamma_upper=-9"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(fs::read_dir(out.path()).unwrap().count(), 0);
}

#[test]
fn unreachable_entry_threshold_leaves_sortino_unchanged() {
    let out = tempfile::tempdir().unwrap();
    ok(&["backtest", "--data-dir", s(bundle()), "--out-dir", s(out.path()), "--set", FUND, "--set", "gamma_upper=inf"]);
    let sum = json(&out.path().join("summary.json"));
    assert_eq!(sum["delta"]["sortino"].as_f64(), Some(0.0));
    assert_eq!(sum["ever_active"], false);
}

#[test]
fn planted_bundle_hedge_improves_sortino_and_costs_only_hurt() {
    let full = tempfile::tempdir().unwrap();
    let free = tempfile::tempdir().unwrap();
    ok(&["backtest", "--data-dir", s(bundle()), "--out-dir", s(full.path()), "--set", FUND]);
    ok(&["backtest", "--data-dir", s(bundle()), "--out-dir", s(free.path()), "--set", FUND, "--set", "cost_mode=frictionless"]);
    let a = json(&full.path().join("summary.json"));
    let b = json(&free.path().join("summary.json"));
    assert_eq!(a["ever_active"], true);
    assert!(a["delta"]["sortino"].as_f64().unwrap() > 0.0);
    assert!(a["hedged"]["ann_return"].as_f64().unwrap() <= b["hedged"]["ann_return"].as_f64().unwrap());
    assert_eq!(a["costs_charged"], true);
    assert_eq!(b["costs_charged"], false);
}

#[test]
fn identity_lag_matches_the_backtest_summary() {
    let bt = tempfile::tempdir().unwrap();
    let lg = tempfile::tempdir().unwrap();
    ok(&["backtest", "--data-dir", s(bundle()), "--out-dir", s(bt.path()), "--set", FUND]);
    ok(&["lags", "--data-dir", s(bundle()), "--out-dir", s(lg.path()), "--set", FUND, "--set", "lags=0"]);
    let sum = json(&bt.path().join("summary.json"));
    let r = rows(&lg.path().join("lags.csv"));
    assert_eq!(r.len(), 1);
    let f = |i: usize| r[0][i].parse::<f64>().unwrap();
    let h = &sum["hedged"];
    assert_eq!(r[0][0], "0");
    assert_eq!(f(1), h["ann_return"].as_f64().unwrap());
    assert_eq!(f(2), h["ann_std"].as_f64().unwrap());
    assert_eq!(f(4), h["max_drawdown"].as_f64().unwrap());
    assert_eq!(f(5), h["sortino"].as_f64().unwrap());
    assert_eq!(f(6), h["annual_turnover"].as_f64().unwrap());
    assert_eq!(f(7), sum["delta"]["sortino"].as_f64().unwrap());
}

#[test]
fn grid_row_counts() {
    let one = tempfile::tempdir().unwrap();
    ok(&[
        "gridsearch", "--data-dir", s(bundle()), "--out-dir", s(one.path()), "--set", FUND,
        "--set", "grid_lookbacks=40", "--set", "grid_gamma_uppers=2.5", "--set", "grid_gamma_lowers=-1.5",
    ]);
    assert_eq!(rows(&one.path().join("gridsearch.csv")).len(), 3);

    let all = tempfile::tempdir().unwrap();
    ok(&["gridsearch", "--heatmap", "--data-dir", s(bundle()), "--out-dir", s(all.path()), "--set", FUND]);
    let r = rows(&all.path().join("gridsearch.csv"));
    let count = |stage: &str| r.iter().filter(|row| row[0] == stage).count();
    assert_eq!((count("lookback"), count("gamma_upper"), count("gamma_lower")), (5, 3, 6));
    assert!(r.iter().all(|row| row.last().unwrap() == "ok"));
    assert_eq!(rows(&all.path().join("heatmap.csv")).len(), 5 * 3 * 6);
}

#[test]
fn same_manifest_gives_identical_files() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    ok(&["backtest", "--data-dir", s(bundle()), "--out-dir", s(a.path()), "--set", FUND]);
    ok(&["backtest", "--sequential", "--data-dir", s(bundle()), "--out-dir", s(b.path()), "--set", FUND]);
    for f in ["backtest.csv", "diagnostics.csv", "summary.json", "manifest.json"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
    let hash = json(&a.path().join("manifest.json"))["manifest_hash"].clone();
    assert_eq!(json(&a.path().join("summary.json"))["manifest_hash"], hash);
    let first = fs::read_to_string(a.path().join("backtest.csv")).unwrap();
    assert_eq!(first.lines().next().unwrap(), format!("# manifest: {}", hash.as_str().unwrap()));

    // A different setting changes the hash.
    let c = tempfile::tempdir().unwrap();
    ok(&["backtest", "--data-dir", s(bundle()), "--out-dir", s(c.path()), "--set", FUND, "--set", "lag=1"]);
    assert_ne!(json(&c.path().join("manifest.json"))["manifest_hash"], hash);
}

#[test]
fn config_file_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# small search\nfund_size = 50e6\nlags = 0, 3\n").unwrap();
    let out = dir.path().join("out");
    ok(&["lags", "--config", s(&cfg), "--data-dir", s(bundle()), "--out-dir", s(&out), "--set", "lags=0,3,6"]);
    let lags: Vec<String> = rows(&out.join("lags.csv")).into_iter().map(|r| r[0].clone()).collect();
    assert_eq!(lags, vec!["0", "3", "6"]);
    let m = json(&out.join("manifest.json"));
    assert_eq!(m["config_path"], s(&cfg));
    assert_eq!(m["inputs"].as_array().unwrap().len(), 6);
}
