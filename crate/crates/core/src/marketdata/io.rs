//! CSV ingestion and emission for the dataset bundle.
//!
//! One file per logical table, header row required, ISO-8601 dates. Lines
//! starting with `#` are comments.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::File;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::NaiveDate;

use super::types::{ConstituentRoster, FundReturn, PriceBar, RawTrade, TreasuryPoint, VolSmile};
use super::MarketDataset;
use crate::{Error, Result};

pub const PRICES_FILE: &str = "prices.csv";
pub const SMILES_FILE: &str = "smiles.csv";
pub const TRADES_FILE: &str = "trades.csv";
pub const TREASURIES_FILE: &str = "treasuries.csv";
pub const FUNDS_FILE: &str = "fund_returns.csv";
pub const ROSTER_FILE: &str = "roster.csv";

/// Locations of the dataset tables. Prices and treasuries are mandatory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetPaths {
    pub prices: PathBuf,
    pub treasuries: PathBuf,
    pub fund_returns: Option<PathBuf>,
    pub smiles: Option<PathBuf>,
    pub trades: Option<PathBuf>,
    pub roster: Option<PathBuf>,
}

impl DatasetPaths {
    /// Standard file names inside `dir`; optional tables are included only if
    /// the file exists.
    pub fn in_dir(dir: impl AsRef<Path>) -> Self {
        let dir = dir.as_ref();
        let opt = |name: &str| {
            let p = dir.join(name);
            p.exists().then_some(p)
        };
        DatasetPaths {
            prices: dir.join(PRICES_FILE),
            treasuries: dir.join(TREASURIES_FILE),
            fund_returns: opt(FUNDS_FILE),
            smiles: opt(SMILES_FILE),
            trades: opt(TRADES_FILE),
            roster: opt(ROSTER_FILE),
        }
    }

    pub fn all(&self) -> Vec<&Path> {
        let mut v = vec![self.prices.as_path(), self.treasuries.as_path()];
        for p in [&self.fund_returns, &self.smiles, &self.trades, &self.roster]
            .into_iter()
            .flatten()
        {
            v.push(p.as_path());
        }
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DatasetSchema {
    /// Dates present in some aligned series but not all of them. More than
    /// this many is treated as a misaligned bundle.
    pub max_misaligned_dates: usize,
}

impl Default for DatasetSchema {
    fn default() -> Self {
        DatasetSchema {
            max_misaligned_dates: 10,
        }
    }
}

struct Table {
    file: String,
    columns: HashMap<String, usize>,
    reader: csv::Reader<File>,
}

struct Row<'a> {
    file: &'a str,
    line: u64,
    columns: &'a HashMap<String, usize>,
    record: csv::StringRecord,
}

impl Table {
    fn open(path: &Path, required: &[&str]) -> Result<Table> {
        let file = path.display().to_string();
        let handle = File::open(path).map_err(|source| Error::Io {
            path: file.clone(),
            source,
        })?;
        let mut reader = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(handle);
        let headers = reader.headers().map_err(|e| Error::Schema {
            file: file.clone(),
            line: 1,
            column: String::new(),
            message: e.to_string(),
        })?;
        let columns: HashMap<String, usize> = headers
            .iter()
            .enumerate()
            .map(|(i, h)| (h.to_ascii_lowercase(), i))
            .collect();
        for c in required {
            if !columns.contains_key(*c) {
                return Err(Error::Schema {
                    file,
                    line: 1,
                    column: c.to_string(),
                    message: "missing header column".into(),
                });
            }
        }
        Ok(Table {
            file,
            columns,
            reader,
        })
    }

    fn rows(&mut self) -> impl Iterator<Item = Result<Row<'_>>> + '_ {
        let file = self.file.as_str();
        let columns = &self.columns;
        self.reader.records().map(move |r| {
            let record = r.map_err(|e| Error::Schema {
                file: file.to_string(),
                line: e.position().map(|p| p.line()).unwrap_or(0),
                column: String::new(),
                message: e.to_string(),
            })?;
            let line = record.position().map(|p| p.line()).unwrap_or(0);
            Ok(Row {
                file,
                line,
                columns,
                record,
            })
        })
    }
}

impl Row<'_> {
    fn raw(&self, col: &str) -> &str {
        self.columns
            .get(col)
            .and_then(|&i| self.record.get(i))
            .unwrap_or("")
    }

    fn err(&self, col: &str, message: impl Into<String>) -> Error {
        Error::Schema {
            file: self.file.to_string(),
            line: self.line,
            column: col.to_string(),
            message: message.into(),
        }
    }

    fn parse<T: FromStr>(&self, col: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        let s = self.raw(col);
        if s.is_empty() {
            return Err(self.err(col, "empty value"));
        }
        s.parse::<T>()
            .map_err(|e| self.err(col, format!("cannot parse `{s}`: {e}")))
    }

    fn num(&self, col: &str) -> Result<f64> {
        let v: f64 = self.parse(col)?;
        if !v.is_finite() {
            return Err(self.err(col, "non-finite number"));
        }
        Ok(v)
    }

    fn opt_num(&self, col: &str) -> Result<Option<f64>> {
        if self.raw(col).is_empty() {
            Ok(None)
        } else {
            self.num(col).map(Some)
        }
    }

    fn date(&self, col: &str) -> Result<NaiveDate> {
        self.parse(col)
    }

    fn text(&self, col: &str) -> Result<String> {
        let s = self.raw(col);
        if s.is_empty() {
            return Err(self.err(col, "empty value"));
        }
        Ok(s.to_string())
    }
}

fn read_prices(path: &Path) -> Result<BTreeMap<String, Vec<PriceBar>>> {
    let mut t = Table::open(
        path,
        &["date", "instrument", "close", "bid", "ask", "volume", "duration", "dividend_yield"],
    )?;
    let mut out: BTreeMap<String, BTreeMap<NaiveDate, PriceBar>> = BTreeMap::new();
    for row in t.rows() {
        let row = row?;
        let date = row.date("date")?;
        let instrument = row.text("instrument")?;
        let close = row.num("close")?;
        let bid = row.opt_num("bid")?;
        let ask = row.opt_num("ask")?;
        let volume = row.num("volume")?;
        let duration = row.opt_num("duration")?;
        let dividend_yield = row.opt_num("dividend_yield")?.unwrap_or(0.0);
        if !(close > 0.0) {
            return Err(row.err("close", "close must be positive"));
        }
        if let Some(b) = bid {
            if b > close {
                return Err(row.err("bid", format!("bid {b} above close {close}")));
            }
        }
        if let Some(a) = ask {
            if a < close {
                return Err(row.err("ask", format!("ask {a} below close {close}")));
            }
        }
        if volume < 0.0 {
            return Err(row.err("volume", "negative volume"));
        }
        if let Some(dur) = duration {
            if !(dur > 0.0) {
                return Err(row.err("duration", "duration must be positive"));
            }
        }
        let bar = PriceBar {
            date,
            close,
            bid,
            ask,
            volume,
            duration,
            dividend_yield,
        };
        if out.entry(instrument.clone()).or_default().insert(date, bar).is_some() {
            return Err(Error::DuplicateDate {
                file: row.file.to_string(),
                date,
                key: instrument,
            });
        }
    }
    Ok(out
        .into_iter()
        .map(|(k, v)| (k, v.into_values().collect()))
        .collect())
}

fn read_treasuries(path: &Path) -> Result<BTreeMap<String, Vec<TreasuryPoint>>> {
    let mut t = Table::open(
        path,
        &["date", "instrument", "coupon", "duration", "maturity", "yield", "return"],
    )?;
    let mut out: BTreeMap<String, BTreeMap<NaiveDate, TreasuryPoint>> = BTreeMap::new();
    for row in t.rows() {
        let row = row?;
        let p = TreasuryPoint {
            date: row.date("date")?,
            instrument: row.text("instrument")?,
            coupon: row.num("coupon")?,
            duration: row.num("duration")?,
            maturity: row.date("maturity")?,
            yield_: row.num("yield")?,
            ret: row.num("return")?,
        };
        if !(p.duration > 0.0) {
            return Err(row.err("duration", "duration must be positive"));
        }
        let (date, key) = (p.date, p.instrument.clone());
        if out.entry(key.clone()).or_default().insert(date, p).is_some() {
            return Err(Error::DuplicateDate {
                file: row.file.to_string(),
                date,
                key,
            });
        }
    }
    Ok(out
        .into_iter()
        .map(|(k, v)| (k, v.into_values().collect()))
        .collect())
}

fn read_funds(path: &Path) -> Result<BTreeMap<String, Vec<FundReturn>>> {
    let mut t = Table::open(path, &["date", "fund", "return", "duration"])?;
    let mut out: BTreeMap<String, BTreeMap<NaiveDate, FundReturn>> = BTreeMap::new();
    for row in t.rows() {
        let row = row?;
        let date = row.date("date")?;
        let fund = row.text("fund")?;
        let f = FundReturn {
            date,
            ret: row.num("return")?,
            duration: row.num("duration")?,
        };
        if out.entry(fund.clone()).or_default().insert(date, f).is_some() {
            return Err(Error::DuplicateDate {
                file: row.file.to_string(),
                date,
                key: fund,
            });
        }
    }
    Ok(out
        .into_iter()
        .map(|(k, v)| (k, v.into_values().collect()))
        .collect())
}

fn read_smiles(path: &Path) -> Result<Vec<VolSmile>> {
    let mut t = Table::open(
        path,
        &["date", "instrument", "tenor_years", "moneyness_pct", "implied_vol"],
    )?;
    let mut groups: BTreeMap<(String, NaiveDate, u64), (f64, Vec<(f64, f64)>)> = BTreeMap::new();
    for row in t.rows() {
        let row = row?;
        let date = row.date("date")?;
        let instrument = row.text("instrument")?;
        let tenor = row.num("tenor_years")?;
        let m = row.num("moneyness_pct")?;
        let v = row.num("implied_vol")?;
        if !(tenor > 0.0) {
            return Err(row.err("tenor_years", "tenor must be positive"));
        }
        if !(v > 0.0) {
            return Err(row.err("implied_vol", "implied vol must be positive"));
        }
        let entry = groups
            .entry((instrument.clone(), date, tenor.to_bits()))
            .or_insert_with(|| (tenor, Vec::new()));
        if entry.1.iter().any(|(mm, _)| *mm == m) {
            return Err(Error::DuplicateDate {
                file: row.file.to_string(),
                date,
                key: format!("{instrument} moneyness {m}"),
            });
        }
        entry.1.push((m, v));
    }
    Ok(groups
        .into_iter()
        .map(|((instrument, date, _), (tenor, mut pts))| {
            pts.sort_by(|a, b| a.0.total_cmp(&b.0));
            VolSmile {
                date,
                instrument,
                tenor,
                moneyness: pts.iter().map(|p| p.0).collect(),
                vols: pts.iter().map(|p| p.1).collect(),
            }
        })
        .collect())
}

fn read_trades(path: &Path) -> Result<Vec<RawTrade>> {
    let mut t = Table::open(
        path,
        &["trade_id", "cusip", "date", "price", "coupon", "maturity", "volume", "status", "reversal_flag"],
    )?;
    let mut out = Vec::new();
    for row in t.rows() {
        let row = row?;
        out.push(RawTrade {
            trade_id: row.text("trade_id")?,
            cusip: row.text("cusip")?,
            date: row.date("date")?,
            price: row.num("price")?,
            coupon: row.num("coupon")?,
            maturity: row.date("maturity")?,
            volume: row.num("volume")?,
            status: row.raw("status").to_string(),
            reversal_flag: row.raw("reversal_flag").to_string(),
        });
    }
    Ok(out)
}

fn read_roster(path: &Path) -> Result<ConstituentRoster> {
    let mut t = Table::open(path, &["effective_date", "cusip", "inclusion_date"])?;
    let mut roster = ConstituentRoster::default();
    for row in t.rows() {
        let row = row?;
        let eff = row.date("effective_date")?;
        let cusip = row.text("cusip")?;
        let inc = row.date("inclusion_date")?;
        if inc > eff {
            return Err(row.err("inclusion_date", format!("inclusion {inc} after effective date {eff}")));
        }
        roster.snapshots.entry(eff).or_default().insert(cusip, inc);
    }
    Ok(roster)
}

fn restrict<T: Clone>(series: &[T], date_of: impl Fn(&T) -> NaiveDate, keep: &BTreeSet<NaiveDate>) -> Vec<T> {
    series.iter().filter(|x| keep.contains(&date_of(x))).cloned().collect()
}

/// Load and align a dataset bundle.
///
/// Prices, treasuries and fund returns are restricted to the dates common to
/// every series; dates dropped in the process are reported in
/// [`MarketDataset::gaps`].
pub fn load_dataset(paths: &DatasetPaths, schema: &DatasetSchema) -> Result<MarketDataset> {
    let prices = read_prices(&paths.prices)?;
    if prices.is_empty() {
        return Err(Error::InvalidInput(format!("{}: no price rows", paths.prices.display())));
    }
    let treasuries = read_treasuries(&paths.treasuries)?;
    let funds = match &paths.fund_returns {
        Some(p) => read_funds(p)?,
        None => BTreeMap::new(),
    };
    let smiles = match &paths.smiles {
        Some(p) => read_smiles(p)?,
        None => Vec::new(),
    };
    let trades = match &paths.trades {
        Some(p) => read_trades(p)?,
        None => Vec::new(),
    };
    let roster = match &paths.roster {
        Some(p) => Some(read_roster(p)?),
        None => None,
    };
    MarketDataset::aligned(prices, treasuries, funds, smiles, trades, roster, schema)
}

impl MarketDataset {
    /// Build a dataset from per-instrument series, aligning on common dates.
    pub fn aligned(
        prices: BTreeMap<String, Vec<PriceBar>>,
        treasuries: BTreeMap<String, Vec<TreasuryPoint>>,
        funds: BTreeMap<String, Vec<FundReturn>>,
        smiles: Vec<VolSmile>,
        trades: Vec<RawTrade>,
        roster: Option<ConstituentRoster>,
        schema: &DatasetSchema,
    ) -> Result<MarketDataset> {
        let mut sets: Vec<BTreeSet<NaiveDate>> = Vec::new();
        sets.extend(prices.values().map(|v| v.iter().map(|b| b.date).collect()));
        sets.extend(treasuries.values().map(|v| v.iter().map(|b| b.date).collect()));
        sets.extend(funds.values().map(|v| v.iter().map(|b| b.date).collect()));
        let union: BTreeSet<NaiveDate> = sets.iter().flatten().copied().collect();
        let common: BTreeSet<NaiveDate> = sets
            .iter()
            .skip(1)
            .fold(sets.first().cloned().unwrap_or_default(), |acc, s| {
                acc.intersection(s).copied().collect()
            });
        let gaps: Vec<NaiveDate> = union.difference(&common).copied().collect();
        if gaps.len() > schema.max_misaligned_dates {
            return Err(Error::Alignment(format!(
                "{} dates missing from at least one series (tolerance {}), first {}",
                gaps.len(),
                schema.max_misaligned_dates,
                gaps[0]
            )));
        }
        if common.is_empty() {
            return Err(Error::Alignment("series share no common dates".into()));
        }

        let prices: BTreeMap<String, Vec<PriceBar>> = prices
            .into_iter()
            .map(|(k, v)| (k, restrict(&v, |b| b.date, &common)))
            .collect();
        let costs_available = prices
            .values()
            .flatten()
            .all(|b| b.bid.is_some() && b.ask.is_some());
        Ok(MarketDataset {
            dates: common.iter().copied().collect(),
            costs_available,
            treasuries: treasuries
                .into_iter()
                .map(|(k, v)| (k, restrict(&v, |b| b.date, &common)))
                .collect(),
            funds: funds
                .into_iter()
                .map(|(k, v)| (k, restrict(&v, |b| b.date, &common)))
                .collect(),
            prices,
            smiles,
            trades,
            roster,
            gaps,
        })
    }
}

fn csv_writer(path: &Path) -> Result<csv::Writer<File>> {
    let f = File::create(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(csv::Writer::from_writer(f))
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        source: std::io::Error::other(e.to_string()),
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Write the dataset as a CSV bundle into `dir` using the standard file names.
pub fn write_dataset(ds: &MarketDataset, dir: &Path) -> Result<()> {
    let path = dir.join(PRICES_FILE);
    let mut w = csv_writer(&path)?;
    let e = |err| csv_err(&path, err);
    w.write_record(["date", "instrument", "close", "bid", "ask", "volume", "duration", "dividend_yield"])
        .map_err(e)?;
    for (inst, bars) in &ds.prices {
        for b in bars {
            w.write_record([
                b.date.to_string(),
                inst.clone(),
                b.close.to_string(),
                opt(b.bid),
                opt(b.ask),
                b.volume.to_string(),
                opt(b.duration),
                b.dividend_yield.to_string(),
            ])
            .map_err(e)?;
        }
    }
    w.flush().map_err(|source| Error::Io { path: path.display().to_string(), source })?;

    let path = dir.join(TREASURIES_FILE);
    let mut w = csv_writer(&path)?;
    let e = |err| csv_err(&path, err);
    w.write_record(["date", "instrument", "coupon", "duration", "maturity", "yield", "return"])
        .map_err(e)?;
    for pts in ds.treasuries.values() {
        for p in pts {
            w.write_record([
                p.date.to_string(),
                p.instrument.clone(),
                p.coupon.to_string(),
                p.duration.to_string(),
                p.maturity.to_string(),
                p.yield_.to_string(),
                p.ret.to_string(),
            ])
            .map_err(e)?;
        }
    }
    w.flush().map_err(|source| Error::Io { path: path.display().to_string(), source })?;

    let path = dir.join(FUNDS_FILE);
    let mut w = csv_writer(&path)?;
    let e = |err| csv_err(&path, err);
    w.write_record(["date", "fund", "return", "duration"]).map_err(e)?;
    for (name, rows) in &ds.funds {
        for r in rows {
            w.write_record([r.date.to_string(), name.clone(), r.ret.to_string(), r.duration.to_string()])
                .map_err(e)?;
        }
    }
    w.flush().map_err(|source| Error::Io { path: path.display().to_string(), source })?;

    if !ds.smiles.is_empty() {
        let path = dir.join(SMILES_FILE);
        let mut w = csv_writer(&path)?;
        let e = |err| csv_err(&path, err);
        w.write_record(["date", "instrument", "tenor_years", "moneyness_pct", "implied_vol"])
            .map_err(e)?;
        for s in &ds.smiles {
            for (m, v) in s.moneyness.iter().zip(&s.vols) {
                w.write_record([
                    s.date.to_string(),
                    s.instrument.clone(),
                    s.tenor.to_string(),
                    m.to_string(),
                    v.to_string(),
                ])
                .map_err(e)?;
            }
        }
        w.flush().map_err(|source| Error::Io { path: path.display().to_string(), source })?;
    }

    if !ds.trades.is_empty() {
        let path = dir.join(TRADES_FILE);
        let mut w = csv_writer(&path)?;
        let e = |err| csv_err(&path, err);
        w.write_record(["trade_id", "cusip", "date", "price", "coupon", "maturity", "volume", "status", "reversal_flag"])
            .map_err(e)?;
        for t in &ds.trades {
            w.write_record([
                t.trade_id.clone(),
                t.cusip.clone(),
                t.date.to_string(),
                t.price.to_string(),
                t.coupon.to_string(),
                t.maturity.to_string(),
                t.volume.to_string(),
                t.status.clone(),
                t.reversal_flag.clone(),
            ])
            .map_err(e)?;
        }
        w.flush().map_err(|source| Error::Io { path: path.display().to_string(), source })?;
    }

    if let Some(roster) = &ds.roster {
        let path = dir.join(ROSTER_FILE);
        let mut w = csv_writer(&path)?;
        let e = |err| csv_err(&path, err);
        w.write_record(["effective_date", "cusip", "inclusion_date"]).map_err(e)?;
        for (eff, members) in &roster.snapshots {
            for (cusip, inc) in members {
                w.write_record([eff.to_string(), cusip.clone(), inc.to_string()])
                    .map_err(e)?;
            }
        }
        w.flush().map_err(|source| Error::Io { path: path.display().to_string(), source })?;
    }
    Ok(())
}
