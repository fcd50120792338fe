use std::collections::BTreeMap;
use std::path::Path;

use chrono::{Datelike, NaiveDate, Weekday};

use crate::error::{Error, Result};

/// Daily closes with strictly increasing dates and positive values.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries {
    symbol: String,
    dates: Vec<NaiveDate>,
    closes: Vec<f64>,
}

impl PriceSeries {
    /// Sorts by date and validates.
    pub fn new(symbol: impl Into<String>, dates: Vec<NaiveDate>, closes: Vec<f64>) -> Result<Self> {
        if dates.len() != closes.len() {
            return Err(Error::Validation(format!("{} dates but {} closes", dates.len(), closes.len())));
        }
        if let Some((i, c)) = closes.iter().enumerate().find(|(_, c)| !(**c > 0.0) || !c.is_finite()) {
            return Err(Error::Validation(format!("close {i} is not a positive finite number: {c}")));
        }
        let mut pairs: Vec<(NaiveDate, f64)> = dates.into_iter().zip(closes).collect();
        pairs.sort_by_key(|p| p.0);
        if let Some(w) = pairs.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::Validation(format!("duplicate date {}", w[0].0)));
        }
        let (dates, closes) = pairs.into_iter().unzip();
        Ok(Self { symbol: symbol.into(), dates, closes })
    }

    /// Closes dated on consecutive weekdays from Monday 2021-01-04.
    pub fn synthetic(symbol: impl Into<String>, closes: Vec<f64>) -> Result<Self> {
        let mut dates = Vec::with_capacity(closes.len());
        let mut d = NaiveDate::from_ymd_opt(2021, 1, 4).expect("valid date");
        while dates.len() < closes.len() {
            if !matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
                dates.push(d);
            }
            d = d.succ_opt().expect("date overflow");
        }
        Self::new(symbol, dates, closes)
    }

    pub fn symbol(&self) -> &str {
        &self.symbol
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn closes(&self) -> &[f64] {
        &self.closes
    }

    pub fn len(&self) -> usize {
        self.closes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.closes.is_empty()
    }

    /// The prefix of the series with dates `<= last`.
    pub fn truncated(&self, last: NaiveDate) -> Self {
        let n = self.dates.partition_point(|d| *d <= last);
        Self { symbol: self.symbol.clone(), dates: self.dates[..n].to_vec(), closes: self.closes[..n].to_vec() }
    }
}

/// Reads a two-column CSV whose header is `date,<value_col>`.
fn read_dated_values(path: &Path, value_col: &str) -> Result<Vec<(NaiveDate, f64, usize)>> {
    let parse_err = |line: usize, msg: String| Error::Parse { path: path.to_path_buf(), line, msg };
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_ascii_lowercase).collect();
    if header != ["date", value_col] {
        return Err(parse_err(1, format!("expected header `date,{value_col}`, found `{}`", header.join(","))));
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            parse_err(line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.len() != 2 {
            return Err(parse_err(line, format!("expected 2 fields, found {}", rec.len())));
        }
        let date = NaiveDate::parse_from_str(&rec[0], "%Y-%m-%d")
            .map_err(|e| parse_err(line, format!("bad date `{}`: {e}", &rec[0])))?;
        let value: f64 = rec[1].parse().map_err(|_| parse_err(line, format!("bad {value_col} `{}`", &rec[1])))?;
        if !(value > 0.0) || !value.is_finite() {
            return Err(parse_err(line, format!("{value_col} must be positive, got {value}")));
        }
        out.push((date, value, line));
    }
    out.sort_by_key(|r| r.0);
    if let Some(w) = out.windows(2).find(|w| w[0].0 == w[1].0) {
        let line = w[0].2.max(w[1].2);
        return Err(parse_err(line, format!("duplicate date {}", w[0].0)));
    }
    Ok(out)
}

/// Loads a `date,close` CSV (ISO dates, rows in any order) as a sorted series.
pub fn load_price_series(path: &Path, symbol: &str) -> Result<PriceSeries> {
    let rows = read_dated_values(path, "close")?;
    if rows.is_empty() {
        return Err(Error::Parse { path: path.to_path_buf(), line: 1, msg: "no data rows".into() });
    }
    let (dates, closes) = rows.into_iter().map(|(d, c, _)| (d, c)).unzip();
    PriceSeries::new(symbol, dates, closes)
}

/// Loads observed option prices from a `date,price` CSV.
pub fn load_market_quotes(path: &Path) -> Result<BTreeMap<NaiveDate, f64>> {
    Ok(read_dated_values(path, "price")?.into_iter().map(|(d, p, _)| (d, p)).collect())
}
