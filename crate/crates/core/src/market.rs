//! Market covariates: yield spread, credit-risk proxy (domestic equity
//! return), liquidity proxy (bid-ask spread), and implied volatility.

use crate::stats;
use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Read;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MarketError {
    #[error("market file is empty")]
    EmptyFile,
    #[error("bad row {line}: {message}")]
    BadRow { line: usize, message: String },
    #[error("missing column {0:?}")]
    MissingColumn(String),
    #[error("duplicate date {0}")]
    DuplicateDate(NaiveDate),
    #[error("no observations for the requested year grouping")]
    EmptyYear,
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

/// Daily market series in levels. The spread and liquidity columns are
/// differenced downstream, never here.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarketSeries {
    pub country: String,
    pub dates: Vec<NaiveDate>,
    /// 10-year yield spread, basis points, level.
    pub spread: Vec<f64>,
    /// Domestic equity return, percent.
    pub crd: Vec<f64>,
    /// Bid-ask spread of the 10-year bond, level.
    pub liq: Vec<f64>,
    /// Implied-volatility index, level.
    pub vstoxx: Vec<f64>,
}

impl MarketSeries {
    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    /// Restricts to dates within `[start, end]`.
    pub fn clip(&self, start: NaiveDate, end: NaiveDate) -> MarketSeries {
        let keep: Vec<usize> = (0..self.len())
            .filter(|&i| self.dates[i] >= start && self.dates[i] <= end)
            .collect();
        let take = |v: &[f64]| keep.iter().map(|&i| v[i]).collect();
        MarketSeries {
            country: self.country.clone(),
            dates: keep.iter().map(|&i| self.dates[i]).collect(),
            spread: take(&self.spread),
            crd: take(&self.crd),
            liq: take(&self.liq),
            vstoxx: take(&self.vstoxx),
        }
    }
}

/// Column-name mapping for market CSV exports.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct MarketCsvSchema {
    pub date: String,
    pub spread: String,
    pub crd: String,
    pub liq: String,
    pub vstoxx: String,
}

impl Default for MarketCsvSchema {
    fn default() -> Self {
        Self {
            date: "date".into(),
            spread: "spread".into(),
            crd: "crd".into(),
            liq: "liq".into(),
            vstoxx: "vstoxx".into(),
        }
    }
}

/// Loads a market CSV: header row, ISO-8601 dates, rows in any order.
/// Output is sorted by date; duplicate dates are rejected.
pub fn load_market_csv(
    path: &Path,
    schema: &MarketCsvSchema,
    country: &str,
) -> Result<MarketSeries, MarketError> {
    let file = std::fs::File::open(path)?;
    load_market_reader(file, schema, country)
}

pub fn load_market_reader(
    reader: impl Read,
    schema: &MarketCsvSchema,
    country: &str,
) -> Result<MarketSeries, MarketError> {
    let mut rdr = csv::ReaderBuilder::new().flexible(false).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| -> Result<usize, MarketError> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| MarketError::MissingColumn(name.to_string()))
    };
    let ci_date = col(&schema.date)?;
    let ci_spread = col(&schema.spread)?;
    let ci_crd = col(&schema.crd)?;
    let ci_liq = col(&schema.liq)?;
    let ci_vstoxx = col(&schema.vstoxx)?;

    let mut rows: Vec<(NaiveDate, f64, f64, f64, f64)> = Vec::new();
    for (idx, record) in rdr.records().enumerate() {
        let line = idx + 2; // header is line 1
        let record = record?;
        let field = |i: usize| -> Result<&str, MarketError> {
            record.get(i).ok_or_else(|| MarketError::BadRow {
                line,
                message: "short row".into(),
            })
        };
        let date: NaiveDate = field(ci_date)?.parse().map_err(|e| MarketError::BadRow {
            line,
            message: format!("date: {e}"),
        })?;
        let num = |i: usize| -> Result<f64, MarketError> {
            let raw = field(i)?;
            let v: f64 = raw.parse().map_err(|_| MarketError::BadRow {
                line,
                message: format!("not a number: {raw:?}"),
            })?;
            if !v.is_finite() {
                return Err(MarketError::BadRow {
                    line,
                    message: format!("non-finite value {raw:?}"),
                });
            }
            Ok(v)
        };
        rows.push((date, num(ci_spread)?, num(ci_crd)?, num(ci_liq)?, num(ci_vstoxx)?));
    }
    if rows.is_empty() {
        return Err(MarketError::EmptyFile);
    }
    rows.sort_by_key(|r| r.0);
    for pair in rows.windows(2) {
        if pair[0].0 == pair[1].0 {
            return Err(MarketError::DuplicateDate(pair[0].0));
        }
    }
    Ok(MarketSeries {
        country: country.to_string(),
        dates: rows.iter().map(|r| r.0).collect(),
        spread: rows.iter().map(|r| r.1).collect(),
        crd: rows.iter().map(|r| r.2).collect(),
        liq: rows.iter().map(|r| r.3).collect(),
        vstoxx: rows.iter().map(|r| r.4).collect(),
    })
}

/// One row of the descriptive-statistics table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatRow {
    /// `None` aggregates the whole sample.
    pub year: Option<i32>,
    pub variable: String,
    pub n: usize,
    pub mean: f64,
    pub sd: f64,
    pub p05: f64,
    pub p95: f64,
}

fn stat_row(year: Option<i32>, variable: &str, values: &[f64]) -> StatRow {
    StatRow {
        year,
        variable: variable.to_string(),
        n: values.len(),
        mean: stats::mean(values),
        sd: stats::sample_sd(values).unwrap_or(0.0),
        p05: stats::percentile_of(values, 0.05),
        p95: stats::percentile_of(values, 0.95),
    }
}

/// Mean, standard deviation, and 5th/95th percentiles per variable,
/// optionally split by calendar year. First differences of spread,
/// liquidity, and volatility are computed here over consecutive
/// observations (gaps difference across).
pub fn descriptive_stats(series: &MarketSeries, by_year: bool) -> Result<Vec<StatRow>, MarketError> {
    if series.is_empty() {
        return Err(MarketError::EmptyYear);
    }
    let diff = |v: &[f64]| -> Vec<f64> { v.windows(2).map(|w| w[1] - w[0]).collect() };
    let d_spread = diff(&series.spread);
    let d_liq = diff(&series.liq);
    let d_vstoxx = diff(&series.vstoxx);
    // Differences carry the later day's date.
    let d_dates: Vec<NaiveDate> = series.dates[1..].to_vec();

    let level_vars: [(&str, &[f64]); 4] = [
        ("spread", &series.spread),
        ("crd", &series.crd),
        ("liq", &series.liq),
        ("vstoxx", &series.vstoxx),
    ];
    let diff_vars: [(&str, &[f64]); 3] = [
        ("d_spread", &d_spread),
        ("d_liq", &d_liq),
        ("d_vstoxx", &d_vstoxx),
    ];

    let mut out = Vec::new();
    if by_year {
        let mut years: Vec<i32> = series.dates.iter().map(|d| d.year()).collect();
        years.dedup();
        for year in years {
            for (name, vals) in level_vars.iter() {
                let sel: Vec<f64> = series
                    .dates
                    .iter()
                    .zip(vals.iter())
                    .filter(|(d, _)| d.year() == year)
                    .map(|(_, v)| *v)
                    .collect();
                if sel.is_empty() {
                    return Err(MarketError::EmptyYear);
                }
                out.push(stat_row(Some(year), name, &sel));
            }
            for (name, vals) in diff_vars.iter() {
                let sel: Vec<f64> = d_dates
                    .iter()
                    .zip(vals.iter())
                    .filter(|(d, _)| d.year() == year)
                    .map(|(_, v)| *v)
                    .collect();
                if !sel.is_empty() {
                    out.push(stat_row(Some(year), name, &sel));
                }
            }
        }
    } else {
        for (name, vals) in level_vars.iter() {
            out.push(stat_row(None, name, vals));
        }
        for (name, vals) in diff_vars.iter() {
            if !vals.is_empty() {
                out.push(stat_row(None, name, vals));
            }
        }
    }
    Ok(out)
}

pub fn stats_to_csv(rows: &[StatRow]) -> String {
    let mut out = String::from("year,variable,n,mean,sd,p05,p95\n");
    for r in rows {
        let year = r.year.map(|y| y.to_string()).unwrap_or_else(|| "all".into());
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            year, r.variable, r.n, r.mean, r.sd, r.p05, r.p95
        );
    }
    out
}

/// Serializes a market series back to CSV under a schema (used by the
/// synthetic-data generator so its output loads like any Bloomberg export).
pub fn market_to_csv(series: &MarketSeries, schema: &MarketCsvSchema) -> String {
    let mut out = format!(
        "{},{},{},{},{}\n",
        schema.date, schema.spread, schema.crd, schema.liq, schema.vstoxx
    );
    for i in 0..series.len() {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            series.dates[i], series.spread[i], series.crd[i], series.liq[i], series.vstoxx[i]
        );
    }
    out
}

/// Joins series values by date, for alignment diagnostics.
pub fn date_index(series: &MarketSeries) -> BTreeMap<NaiveDate, usize> {
    series
        .dates
        .iter()
        .enumerate()
        .map(|(i, d)| (*d, i))
        .collect()
}
