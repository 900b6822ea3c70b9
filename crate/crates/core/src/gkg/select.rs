//! Selection pipeline: filter records, bucket them into trading days, and
//! report volume diagnostics.

use super::{
    parse_gkg_line, passes_focus, passes_length, passes_outlet, passes_theme_filter,
    ArticleFilterConfig, GkgParseError, GkgRecord, GkgSchema,
};
use crate::calendar::TradingCalendar;
use chrono::NaiveDate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionStats {
    pub input: u64,
    pub failed_length: u64,
    pub failed_outlet: u64,
    pub failed_theme: u64,
    pub failed_focus: u64,
    pub omitted: u64,
    pub selected: u64,
}

/// A day whose selected-article count dropped more than 50% below the
/// trailing 20-day median, hinting at an upstream source gap.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceGapWarning {
    pub date: NaiveDate,
    pub count: u64,
    pub trailing_median: f64,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct SelectionResult {
    pub buckets: BTreeMap<NaiveDate, Vec<GkgRecord>>,
    pub stats: SelectionStats,
    pub warnings: Vec<SourceGapWarning>,
}

impl SelectionResult {
    /// Per-day selected article counts, ascending by date.
    pub fn daily_volume(&self) -> Vec<(NaiveDate, u64)> {
        self.buckets
            .iter()
            .map(|(d, v)| (*d, v.len() as u64))
            .collect()
    }
}

const GAP_WINDOW: usize = 20;

fn source_gap_warnings(volume: &[(NaiveDate, u64)]) -> Vec<SourceGapWarning> {
    let mut out = Vec::new();
    for i in GAP_WINDOW..volume.len() {
        let mut window: Vec<u64> = volume[i - GAP_WINDOW..i].iter().map(|(_, c)| *c).collect();
        window.sort_unstable();
        let median = (window[GAP_WINDOW / 2 - 1] + window[GAP_WINDOW / 2]) as f64 / 2.0;
        let (date, count) = volume[i];
        if (count as f64) < 0.5 * median {
            out.push(SourceGapWarning {
                date,
                count,
                trailing_median: median,
            });
        }
    }
    out
}

/// Applies the article filters and buckets survivors by trading day.
///
/// Filter order: length, outlet allowlist, theme keywords, location focus.
/// Records whose publication time maps to no trading day are dropped and
/// counted as omitted, so `input = failed_* + omitted + selected`.
pub fn select_articles(
    records: impl IntoIterator<Item = GkgRecord>,
    cfg: &ArticleFilterConfig,
    cal: &TradingCalendar,
) -> SelectionResult {
    let mut stats = SelectionStats::default();
    let mut buckets: BTreeMap<NaiveDate, Vec<GkgRecord>> = BTreeMap::new();

    for record in records {
        stats.input += 1;
        if !passes_length(&record, cfg) {
            stats.failed_length += 1;
            continue;
        }
        if !passes_outlet(&record, cfg) {
            stats.failed_outlet += 1;
            continue;
        }
        if !passes_theme_filter(&record, cfg) {
            stats.failed_theme += 1;
            continue;
        }
        if !passes_focus(&record, cfg) {
            stats.failed_focus += 1;
            continue;
        }
        match cal.assign_trading_day(record.published_at_utc) {
            Some(day) => {
                stats.selected += 1;
                buckets.entry(day).or_default().push(record);
            }
            None => stats.omitted += 1,
        }
    }

    // Shard-order independence: bucket contents get a canonical order.
    for bucket in buckets.values_mut() {
        bucket.sort_by(|a, b| {
            (a.published_at_utc, &a.record_id).cmp(&(b.published_at_utc, &b.record_id))
        });
    }

    let volume: Vec<(NaiveDate, u64)> = buckets
        .iter()
        .map(|(d, v)| (*d, v.len() as u64))
        .collect();
    let warnings = source_gap_warnings(&volume);

    SelectionResult {
        buckets,
        stats,
        warnings,
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseErrorStats {
    pub malformed_line: u64,
    pub bad_timestamp: u64,
    pub bad_gcam: u64,
}

impl ParseErrorStats {
    pub fn total(&self) -> u64 {
        self.malformed_line + self.bad_timestamp + self.bad_gcam
    }

    fn record(&mut self, err: &GkgParseError) {
        match err {
            GkgParseError::MalformedLine { .. } => self.malformed_line += 1,
            GkgParseError::BadTimestamp(_) => self.bad_timestamp += 1,
            GkgParseError::BadGcam(_) => self.bad_gcam += 1,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct IngestReport {
    pub records: Vec<GkgRecord>,
    pub parse_errors: ParseErrorStats,
}

/// Reads and parses GKG files. Files are processed in parallel; the output
/// preserves (file, line) order, so results do not depend on scheduling.
/// Malformed lines are counted, not fatal.
pub fn parse_gkg_files(
    paths: &[PathBuf],
    schema: &GkgSchema,
) -> std::io::Result<IngestReport> {
    let per_file: Vec<std::io::Result<(Vec<GkgRecord>, ParseErrorStats)>> = paths
        .par_iter()
        .map(|path| {
            let text = fs::read_to_string(path)?;
            let mut records = Vec::new();
            let mut errors = ParseErrorStats::default();
            for line in text.lines() {
                if line.is_empty() {
                    continue;
                }
                match parse_gkg_line(line, schema) {
                    Ok(r) => records.push(r),
                    Err(e) => errors.record(&e),
                }
            }
            Ok((records, errors))
        })
        .collect();

    let mut records = Vec::new();
    let mut parse_errors = ParseErrorStats::default();
    for item in per_file {
        let (rs, es) = item?;
        records.extend(rs);
        parse_errors.malformed_line += es.malformed_line;
        parse_errors.bad_timestamp += es.bad_timestamp;
        parse_errors.bad_gcam += es.bad_gcam;
    }
    Ok(IngestReport {
        records,
        parse_errors,
    })
}
