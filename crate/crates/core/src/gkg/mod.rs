//! Parsing and selection of GKG-style news-metadata records.
//!
//! Records arrive as tab-separated lines whose column layout is declared in
//! [`GkgSchema`] rather than hard-coded, so the parser survives upstream
//! column drift. Selection applies the article filters (length, outlet,
//! theme keywords, location focus) and buckets the survivors into trading
//! days.

mod filter;
mod parse;
mod select;

pub use filter::{
    infer_main_location, max_mention_countries, passes_focus, passes_length, passes_outlet,
    passes_theme_filter, ArticleFilterConfig, FilterConfigError, FocusMode,
};
pub use parse::{format_gkg_line, parse_gcam, parse_gkg_line, GkgFormatError, GkgParseError};
pub use select::{
    parse_gkg_files, select_articles, IngestReport, ParseErrorStats, SelectionResult,
    SelectionStats, SourceGapWarning,
};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

/// ISO-2 style country code as it appears in the location blocks.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CountryCode(String);

impl CountryCode {
    pub fn new(code: impl Into<String>) -> Self {
        Self(code.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for CountryCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for CountryCode {
    fn from(s: &str) -> Self {
        Self(s.to_string())
    }
}

/// One parsed news-metadata row.
///
/// `word_count` mirrors the GCAM total-word-count entry; a record without
/// that entry is word-count-missing and fails the length filter.
/// `locations` holds per-country mention counts, pre-aggregated, in first
/// appearance order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GkgRecord {
    pub record_id: String,
    pub published_at_utc: DateTime<Utc>,
    pub outlet: String,
    pub themes: Vec<String>,
    pub locations: Vec<(CountryCode, u32)>,
    pub gcam: BTreeMap<String, u64>,
    pub word_count: Option<u64>,
}

impl GkgRecord {
    pub fn gcam_count(&self, key: &str) -> u64 {
        self.gcam.get(key).copied().unwrap_or(0)
    }
}

/// Column layout of the tab-separated input.
///
/// Defaults follow the common GKG 2.1 layout (record id 0, date 1, source
/// common name 3, themes 7, locations 9, GCAM 17) but every run should pin
/// the layout in its pipeline configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GkgSchema {
    pub record_id: Option<usize>,
    pub date: usize,
    pub source: usize,
    pub themes: usize,
    pub locations: usize,
    pub gcam: usize,
    /// Position of the country code inside a `#`-delimited location block.
    pub location_country_subfield: usize,
    /// GCAM key holding the article's total word count.
    pub word_count_key: String,
}

impl Default for GkgSchema {
    fn default() -> Self {
        Self {
            record_id: Some(0),
            date: 1,
            source: 3,
            themes: 7,
            locations: 9,
            gcam: 17,
            location_country_subfield: 2,
            word_count_key: "wc".to_string(),
        }
    }
}

impl GkgSchema {
    /// Minimum number of columns a line must have under this schema.
    pub fn min_columns(&self) -> usize {
        let mut max = self
            .date
            .max(self.source)
            .max(self.themes)
            .max(self.locations)
            .max(self.gcam);
        if let Some(id) = self.record_id {
            max = max.max(id);
        }
        max + 1
    }
}
