//! Article filters: length, outlet, theme keywords, and location focus.

use super::{CountryCode, GkgRecord};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FilterConfigError {
    #[error("min_words must be at least 1")]
    ZeroMinWords,
    #[error("min_theme_keywords must be at least 1")]
    ZeroMinThemeKeywords,
    #[error("outlet allowlist must not be empty")]
    EmptyOutletAllowlist,
    #[error("paired focus countries must differ")]
    PairedCountriesEqual,
}

/// Which articles count as on-focus for a country.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum FocusMode {
    /// Articles whose dominant location is exactly this country.
    Domestic { country: CountryCode },
    /// Articles dominated by either country, or tied exactly between the two.
    DomesticOrPaired {
        country_a: CountryCode,
        country_b: CountryCode,
    },
}

impl FocusMode {
    pub fn label(&self) -> String {
        match self {
            FocusMode::Domestic { country } => format!("domestic-{country}"),
            FocusMode::DomesticOrPaired {
                country_a,
                country_b,
            } => format!("paired-{country_a}-{country_b}"),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ArticleFilterConfig {
    pub min_words: u64,
    pub theme_prefixes: Vec<String>,
    pub min_theme_keywords: u32,
    pub focus_mode: FocusMode,
    pub outlet_allowlist: BTreeSet<String>,
}

impl ArticleFilterConfig {
    pub fn validate(&self) -> Result<(), FilterConfigError> {
        if self.min_words == 0 {
            return Err(FilterConfigError::ZeroMinWords);
        }
        if self.min_theme_keywords == 0 {
            return Err(FilterConfigError::ZeroMinThemeKeywords);
        }
        if self.outlet_allowlist.is_empty() {
            return Err(FilterConfigError::EmptyOutletAllowlist);
        }
        if let FocusMode::DomesticOrPaired {
            country_a,
            country_b,
        } = &self.focus_mode
        {
            if country_a == country_b {
                return Err(FilterConfigError::PairedCountriesEqual);
            }
        }
        Ok(())
    }
}

/// The maximal mention count and every country achieving it.
pub fn max_mention_countries(record: &GkgRecord) -> (u32, Vec<&CountryCode>) {
    let mut best = 0u32;
    let mut ties: Vec<&CountryCode> = Vec::new();
    for (code, count) in &record.locations {
        if *count > best {
            best = *count;
            ties.clear();
            ties.push(code);
        } else if *count == best && best > 0 {
            ties.push(code);
        }
    }
    (best, ties)
}

/// The country mentioned strictly more often than every other, if any.
/// Ties and empty location lists yield `None`.
pub fn infer_main_location(record: &GkgRecord) -> Option<&CountryCode> {
    let (_, ties) = max_mention_countries(record);
    if ties.len() == 1 {
        Some(ties[0])
    } else {
        None
    }
}

pub fn passes_focus(record: &GkgRecord, cfg: &ArticleFilterConfig) -> bool {
    match &cfg.focus_mode {
        FocusMode::Domestic { country } => infer_main_location(record) == Some(country),
        FocusMode::DomesticOrPaired {
            country_a,
            country_b,
        } => {
            let (_, ties) = max_mention_countries(record);
            match ties.as_slice() {
                [one] => *one == country_a || *one == country_b,
                [x, y] => {
                    (*x == country_a && *y == country_b) || (*x == country_b && *y == country_a)
                }
                _ => false,
            }
        }
    }
}

/// True when the summed occurrence count of themes starting with any
/// configured prefix reaches the keyword threshold.
pub fn passes_theme_filter(record: &GkgRecord, cfg: &ArticleFilterConfig) -> bool {
    let hits: u32 = record
        .themes
        .iter()
        .filter(|t| cfg.theme_prefixes.iter().any(|p| t.starts_with(p.as_str())))
        .count() as u32;
    hits >= cfg.min_theme_keywords
}

pub fn passes_length(record: &GkgRecord, cfg: &ArticleFilterConfig) -> bool {
    record.word_count.is_some_and(|wc| wc >= cfg.min_words)
}

pub fn passes_outlet(record: &GkgRecord, cfg: &ArticleFilterConfig) -> bool {
    cfg.outlet_allowlist.contains(&record.outlet)
}
