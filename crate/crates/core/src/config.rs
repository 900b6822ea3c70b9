//! Pipeline configuration (TOML) and the default event calendar.

use crate::calendar::TradingCalendar;
use crate::emotion::ScaleScope;
use crate::gkg::{ArticleFilterConfig, FocusMode, GkgSchema};
use crate::market::MarketCsvSchema;
use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config file: {0}")]
    Io(#[from] std::io::Error),
    #[error("config parse: {0}")]
    Parse(String),
    #[error("config invalid: {0}")]
    Invalid(String),
    #[error("referenced file missing: {0}")]
    MissingFile(PathBuf),
}

/// Environment variable overriding the output directory.
pub const OUT_DIR_ENV: &str = "NEWSQUANT_OUT_DIR";

fn default_start() -> NaiveDate {
    NaiveDate::from_ymd_opt(2015, 3, 2).unwrap()
}

fn default_end() -> NaiveDate {
    NaiveDate::from_ymd_opt(2019, 8, 31).unwrap()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SampleSection {
    pub start: NaiveDate,
    pub end: NaiveDate,
    pub country: String,
}

impl Default for SampleSection {
    fn default() -> Self {
        Self {
            start: default_start(),
            end: default_end(),
            country: "IT".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct DataSection {
    pub market_csv: Option<PathBuf>,
    pub market_schema: MarketCsvSchema,
    pub gkg_files: Vec<PathBuf>,
    pub gkg_schema: GkgSchema,
    pub lexicon_file: Option<PathBuf>,
    /// Name of the lexicon used as the overall-negativity control.
    pub lm_lexicon: String,
    /// Pre-built indicator CSVs keyed by emotion name; when non-empty they
    /// replace the GKG ingest route (the control must be among the keys).
    pub emotion_csvs: std::collections::BTreeMap<String, PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FiltersSection {
    pub min_words: u64,
    pub theme_prefixes: Vec<String>,
    pub min_theme_keywords: u32,
    pub focus: FocusMode,
    pub outlets: Vec<String>,
}

impl Default for FiltersSection {
    fn default() -> Self {
        Self {
            min_words: 100,
            theme_prefixes: vec![],
            min_theme_keywords: 4,
            focus: FocusMode::Domestic {
                country: "IT".into(),
            },
            outlets: vec![],
        }
    }
}

impl FiltersSection {
    pub fn to_filter_config(&self) -> ArticleFilterConfig {
        ArticleFilterConfig {
            min_words: self.min_words,
            theme_prefixes: self.theme_prefixes.clone(),
            min_theme_keywords: self.min_theme_keywords,
            focus_mode: self.focus.clone(),
            outlet_allowlist: self.outlets.iter().cloned().collect::<BTreeSet<_>>(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IndicatorsSection {
    pub window_w: usize,
    pub carry_forward: bool,
    pub scale_scope: ScaleScope,
    /// Explicit estimation-window end for scaling; when absent it derives
    /// from the rolling window split.
    pub estimation_end: Option<NaiveDate>,
}

impl Default for IndicatorsSection {
    fn default() -> Self {
        Self {
            window_w: 5,
            carry_forward: false,
            scale_scope: ScaleScope::FullSample,
            estimation_end: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepSection {
    pub enabled: bool,
    pub h: usize,
    /// Quantile grid; defaults to 0.05..0.95 in steps of 0.05.
    pub grid: Vec<f64>,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            enabled: true,
            h: 0,
            grid: (1..=19).map(|i| i as f64 * 0.05).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelSection {
    pub q: f64,
    pub h_list: Vec<usize>,
    /// Estimation window length; defaults to half the usable frame.
    pub window_t0: Option<usize>,
    pub ci_level: f64,
    pub rolling_ci: bool,
    pub sweep: SweepSection,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self {
            q: 0.95,
            h_list: vec![1, 5],
            window_t0: None,
            ci_level: 0.90,
            rolling_ci: true,
            sweep: SweepSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TestSection {
    pub mu: f64,
    pub alpha: f64,
    /// HAC bandwidth; `None` applies floor(1.3 * m^(1/3)).
    pub hac_bandwidth: Option<usize>,
    pub per_window_variance: bool,
}

impl Default for TestSection {
    fn default() -> Self {
        Self {
            mu: 0.30,
            alpha: 0.05,
            hac_bandwidth: None,
            per_window_variance: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct OutputSection {
    pub dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub id: u32,
    pub date: NaiveDate,
    pub label: String,
}

/// Stressing-event overlay drawn as vertical lines by external plotters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventCalendar {
    pub events: Vec<Event>,
}

impl EventCalendar {
    /// The default set of sixteen market-stress events in the sample.
    pub fn default_events() -> Self {
        let raw: [(u32, &str, &str); 16] = [
            (1, "2015-08-29", "Greek government debt crisis"),
            (2, "2016-02-24", "EU-wide stress testing"),
            (3, "2016-06-23", "Brexit"),
            (4, "2016-12-04", "Italian constitutional referendum"),
            (5, "2017-04-23", "French political elections"),
            (6, "2017-06-07", "Rumours early Italian political elections"),
            (7, "2017-09-06", "Discussion on tapering"),
            (8, "2017-10-01", "Catalan referendum"),
            (9, "2018-02-05", "Stock market crash and increase in volatility"),
            (10, "2018-03-04", "Italian political elections"),
            (11, "2018-05-29", "Political crisis in Italy and in Spain"),
            (12, "2018-09-06", "Fitch confirms negative Italian outlook"),
            (
                13,
                "2018-10-19",
                "Moody's downgrade of the Italian senior unsecured bond ratings",
            ),
            (
                14,
                "2018-12-20",
                "Italian agreement with Brussels on the budget deficit",
            ),
            (15, "2019-02-07", "EU publishes Winter 2019 Economic Forecast"),
            (16, "2019-05-26", "European parliament elections"),
        ];
        EventCalendar {
            events: raw
                .iter()
                .map(|(id, date, label)| Event {
                    id: *id,
                    date: date.parse().expect("static date"),
                    label: label.to_string(),
                })
                .collect(),
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let mut seen = BTreeSet::new();
        for e in &self.events {
            if !seen.insert(e.id) {
                return Err(ConfigError::Invalid(format!("duplicate event id {}", e.id)));
            }
        }
        Ok(())
    }

    /// Splits into events inside and outside `[start, end]`.
    pub fn split_by_range(&self, start: NaiveDate, end: NaiveDate) -> (Vec<Event>, Vec<Event>) {
        self.events
            .iter()
            .cloned()
            .partition(|e| e.date >= start && e.date <= end)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: u64,
    pub sample: SampleSection,
    pub data: DataSection,
    pub filters: FiltersSection,
    pub calendar: TradingCalendar,
    pub indicators: IndicatorsSection,
    pub model: ModelSection,
    pub test: TestSection,
    pub output: OutputSection,
    /// Overrides the default event table when present.
    pub events: Option<Vec<Event>>,
}

impl PipelineConfig {
    pub fn parse_str(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    /// Loads a config file. Relative paths inside resolve against the
    /// config file's directory; the output directory also honors the
    /// `NEWSQUANT_OUT_DIR` environment variable.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg = Self::parse_str(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.anchor_paths(base);
        if let Ok(dir) = std::env::var(OUT_DIR_ENV) {
            if !dir.is_empty() {
                cfg.output.dir = PathBuf::from(dir);
            }
        }
        Ok(cfg)
    }

    pub fn anchor_paths(&mut self, base: &Path) {
        let anchor = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&p);
            }
        };
        if let Some(p) = self.data.market_csv.as_mut() {
            anchor(p);
        }
        for p in self.data.gkg_files.iter_mut() {
            anchor(p);
        }
        if let Some(p) = self.data.lexicon_file.as_mut() {
            anchor(p);
        }
        for p in self.data.emotion_csvs.values_mut() {
            anchor(p);
        }
        if self.output.dir.as_os_str().is_empty() {
            self.output.dir = base.join("out");
        } else {
            anchor(&mut self.output.dir);
        }
    }

    /// Structural checks that need no file access.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.sample.start >= self.sample.end {
            return Err(ConfigError::Invalid(format!(
                "sample start {} not before end {}",
                self.sample.start, self.sample.end
            )));
        }
        if !(self.model.q > 0.0 && self.model.q < 1.0) {
            return Err(ConfigError::Invalid(format!("q={} outside (0,1)", self.model.q)));
        }
        for &h in &self.model.h_list {
            if h > 5 {
                return Err(ConfigError::Invalid(format!("h={h} exceeds 5")));
            }
        }
        if self.model.h_list.is_empty() {
            return Err(ConfigError::Invalid("h_list is empty".into()));
        }
        if !(self.test.mu > 0.0 && self.test.mu < 1.0) {
            return Err(ConfigError::Invalid(format!(
                "mu={} outside (0,1)",
                self.test.mu
            )));
        }
        if !(self.test.alpha > 0.0 && self.test.alpha < 1.0) {
            return Err(ConfigError::Invalid(format!(
                "alpha={} outside (0,1)",
                self.test.alpha
            )));
        }
        if self.indicators.window_w == 0 {
            return Err(ConfigError::Invalid("indicator window must be >= 1".into()));
        }
        self.calendar
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        if let Some(events) = &self.events {
            EventCalendar {
                events: events.clone(),
            }
            .validate()?;
        }
        Ok(())
    }

    /// Checks that every referenced input exists (called before a run).
    pub fn validate_inputs(&self) -> Result<(), ConfigError> {
        let check = |p: &PathBuf| -> Result<(), ConfigError> {
            if p.exists() {
                Ok(())
            } else {
                Err(ConfigError::MissingFile(p.clone()))
            }
        };
        if let Some(p) = &self.data.market_csv {
            check(p)?;
        }
        for p in &self.data.gkg_files {
            check(p)?;
        }
        if let Some(p) = &self.data.lexicon_file {
            check(p)?;
        }
        for p in self.data.emotion_csvs.values() {
            check(p)?;
        }
        Ok(())
    }

    pub fn event_calendar(&self) -> EventCalendar {
        match &self.events {
            Some(events) => EventCalendar {
                events: events.clone(),
            },
            None => EventCalendar::default_events(),
        }
    }
}
