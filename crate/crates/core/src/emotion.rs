//! Daily emotion indicators: count shares, moving-average smoothing, and
//! unit-variance rescaling.
//!
//! The daily raw share for an emotion is
//! `share_s = WC_emotion,s / WC_s`, the emotion word count over the total
//! word count of the day's selected articles. The indicator at day `t` is
//! the mean share over a window of `w` open-market days ending at `t`,
//! divided by a scale constant chosen so the indicator has unit variance
//! over the scoping region.

use crate::gkg::GkgRecord;
use crate::stats;
use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EmotionError {
    #[error("no articles in bundle for {0}")]
    EmptyDay(NaiveDate),
    #[error("total word count is zero on {0}")]
    ZeroDenominator(NaiveDate),
    #[error("series of length {len} is shorter than window {window}")]
    WindowTooLong { len: usize, window: usize },
    #[error("series variance is zero over the scaling region")]
    DegenerateSeries,
    #[error("estimation-window scaling needs an estimation end date")]
    MissingEstimationBound,
    #[error("invalid lexicon: {0}")]
    InvalidLexicon(String),
    #[error("lexicon file: {0}")]
    Io(#[from] std::io::Error),
}

/// Maps one emotion name to the GCAM dimensions that count it. The raw word
/// list is carried for configurations that count from full text; GKG
/// metadata itself only exposes the GCAM counts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LexiconMap {
    pub emotion_name: String,
    #[serde(default)]
    pub gcam_keys: BTreeSet<String>,
    #[serde(default)]
    pub raw_word_list: BTreeSet<String>,
}

impl LexiconMap {
    pub fn validate(&self) -> Result<(), EmotionError> {
        if self.emotion_name.is_empty() {
            return Err(EmotionError::InvalidLexicon("empty emotion name".into()));
        }
        if self.gcam_keys.is_empty() && self.raw_word_list.is_empty() {
            return Err(EmotionError::InvalidLexicon(format!(
                "lexicon {:?} has neither gcam keys nor a word list",
                self.emotion_name
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Deserialize)]
struct LexiconFile {
    #[serde(default)]
    lexicon: Vec<LexiconFileEntry>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct LexiconFileEntry {
    name: String,
    #[serde(default)]
    gcam_keys: Vec<String>,
    /// Optional path to a newline-separated term list, relative to the
    /// lexicon file.
    word_list: Option<String>,
}

/// Parses the lexicon-map text. `base_dir` anchors relative word-list paths;
/// pass `None` to reject them.
pub fn parse_lexicons(text: &str, base_dir: Option<&Path>) -> Result<Vec<LexiconMap>, EmotionError> {
    let file: LexiconFile =
        toml::from_str(text).map_err(|e| EmotionError::InvalidLexicon(e.to_string()))?;
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for entry in file.lexicon {
        if !seen.insert(entry.name.clone()) {
            return Err(EmotionError::InvalidLexicon(format!(
                "duplicate emotion name {:?}",
                entry.name
            )));
        }
        let mut words = BTreeSet::new();
        if let Some(rel) = &entry.word_list {
            let dir = base_dir.ok_or_else(|| {
                EmotionError::InvalidLexicon("word_list paths not allowed here".into())
            })?;
            let text = std::fs::read_to_string(dir.join(rel))?;
            words.extend(
                text.lines()
                    .map(|l| l.trim().to_lowercase())
                    .filter(|l| !l.is_empty()),
            );
        }
        let lex = LexiconMap {
            emotion_name: entry.name,
            gcam_keys: entry.gcam_keys.into_iter().collect(),
            raw_word_list: words,
        };
        lex.validate()?;
        out.push(lex);
    }
    if out.is_empty() {
        return Err(EmotionError::InvalidLexicon("no lexicons defined".into()));
    }
    Ok(out)
}

pub fn load_lexicon_file(path: &Path) -> Result<Vec<LexiconMap>, EmotionError> {
    let text = std::fs::read_to_string(path)?;
    parse_lexicons(&text, path.parent())
}

/// One day's emotion and total word counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DailySentimentRow {
    pub date: NaiveDate,
    pub wc_emotion: u64,
    pub wc_total: u64,
    pub share: f64,
}

/// Sums the lexicon's GCAM counts and total word counts over one day's
/// bundle.
pub fn daily_emotion_share(
    date: NaiveDate,
    bundle: &[GkgRecord],
    lex: &LexiconMap,
) -> Result<DailySentimentRow, EmotionError> {
    if bundle.is_empty() {
        return Err(EmotionError::EmptyDay(date));
    }
    let mut wc_emotion = 0u64;
    let mut wc_total = 0u64;
    for record in bundle {
        for key in &lex.gcam_keys {
            wc_emotion += record.gcam_count(key);
        }
        wc_total += record.word_count.unwrap_or(0);
    }
    if wc_total == 0 {
        return Err(EmotionError::ZeroDenominator(date));
    }
    Ok(DailySentimentRow {
        date,
        wc_emotion,
        wc_total,
        share: wc_emotion as f64 / wc_total as f64,
    })
}

/// Moving average over the `w` most recent points. Output index `i`
/// corresponds to input index `i + w - 1`; earlier dates have no value.
pub fn smooth(shares: &[f64], w: usize) -> Result<Vec<f64>, EmotionError> {
    assert!(w >= 1, "window must be at least 1");
    if shares.len() < w {
        return Err(EmotionError::WindowTooLong {
            len: shares.len(),
            window: w,
        });
    }
    Ok(shares
        .windows(w)
        .map(|win| win.iter().sum::<f64>() / w as f64)
        .collect())
}

/// Which sample the unit-variance scale is computed on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScaleScope {
    #[default]
    FullSample,
    EstimationWindow,
}

/// Divides by the sample standard deviation over `scope_len` leading points
/// (the scoping region must be a prefix of the series here; callers slice
/// accordingly). Returns the scaled series and the scale.
pub fn standardize(values: &[f64], scope_len: usize) -> Result<(Vec<f64>, f64), EmotionError> {
    let region = &values[..scope_len.min(values.len())];
    let sd = stats::sample_sd(region).ok_or(EmotionError::DegenerateSeries)?;
    if sd <= 0.0 {
        return Err(EmotionError::DegenerateSeries);
    }
    Ok((values.iter().map(|v| v / sd).collect(), sd))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmotionOptions {
    pub window_w: usize,
    /// When a day has no articles: skip back to earlier open-market days
    /// (true) or leave the smoothed value missing (false).
    pub carry_forward: bool,
    pub scale_scope: ScaleScope,
    /// Last date of the estimation window; required for
    /// `ScaleScope::EstimationWindow`.
    pub estimation_end: Option<NaiveDate>,
}

impl Default for EmotionOptions {
    fn default() -> Self {
        Self {
            window_w: 5,
            carry_forward: false,
            scale_scope: ScaleScope::FullSample,
            estimation_end: None,
        }
    }
}

/// Daily standardized indicator for one emotion, country, and focus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmotionSeries {
    pub emotion_name: String,
    pub country: String,
    pub focus_label: String,
    pub window_w: usize,
    pub scale: f64,
    pub scale_scope: ScaleScope,
    pub dates: Vec<NaiveDate>,
    pub raw_share: Vec<Option<f64>>,
    pub smoothed: Vec<Option<f64>>,
    pub standardized: Vec<Option<f64>>,
}

impl EmotionSeries {
    pub fn standardized_at(&self, date: NaiveDate) -> Option<f64> {
        let i = self.dates.binary_search(&date).ok()?;
        self.standardized[i]
    }

    /// CSV with one row per grid date; missing values are empty cells.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("date,raw_share,smoothed,standardized\n");
        for i in 0..self.dates.len() {
            let fmt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{}",
                self.dates[i],
                fmt(self.raw_share[i]),
                fmt(self.smoothed[i]),
                fmt(self.standardized[i]),
            );
        }
        out
    }

    /// Parses a series back from its CSV form. Country and focus are not
    /// part of the format and come back as placeholders.
    pub fn from_csv(name: &str, text: &str) -> Result<EmotionSeries, EmotionError> {
        let mut lines = text.lines();
        match lines.next() {
            Some("date,raw_share,smoothed,standardized") => {}
            other => {
                return Err(EmotionError::InvalidLexicon(format!(
                    "bad emotion csv header: {other:?}"
                )))
            }
        }
        let mut dates = Vec::new();
        let mut raw = Vec::new();
        let mut smoothed = Vec::new();
        let mut standardized = Vec::new();
        for (i, line) in lines.enumerate() {
            if line.is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split(',').collect();
            if parts.len() != 4 {
                return Err(EmotionError::InvalidLexicon(format!(
                    "emotion csv row {} has {} fields",
                    i + 2,
                    parts.len()
                )));
            }
            let date: NaiveDate = parts[0].parse().map_err(|e| {
                EmotionError::InvalidLexicon(format!("emotion csv row {}: {e}", i + 2))
            })?;
            let cell = |s: &str| -> Result<Option<f64>, EmotionError> {
                if s.is_empty() {
                    return Ok(None);
                }
                let v: f64 = s.parse().map_err(|_| {
                    EmotionError::InvalidLexicon(format!("bad number {s:?} in emotion csv"))
                })?;
                if !v.is_finite() {
                    return Err(EmotionError::InvalidLexicon(format!(
                        "non-finite value {s:?} in emotion csv"
                    )));
                }
                Ok(Some(v))
            };
            if dates.last().is_some_and(|&d: &NaiveDate| d >= date) {
                return Err(EmotionError::InvalidLexicon(
                    "emotion csv dates must be strictly increasing".into(),
                ));
            }
            dates.push(date);
            raw.push(cell(parts[1])?);
            smoothed.push(cell(parts[2])?);
            standardized.push(cell(parts[3])?);
        }
        Ok(EmotionSeries {
            emotion_name: name.to_string(),
            country: "csv".into(),
            focus_label: "csv".into(),
            window_w: 0,
            scale: 1.0,
            scale_scope: ScaleScope::FullSample,
            dates,
            raw_share: raw,
            smoothed,
            standardized,
        })
    }

    /// Recomputes the scale over a new scoping region and rescales in place.
    pub fn restandardize(
        &mut self,
        scope: ScaleScope,
        estimation_end: Option<NaiveDate>,
    ) -> Result<(), EmotionError> {
        let bound = match scope {
            ScaleScope::FullSample => None,
            ScaleScope::EstimationWindow => {
                Some(estimation_end.ok_or(EmotionError::MissingEstimationBound)?)
            }
        };
        let region: Vec<f64> = self
            .dates
            .iter()
            .zip(&self.smoothed)
            .filter(|(d, _)| bound.is_none_or(|b| **d <= b))
            .filter_map(|(_, v)| *v)
            .collect();
        let sd = stats::sample_sd(&region).ok_or(EmotionError::DegenerateSeries)?;
        if sd <= 0.0 {
            return Err(EmotionError::DegenerateSeries);
        }
        self.scale = sd;
        self.scale_scope = scope;
        self.standardized = self
            .smoothed
            .iter()
            .map(|v| v.map(|x| x / sd))
            .collect();
        Ok(())
    }
}

/// Builds the full indicator series for one lexicon over the trading-day
/// grid. Days absent from `bundles` have a missing raw share.
pub fn build_emotion_series(
    grid: &[NaiveDate],
    bundles: &BTreeMap<NaiveDate, Vec<GkgRecord>>,
    lex: &LexiconMap,
    country: &str,
    focus_label: &str,
    opts: &EmotionOptions,
) -> Result<EmotionSeries, EmotionError> {
    assert!(opts.window_w >= 1, "window must be at least 1");
    let mut raw: Vec<Option<f64>> = Vec::with_capacity(grid.len());
    for &date in grid {
        match bundles.get(&date) {
            Some(bundle) if !bundle.is_empty() => {
                raw.push(Some(daily_emotion_share(date, bundle, lex)?.share));
            }
            _ => raw.push(None),
        }
    }

    let w = opts.window_w;
    let mut smoothed: Vec<Option<f64>> = vec![None; grid.len()];
    if opts.carry_forward {
        let mut available: Vec<f64> = Vec::new();
        for (i, share) in raw.iter().enumerate() {
            if let Some(s) = share {
                available.push(*s);
            }
            if available.len() >= w {
                let tail = &available[available.len() - w..];
                smoothed[i] = Some(tail.iter().sum::<f64>() / w as f64);
            }
        }
    } else {
        for i in (w - 1)..grid.len() {
            let window = &raw[i + 1 - w..=i];
            if window.iter().all(Option::is_some) {
                let sum: f64 = window.iter().map(|v| v.unwrap()).sum();
                smoothed[i] = Some(sum / w as f64);
            }
        }
    }

    let mut series = EmotionSeries {
        emotion_name: lex.emotion_name.clone(),
        country: country.to_string(),
        focus_label: focus_label.to_string(),
        window_w: w,
        scale: 1.0,
        scale_scope: opts.scale_scope,
        dates: grid.to_vec(),
        raw_share: raw,
        standardized: smoothed.clone(),
        smoothed,
    };
    series.restandardize(opts.scale_scope, opts.estimation_end)?;
    Ok(series)
}

/// The overall-negativity control series, built like any other indicator but
/// from the negative word-list lexicon.
pub fn lm_indicator(
    grid: &[NaiveDate],
    bundles: &BTreeMap<NaiveDate, Vec<GkgRecord>>,
    lm_lexicon: &LexiconMap,
    country: &str,
    focus_label: &str,
    opts: &EmotionOptions,
) -> Result<EmotionSeries, EmotionError> {
    build_emotion_series(grid, bundles, lm_lexicon, country, focus_label, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::{TimeZone, Utc};

    fn record(gcam: &[(&str, u64)]) -> GkgRecord {
        let map: BTreeMap<String, u64> =
            gcam.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        GkgRecord {
            record_id: "r".into(),
            published_at_utc: Utc.with_ymd_and_hms(2018, 5, 29, 10, 0, 0).unwrap(),
            outlet: "o".into(),
            themes: vec![],
            locations: vec![],
            word_count: map.get("wc").copied(),
            gcam: map,
        }
    }

    fn lex(keys: &[&str]) -> LexiconMap {
        LexiconMap {
            emotion_name: "distress".into(),
            gcam_keys: keys.iter().map(|k| k.to_string()).collect(),
            raw_word_list: BTreeSet::new(),
        }
    }

    fn day(n: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(2018, 6, n).unwrap()
    }

    #[test]
    fn share_is_emotion_over_total() {
        let bundle = vec![
            record(&[("wc", 100), ("c1", 3)]),
            record(&[("wc", 150), ("c1", 2)]),
        ];
        let row = daily_emotion_share(day(1), &bundle, &lex(&["c1"])).unwrap();
        assert_eq!(row.wc_emotion, 5);
        assert_eq!(row.wc_total, 250);
        assert!((row.share - 0.02).abs() < 1e-15);
    }

    #[test]
    fn no_matching_keys_gives_zero_share() {
        let bundle = vec![record(&[("wc", 100), ("c1", 3)])];
        let row = daily_emotion_share(day(1), &bundle, &lex(&["other"])).unwrap();
        assert_eq!(row.share, 0.0);
    }

    #[test]
    fn empty_day_and_zero_denominator_error() {
        assert!(matches!(
            daily_emotion_share(day(1), &[], &lex(&["c1"])),
            Err(EmotionError::EmptyDay(_))
        ));
        let bundle = vec![record(&[("c1", 3)])];
        assert!(matches!(
            daily_emotion_share(day(1), &bundle, &lex(&["c1"])),
            Err(EmotionError::ZeroDenominator(_))
        ));
    }

    #[test]
    fn smooth_of_constants_is_constant() {
        let s = smooth(&[0.4; 9], 5).unwrap();
        assert_eq!(s.len(), 5);
        assert!(s.iter().all(|v| (v - 0.4).abs() < 1e-15));
    }

    #[test]
    fn smooth_linear_ramp() {
        let s = smooth(&[0.01, 0.02, 0.03, 0.04, 0.05], 5).unwrap();
        assert_eq!(s.len(), 1);
        assert!((s[0] - 0.03).abs() < 1e-15);
    }

    #[test]
    fn smooth_rejects_short_series() {
        assert!(matches!(
            smooth(&[1.0, 2.0], 3),
            Err(EmotionError::WindowTooLong { len: 2, window: 3 })
        ));
    }

    #[test]
    fn standardize_divides_by_sample_sd() {
        // sd of {0, 2, 4} is 2
        let (scaled, sd) = standardize(&[0.0, 2.0, 4.0], 3).unwrap();
        assert!((sd - 2.0).abs() < 1e-12);
        assert_eq!(scaled, vec![0.0, 1.0, 2.0]);
        assert!(matches!(
            standardize(&[1.0, 1.0, 1.0], 3),
            Err(EmotionError::DegenerateSeries)
        ));
    }

    fn bundles_for(days: &[(u32, u64, u64)]) -> BTreeMap<NaiveDate, Vec<GkgRecord>> {
        days.iter()
            .map(|(d, emo, wc)| {
                (day(*d), vec![record(&[("wc", *wc), ("c1", *emo)])])
            })
            .collect()
    }

    #[test]
    fn missing_days_stay_missing_without_carry_forward() {
        let grid: Vec<NaiveDate> = (1..=8).map(day).collect();
        // day 4 has no bundle
        let bundles = bundles_for(&[
            (1, 1, 100),
            (2, 2, 100),
            (3, 3, 100),
            (5, 5, 100),
            (6, 6, 100),
            (7, 7, 100),
            (8, 8, 100),
        ]);
        let opts = EmotionOptions {
            window_w: 3,
            ..Default::default()
        };
        let s = build_emotion_series(&grid, &bundles, &lex(&["c1"]), "IT", "domestic-IT", &opts)
            .unwrap();
        assert!(s.smoothed[2].is_some());
        // windows touching the missing day are missing
        assert!(s.smoothed[3].is_none());
        assert!(s.smoothed[4].is_none());
        assert!(s.smoothed[5].is_none());
        assert!(s.smoothed[6].is_some());
    }

    #[test]
    fn carry_forward_skips_to_available_days() {
        let grid: Vec<NaiveDate> = (1..=6).map(day).collect();
        let bundles = bundles_for(&[(1, 1, 100), (2, 2, 100), (4, 4, 100), (6, 8, 100)]);
        let opts = EmotionOptions {
            window_w: 3,
            carry_forward: true,
            ..Default::default()
        };
        let s = build_emotion_series(&grid, &bundles, &lex(&["c1"]), "IT", "domestic-IT", &opts)
            .unwrap();
        // day 4 uses shares from days 1, 2, 4; day 5 has no new data
        let want = (0.01 + 0.02 + 0.04) / 3.0;
        assert!((s.smoothed[3].unwrap() - want).abs() < 1e-15);
        assert_eq!(s.smoothed[4], s.smoothed[3]);
        // day 6 rolls to days 2, 4, 6
        let want6 = (0.02 + 0.04 + 0.08) / 3.0;
        assert!((s.smoothed[5].unwrap() - want6).abs() < 1e-15);
        assert!(s.smoothed[1].is_none());
    }

    #[test]
    fn full_sample_standardization_hits_unit_variance() {
        let grid: Vec<NaiveDate> = (1..=8).map(day).collect();
        let bundles = bundles_for(&[
            (1, 1, 100),
            (2, 4, 100),
            (3, 2, 100),
            (4, 7, 100),
            (5, 3, 100),
            (6, 9, 100),
            (7, 2, 100),
            (8, 5, 100),
        ]);
        let opts = EmotionOptions {
            window_w: 2,
            ..Default::default()
        };
        let s = build_emotion_series(&grid, &bundles, &lex(&["c1"]), "IT", "domestic-IT", &opts)
            .unwrap();
        let vals: Vec<f64> = s.standardized.iter().flatten().copied().collect();
        let sd = stats::sample_sd(&vals).unwrap();
        assert!((sd - 1.0).abs() < 1e-12);
    }

    #[test]
    fn estimation_window_scale_matches_hand_recomputation() {
        let grid: Vec<NaiveDate> = (1..=10).map(day).collect();
        let bundles = bundles_for(&[
            (1, 1, 100),
            (2, 4, 100),
            (3, 2, 100),
            (4, 7, 100),
            (5, 3, 100),
            (6, 9, 100),
            (7, 2, 100),
            (8, 5, 100),
            (9, 11, 100),
            (10, 6, 100),
        ]);
        let opts = EmotionOptions {
            window_w: 2,
            scale_scope: ScaleScope::EstimationWindow,
            estimation_end: Some(day(6)),
            ..Default::default()
        };
        let s = build_emotion_series(&grid, &bundles, &lex(&["c1"]), "IT", "domestic-IT", &opts)
            .unwrap();
        // hand recomputation: sd over the smoothed values up to day 6 only
        let window_vals: Vec<f64> = s
            .dates
            .iter()
            .zip(&s.smoothed)
            .filter(|(d, _)| **d <= day(6))
            .filter_map(|(_, v)| *v)
            .collect();
        let sd = stats::sample_sd(&window_vals).unwrap();
        assert!((s.scale - sd).abs() < 1e-15);
        // evaluation-segment values are smoothed / window-sd
        for i in 0..grid.len() {
            if let (Some(sm), Some(st)) = (s.smoothed[i], s.standardized[i]) {
                assert!((st - sm / sd).abs() < 1e-15);
            }
        }
        // the evaluation segment is generally not unit variance
        let all: Vec<f64> = s.standardized.iter().flatten().copied().collect();
        assert!((stats::sample_sd(&all).unwrap() - 1.0).abs() > 1e-6);
    }

    #[test]
    fn degenerate_series_is_an_error() {
        let grid: Vec<NaiveDate> = (1..=4).map(day).collect();
        let bundles = bundles_for(&[(1, 0, 100), (2, 0, 100), (3, 0, 100), (4, 0, 100)]);
        let opts = EmotionOptions {
            window_w: 2,
            ..Default::default()
        };
        let err =
            build_emotion_series(&grid, &bundles, &lex(&["c1"]), "IT", "domestic-IT", &opts)
                .unwrap_err();
        assert!(matches!(err, EmotionError::DegenerateSeries));
    }

    #[test]
    fn lexicon_parsing_validates() {
        let ok = parse_lexicons(
            "[[lexicon]]\nname = \"distress\"\ngcam_keys = [\"c1\"]\n",
            None,
        )
        .unwrap();
        assert_eq!(ok[0].emotion_name, "distress");
        assert!(parse_lexicons("[[lexicon]]\nname = \"x\"\n", None).is_err());
        assert!(parse_lexicons(
            "[[lexicon]]\nname=\"a\"\ngcam_keys=[\"k\"]\n[[lexicon]]\nname=\"a\"\ngcam_keys=[\"k\"]\n",
            None
        )
        .is_err());
    }
}
