//! Rolling-window estimation and out-of-sample forecast evaluation.
//!
//! Frames pair the next day's spread change with today's market state and
//! lagged news indicators. Estimation at forecast origin t uses the window
//! of rows with target indices `t-h-T0+1 ..= t-h`, so every regressor the
//! window touches is dated at or before t.

use crate::emotion::EmotionSeries;
use crate::market::MarketSeries;
use crate::qreg::{
    fit_quantile, rank_inversion_ci, QregError, RegressionFrame, INTERCEPT,
};
use chrono::NaiveDate;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RollingError {
    #[error("market and news series share no dates")]
    CalendarMismatch,
    #[error("frame has {rows} rows; need at least {need}")]
    InsufficientRows { rows: usize, need: usize },
    #[error("window T0={t0} must exceed regressors + 10 = {min}")]
    WindowTooSmall { t0: usize, min: usize },
    #[error("quantile grid value {0} outside (0,1)")]
    BadGridValue(f64),
    #[error(transparent)]
    Fit(#[from] QregError),
}

/// Column names of the frame, fixed so downstream CSVs stay stable.
pub mod cols {
    pub const D_SPREAD: &str = "d_spread";
    pub const CRD: &str = "crd";
    pub const D_LIQ: &str = "d_liq";
    pub const D_VSTOXX: &str = "d_vstoxx";
    pub const LM: &str = "lm";
}

/// Builds the aligned design for one (q, h): target `dSpread_{t+1}` against
/// `{intercept, dSpread_t, CRD_t, dLIQ_t, dVSTOXX_t, LM_{t-h}, Emotion_{t-h}}`.
/// Spread, liquidity, and volatility arrive in levels and are differenced
/// here over consecutive open-market observations. Rows exist only where
/// every ingredient is available.
pub fn build_regression_frame(
    market: &MarketSeries,
    lm: &EmotionSeries,
    emotion: &EmotionSeries,
    q: f64,
    h: usize,
) -> Result<RegressionFrame, RollingError> {
    let n = market.len();
    let emotion_name = if emotion.emotion_name == cols::LM {
        format!("{}_emotion", emotion.emotion_name)
    } else {
        emotion.emotion_name.clone()
    };

    let mut row_dates = Vec::new();
    let mut target = Vec::new();
    let mut c_dspread = Vec::new();
    let mut c_crd = Vec::new();
    let mut c_dliq = Vec::new();
    let mut c_dvstoxx = Vec::new();
    let mut c_lm = Vec::new();
    let mut c_emotion = Vec::new();

    let start = 2.max(h + 1);
    for tau in start..n {
        let news_idx = tau - 1 - h;
        let (Some(lm_v), Some(e_v)) = (
            lm.standardized_at(market.dates[news_idx]),
            emotion.standardized_at(market.dates[news_idx]),
        ) else {
            continue;
        };
        row_dates.push(market.dates[tau]);
        target.push(market.spread[tau] - market.spread[tau - 1]);
        c_dspread.push(market.spread[tau - 1] - market.spread[tau - 2]);
        c_crd.push(market.crd[tau - 1]);
        c_dliq.push(market.liq[tau - 1] - market.liq[tau - 2]);
        c_dvstoxx.push(market.vstoxx[tau - 1] - market.vstoxx[tau - 2]);
        c_lm.push(lm_v);
        c_emotion.push(e_v);
    }

    if row_dates.is_empty() {
        let market_dates: std::collections::BTreeSet<_> = market.dates.iter().collect();
        let any_overlap = emotion
            .dates
            .iter()
            .zip(&emotion.standardized)
            .any(|(d, v)| v.is_some() && market_dates.contains(d));
        if !any_overlap {
            return Err(RollingError::CalendarMismatch);
        }
    }
    let p = 7;
    if row_dates.len() < p + 2 {
        return Err(RollingError::InsufficientRows {
            rows: row_dates.len(),
            need: p + 2,
        });
    }

    let n_rows = row_dates.len();
    RegressionFrame::new(
        q,
        h,
        row_dates,
        target,
        vec![
            (INTERCEPT.to_string(), vec![1.0; n_rows]),
            (cols::D_SPREAD.to_string(), c_dspread),
            (cols::CRD.to_string(), c_crd),
            (cols::D_LIQ.to_string(), c_dliq),
            (cols::D_VSTOXX.to_string(), c_dvstoxx),
            (cols::LM.to_string(), c_lm),
            (emotion_name.clone(), c_emotion),
        ],
        Some(emotion_name),
    )
    .map_err(RollingError::Fit)
}

#[derive(Debug, Clone, Serialize)]
pub struct RollingConfig {
    pub q: f64,
    pub h: usize,
    pub window_t0: usize,
    pub ci_level: f64,
    /// Rank-inversion intervals per window are expensive; reports can
    /// switch them off.
    pub compute_ci: bool,
}

impl RollingConfig {
    pub fn new(q: f64, h: usize, window_t0: usize) -> Self {
        Self {
            q,
            h,
            window_t0,
            ci_level: 0.90,
            compute_ci: true,
        }
    }

    fn validate(&self, frame: &RegressionFrame) -> Result<(), RollingError> {
        let min = frame.n_cols() + 10;
        if self.window_t0 <= min {
            return Err(RollingError::WindowTooSmall {
                t0: self.window_t0,
                min,
            });
        }
        Ok(())
    }
}

/// Splits the usable frame in two sub-samples of similar size.
pub fn default_window_t0(n_rows: usize) -> usize {
    n_rows / 2
}

/// Fit of one model variant on one window.
#[derive(Debug, Clone, Default, Serialize)]
pub struct ModelWindowResult {
    pub coefficients: BTreeMap<String, f64>,
    pub ci: BTreeMap<String, (f64, f64)>,
    pub pseudo_r1: Option<f64>,
    /// Columns dropped for this window because they were constant.
    pub dropped: Vec<String>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct WindowFitEntry {
    pub window_end: NaiveDate,
    pub augmented: ModelWindowResult,
    pub benchmark: ModelWindowResult,
    pub r1_difference: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RollingCoefficientPath {
    pub q: f64,
    pub h: usize,
    pub window_t0: usize,
    pub entries: Vec<WindowFitEntry>,
}

fn fit_window(frame: &RegressionFrame, ci_level: f64, compute_ci: bool) -> ModelWindowResult {
    // Constant columns inside a quiet window are dropped, not fatal; their
    // coefficients are simply missing for this window.
    let mut work = frame.clone();
    let mut dropped = Vec::new();
    for name in frame.degenerate_columns() {
        if let Ok(f) = work.without_column(&name) {
            work = f;
            dropped.push(name);
        }
    }
    match fit_quantile(&work) {
        Ok(fit) => {
            let mut ci = BTreeMap::new();
            if compute_ci {
                for name in work.names() {
                    if name == INTERCEPT {
                        continue;
                    }
                    if let Ok(interval) = rank_inversion_ci(&work, &fit, name, ci_level) {
                        ci.insert(name.clone(), interval);
                    }
                }
            }
            ModelWindowResult {
                coefficients: fit.coefficient_map(),
                ci,
                pseudo_r1: fit.pseudo_r1,
                dropped,
                error: None,
            }
        }
        Err(e) => ModelWindowResult {
            dropped,
            error: Some(e.to_string()),
            ..Default::default()
        },
    }
}

/// Re-estimates both model variants at every origin `t`, each time on the
/// length-T0 window of rows with target indices `t-h-T0+1 ..= t-h`, and
/// reports coefficients, intervals, and pseudo-R1 against the origin date.
pub fn rolling_fit(
    frame: &RegressionFrame,
    cfg: &RollingConfig,
) -> Result<RollingCoefficientPath, RollingError> {
    cfg.validate(frame)?;
    let n = frame.n_rows();
    let t0 = cfg.window_t0;
    let h = frame.h();
    let need = t0 + h.max(1);
    if n < need {
        return Err(RollingError::InsufficientRows { rows: n, need });
    }
    let emotion_col = frame
        .emotion_col()
        .ok_or_else(|| QregError::InvalidFrame("frame lacks an emotion column".into()))
        .map_err(RollingError::Fit)?
        .to_string();

    let ends: Vec<usize> = ((t0 + h - 1)..n).collect();
    let entries: Vec<WindowFitEntry> = ends
        .par_iter()
        .map(|&end| {
            let window = frame.window(end + 1 - h - t0, t0);
            let augmented = fit_window(&window, cfg.ci_level, cfg.compute_ci);
            let bench_frame = window
                .without_column(&emotion_col)
                .expect("emotion column exists");
            let benchmark = fit_window(&bench_frame, cfg.ci_level, cfg.compute_ci);
            let r1_difference = match (augmented.pseudo_r1, benchmark.pseudo_r1) {
                (Some(a), Some(b)) => Some(a - b),
                _ => None,
            };
            WindowFitEntry {
                window_end: frame.row_dates()[end],
                augmented,
                benchmark,
                r1_difference,
            }
        })
        .collect();

    Ok(RollingCoefficientPath {
        q: cfg.q,
        h: cfg.h,
        window_t0: t0,
        entries,
    })
}

/// One out-of-sample forecast comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ForecastRecord {
    pub target_date: NaiveDate,
    pub realized: f64,
    pub forecast_augmented: f64,
    pub forecast_benchmark: f64,
    pub loss_augmented: f64,
    pub loss_benchmark: f64,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct OosResult {
    pub records: Vec<ForecastRecord>,
    /// Windows skipped because a fit failed, with the reason.
    pub skipped: Vec<(NaiveDate, String)>,
}

fn forecast_with(
    coefficients: &BTreeMap<String, f64>,
    row: &[(String, f64)],
) -> f64 {
    // Dropped (degenerate) columns contribute nothing.
    row.iter()
        .map(|(name, x)| coefficients.get(name).copied().unwrap_or(0.0) * x)
        .sum()
}

/// Rolling one-step-ahead forecasts. For each forecast target row `r`, both
/// models are estimated on rows `r-T0-h .. r-h-1` (the h-respecting window)
/// and evaluated by check loss against the realized change.
pub fn oos_forecast_errors(
    frame: &RegressionFrame,
    cfg: &RollingConfig,
) -> Result<OosResult, RollingError> {
    cfg.validate(frame)?;
    let n = frame.n_rows();
    let t0 = cfg.window_t0;
    let h = frame.h();
    if n < t0 + h + 2 {
        return Err(RollingError::InsufficientRows {
            rows: n,
            need: t0 + h + 2,
        });
    }
    let emotion_col = frame
        .emotion_col()
        .ok_or_else(|| QregError::InvalidFrame("frame lacks an emotion column".into()))
        .map_err(RollingError::Fit)?
        .to_string();
    let q = frame.q();

    let targets: Vec<usize> = ((t0 + h)..n).collect();
    let outcomes: Vec<Result<ForecastRecord, (NaiveDate, String)>> = targets
        .par_iter()
        .map(|&r| {
            let date = frame.row_dates()[r];
            let window = frame.window(r - t0 - h, t0);
            let row = frame.row(r);
            let realized = frame.target()[r];

            let fit_model = |f: &RegressionFrame| -> Result<BTreeMap<String, f64>, String> {
                let mut work = f.clone();
                for name in f.degenerate_columns() {
                    if let Ok(smaller) = work.without_column(&name) {
                        work = smaller;
                    }
                }
                fit_quantile(&work)
                    .map(|fit| fit.coefficient_map())
                    .map_err(|e| e.to_string())
            };

            let augmented = fit_model(&window);
            let benchmark = window
                .without_column(&emotion_col)
                .map_err(|e| e.to_string())
                .and_then(|f| fit_model(&f));
            match (augmented, benchmark) {
                (Ok(aug), Ok(bench)) => {
                    let fa = forecast_with(&aug, &row);
                    let fb = forecast_with(&bench, &row);
                    Ok(ForecastRecord {
                        target_date: date,
                        realized,
                        forecast_augmented: fa,
                        forecast_benchmark: fb,
                        loss_augmented: crate::qreg::check_loss(realized - fa, q),
                        loss_benchmark: crate::qreg::check_loss(realized - fb, q),
                    })
                }
                (Err(e), _) | (_, Err(e)) => Err((date, e)),
            }
        })
        .collect();

    let mut result = OosResult::default();
    for item in outcomes {
        match item {
            Ok(rec) => result.records.push(rec),
            Err(skip) => result.skipped.push(skip),
        }
    }
    Ok(result)
}

/// One grid point of the exploratory quantile sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub q: f64,
    pub emotion: String,
    pub beta: f64,
    pub ci_lower: Option<f64>,
    pub ci_upper: Option<f64>,
}

/// Full-sample fit of the emotion coefficient per quantile in `grid`.
pub fn quantile_sweep(
    builder: impl Fn(f64) -> Result<RegressionFrame, RollingError> + Sync,
    grid: &[f64],
    ci_level: f64,
) -> Result<Vec<SweepRow>, RollingError> {
    for &q in grid {
        if !(q > 0.0 && q < 1.0) {
            return Err(RollingError::BadGridValue(q));
        }
    }
    grid.par_iter()
        .map(|&q| {
            let frame = builder(q)?;
            let emotion = frame
                .emotion_col()
                .ok_or_else(|| QregError::InvalidFrame("frame lacks an emotion column".into()))
                .map_err(RollingError::Fit)?
                .to_string();
            let fit = fit_quantile(&frame).map_err(RollingError::Fit)?;
            let beta = fit.coefficient(&emotion).expect("emotion coefficient");
            let ci = rank_inversion_ci(&frame, &fit, &emotion, ci_level).ok();
            Ok(SweepRow {
                q,
                emotion,
                beta,
                ci_lower: ci.map(|c| c.0),
                ci_upper: ci.map(|c| c.1),
            })
        })
        .collect()
}

/// Loss differentials `d_t = loss_augmented - loss_benchmark` with dates.
pub fn loss_differentials(records: &[ForecastRecord]) -> (Vec<NaiveDate>, Vec<f64>) {
    (
        records.iter().map(|r| r.target_date).collect(),
        records
            .iter()
            .map(|r| r.loss_augmented - r.loss_benchmark)
            .collect(),
    )
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Wide CSV of the rolling coefficient path: per window-end date, the
/// coefficient, interval, and pseudo-R1 columns for both variants.
pub fn path_to_csv(path: &RollingCoefficientPath, names: &[String]) -> String {
    let mut header = String::from("date");
    for n in names {
        let _ = write!(header, ",aug_{n},aug_{n}_lo,aug_{n}_hi");
    }
    for n in names {
        if path
            .entries
            .iter()
            .any(|e| e.benchmark.coefficients.contains_key(n))
        {
            let _ = write!(header, ",bench_{n},bench_{n}_lo,bench_{n}_hi");
        }
    }
    header.push_str(",r1_augmented,r1_benchmark,r1_difference\n");

    let mut out = header;
    for e in &path.entries {
        let _ = write!(out, "{}", e.window_end);
        for n in names {
            let coef = e.augmented.coefficients.get(n).copied();
            let ci = e.augmented.ci.get(n);
            let _ = write!(
                out,
                ",{},{},{}",
                fmt_opt(coef),
                fmt_opt(ci.map(|c| c.0)),
                fmt_opt(ci.map(|c| c.1))
            );
        }
        for n in names {
            if path
                .entries
                .iter()
                .any(|x| x.benchmark.coefficients.contains_key(n))
            {
                let coef = e.benchmark.coefficients.get(n).copied();
                let ci = e.benchmark.ci.get(n);
                let _ = write!(
                    out,
                    ",{},{},{}",
                    fmt_opt(coef),
                    fmt_opt(ci.map(|c| c.0)),
                    fmt_opt(ci.map(|c| c.1))
                );
            }
        }
        let _ = writeln!(
            out,
            ",{},{},{}",
            fmt_opt(e.augmented.pseudo_r1),
            fmt_opt(e.benchmark.pseudo_r1),
            fmt_opt(e.r1_difference)
        );
    }
    out
}

pub fn forecasts_to_csv(records: &[ForecastRecord]) -> String {
    let mut out = String::from(
        "date,realized,forecast_augmented,forecast_benchmark,loss_augmented,loss_benchmark\n",
    );
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.target_date,
            r.realized,
            r.forecast_augmented,
            r.forecast_benchmark,
            r.loss_augmented,
            r.loss_benchmark
        );
    }
    out
}

pub fn sweep_to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("q,emotion,beta,ci_lower,ci_upper\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.q,
            r.emotion,
            r.beta,
            fmt_opt(r.ci_lower),
            fmt_opt(r.ci_upper)
        );
    }
    out
}
