//! End-to-end orchestration: ingest, indicators, frames, rolling fits,
//! out-of-sample forecasts, fluctuation tests, and the report bundle.
//!
//! A run is a pure function of its configuration and input files: all
//! randomness flows from the config seed, map-ordered containers keep
//! serialization stable, and no output embeds a timestamp, so identical
//! runs produce byte-identical bundles.

use crate::config::{ConfigError, PipelineConfig};
use crate::emotion::{
    build_emotion_series, load_lexicon_file, EmotionOptions, EmotionSeries, LexiconMap, ScaleScope,
};
use crate::fluct::{
    degenerate_path, fluctuation_statistics, Bandwidth, FluctError, FluctuationConfig,
    LossDifferentialSeries,
};
use crate::gkg::{parse_gkg_files, select_articles, GkgRecord, SelectionResult};
use crate::market::{descriptive_stats, load_market_csv, market_to_csv, stats_to_csv, MarketSeries};
use crate::rolling::{
    self, build_regression_frame, default_window_t0, loss_differentials, oos_forecast_errors,
    quantile_sweep, rolling_fit, RollingConfig,
};
use chrono::NaiveDate;
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("stage {stage}: {message}")]
    Stage { stage: &'static str, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn stage_err<E: std::fmt::Display>(stage: &'static str) -> impl Fn(E) -> PipelineError {
    move |e| PipelineError::Stage {
        stage,
        message: e.to_string(),
    }
}

/// Everything a run produces, in memory, keyed by output file name.
#[derive(Debug, Default)]
pub struct ReportContent {
    pub files: BTreeMap<String, String>,
    pub warnings: Vec<String>,
    pub inputs: BTreeMap<String, String>,
    pub config_echo: serde_json::Value,
    pub seed: u64,
}

/// A written report bundle: file digests plus the manifest location.
#[derive(Debug, Clone, Serialize)]
pub struct ReportBundle {
    pub out_dir: PathBuf,
    pub outputs: BTreeMap<String, String>,
    pub warnings: Vec<String>,
    pub manifest_path: PathBuf,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for b in digest {
        let _ = write!(out, "{b:02x}");
    }
    out
}

fn digest_file(path: &Path) -> Result<String, PipelineError> {
    Ok(sha256_hex(&std::fs::read(path)?))
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    version: &'static str,
    seed: u64,
    config: &'a serde_json::Value,
    inputs: &'a BTreeMap<String, String>,
    outputs: &'a BTreeMap<String, String>,
    warnings: &'a [String],
}

/// Writes every file of the bundle plus `manifest.json`; returns digests.
/// Emission is idempotent: re-emitting the same content produces
/// byte-identical files.
pub fn emit_report(content: &ReportContent, out_dir: &Path) -> Result<ReportBundle, PipelineError> {
    std::fs::create_dir_all(out_dir)?;
    let mut outputs = BTreeMap::new();
    for (name, text) in &content.files {
        let path = out_dir.join(name);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        std::fs::write(&path, text.as_bytes())?;
        outputs.insert(name.clone(), sha256_hex(text.as_bytes()));
    }
    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION"),
        seed: content.seed,
        config: &content.config_echo,
        inputs: &content.inputs,
        outputs: &outputs,
        warnings: &content.warnings,
    };
    let manifest_text =
        serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
    let manifest_path = out_dir.join("manifest.json");
    std::fs::write(&manifest_path, manifest_text.as_bytes())?;
    outputs.insert("manifest.json".into(), sha256_hex(manifest_text.as_bytes()));
    Ok(ReportBundle {
        out_dir: out_dir.to_path_buf(),
        outputs,
        warnings: content.warnings.clone(),
        manifest_path,
    })
}

fn records_to_jsonl(buckets: &BTreeMap<NaiveDate, Vec<GkgRecord>>) -> String {
    #[derive(Serialize)]
    struct Row<'a> {
        trading_date: NaiveDate,
        record: &'a GkgRecord,
    }
    let mut out = String::new();
    for (date, bundle) in buckets {
        for record in bundle {
            let row = Row {
                trading_date: *date,
                record,
            };
            out.push_str(&serde_json::to_string(&row).expect("record serializes"));
            out.push('\n');
        }
    }
    out
}

fn volume_csv(selection: &SelectionResult) -> String {
    let mut out = String::from("date,count\n");
    for (date, count) in selection.daily_volume() {
        let _ = writeln!(out, "{date},{count}");
    }
    out
}

fn fmt_q(q: f64) -> String {
    format!("{q}").replace('.', "p")
}

/// News-derived inputs of a run: the control series plus one series per
/// emotion under test.
pub struct IndicatorSet {
    pub lm: EmotionSeries,
    pub emotions: Vec<EmotionSeries>,
}

/// Builds indicator series from selected article bundles.
pub fn indicators_from_bundles(
    cfg: &PipelineConfig,
    selection: &SelectionResult,
    lexicons: &[LexiconMap],
) -> Result<IndicatorSet, PipelineError> {
    let grid = cfg
        .calendar
        .trading_days(cfg.sample.start, cfg.sample.end);
    let opts = EmotionOptions {
        window_w: cfg.indicators.window_w,
        carry_forward: cfg.indicators.carry_forward,
        // Scaling to the estimation window happens later, once the frame
        // length fixes the window boundary.
        scale_scope: ScaleScope::FullSample,
        estimation_end: None,
    };
    let focus = cfg.filters.focus.label();
    let mut lm = None;
    let mut emotions = Vec::new();
    for lex in lexicons {
        let series = build_emotion_series(
            &grid,
            &selection.buckets,
            lex,
            &cfg.sample.country,
            &focus,
            &opts,
        )
        .map_err(stage_err("indicators"))?;
        if lex.emotion_name == cfg.data.lm_lexicon {
            lm = Some(series);
        } else {
            emotions.push(series);
        }
    }
    let lm = lm.ok_or_else(|| PipelineError::Stage {
        stage: "indicators",
        message: format!(
            "lexicon file defines no {:?} control lexicon",
            cfg.data.lm_lexicon
        ),
    })?;
    if emotions.is_empty() {
        return Err(PipelineError::Stage {
            stage: "indicators",
            message: "no emotion lexicons besides the control".into(),
        });
    }
    Ok(IndicatorSet { lm, emotions })
}

/// Ingest stage: parse, filter, and bucket the configured GKG files.
pub fn run_ingest(cfg: &PipelineConfig) -> Result<(SelectionResult, String), PipelineError> {
    if cfg.data.gkg_files.is_empty() {
        return Err(PipelineError::Config(ConfigError::Invalid(
            "no gkg_files configured".into(),
        )));
    }
    let filter = cfg.filters.to_filter_config();
    filter
        .validate()
        .map_err(|e| PipelineError::Config(ConfigError::Invalid(e.to_string())))?;
    let ingest = parse_gkg_files(&cfg.data.gkg_files, &cfg.data.gkg_schema)
        .map_err(stage_err("ingest"))?;
    let in_range = ingest.records.into_iter().filter(|r| {
        let d = r.published_at_utc.date_naive();
        d >= cfg.sample.start - chrono::Duration::days(7) && d <= cfg.sample.end
    });
    let mut selection = select_articles(in_range, &filter, &cfg.calendar);
    selection
        .buckets
        .retain(|d, _| *d >= cfg.sample.start && *d <= cfg.sample.end);
    let stats_json = serde_json::json!({
        "selection": selection.stats,
        "parse_errors": ingest.parse_errors,
        "source_gap_warnings": selection.warnings,
    });
    let stats_text = serde_json::to_string_pretty(&stats_json).expect("stats serialize") + "\n";
    Ok((selection, stats_text))
}

/// Loads pre-built indicator CSVs from the config's `emotion_csvs` map.
pub fn load_indicator_csvs(cfg: &PipelineConfig) -> Result<IndicatorSet, PipelineError> {
    let mut lm = None;
    let mut emotions = Vec::new();
    for (name, path) in &cfg.data.emotion_csvs {
        let text = std::fs::read_to_string(path)?;
        let series = EmotionSeries::from_csv(name, &text).map_err(stage_err("indicators"))?;
        if name == &cfg.data.lm_lexicon {
            lm = Some(series);
        } else {
            emotions.push(series);
        }
    }
    let lm = lm.ok_or_else(|| PipelineError::Stage {
        stage: "indicators",
        message: format!(
            "emotion_csvs must include the {:?} control series",
            cfg.data.lm_lexicon
        ),
    })?;
    if emotions.is_empty() {
        return Err(PipelineError::Stage {
            stage: "indicators",
            message: "no emotion series besides the control".into(),
        });
    }
    Ok(IndicatorSet { lm, emotions })
}

fn scaled_for_run(
    series: &EmotionSeries,
    scope: ScaleScope,
    boundary: Option<NaiveDate>,
) -> Result<EmotionSeries, PipelineError> {
    match scope {
        ScaleScope::FullSample => Ok(series.clone()),
        ScaleScope::EstimationWindow => {
            let mut s = series.clone();
            s.restandardize(ScaleScope::EstimationWindow, boundary)
                .map_err(stage_err("indicators"))?;
            Ok(s)
        }
    }
}

/// Full pipeline: every stage for every (emotion, h) combination, assembled
/// into an in-memory report.
pub fn build_report(cfg: &PipelineConfig) -> Result<ReportContent, PipelineError> {
    cfg.validate()?;
    cfg.validate_inputs()?;

    let mut content = ReportContent {
        seed: cfg.seed,
        config_echo: serde_json::to_value(cfg).expect("config serializes"),
        ..Default::default()
    };

    // Input digests for the manifest.
    let mut digest_input = |p: &PathBuf| -> Result<(), PipelineError> {
        content
            .inputs
            .insert(p.display().to_string(), digest_file(p)?);
        Ok(())
    };
    if let Some(p) = &cfg.data.market_csv {
        digest_input(p)?;
    }
    for p in &cfg.data.gkg_files {
        digest_input(p)?;
    }
    if let Some(p) = &cfg.data.lexicon_file {
        digest_input(p)?;
    }
    for p in cfg.data.emotion_csvs.values() {
        digest_input(p)?;
    }

    // Market data.
    let market_path = cfg
        .data
        .market_csv
        .as_ref()
        .ok_or_else(|| ConfigError::Invalid("data.market_csv is required".into()))?;
    let market: MarketSeries = load_market_csv(market_path, &cfg.data.market_schema, &cfg.sample.country)
        .map_err(stage_err("market"))?
        .clip(cfg.sample.start, cfg.sample.end);
    if market.is_empty() {
        return Err(PipelineError::Stage {
            stage: "market",
            message: "no market observations inside the sample".into(),
        });
    }
    let stats = descriptive_stats(&market, true).map_err(stage_err("market"))?;
    content
        .files
        .insert("descriptive_stats.csv".into(), stats_to_csv(&stats));

    // News indicators, from GKG ingest or from pre-built CSVs.
    let set = if cfg.data.emotion_csvs.is_empty() {
        let lexicon_path = cfg
            .data
            .lexicon_file
            .as_ref()
            .ok_or_else(|| ConfigError::Invalid("data.lexicon_file is required".into()))?;
        let lexicons = load_lexicon_file(lexicon_path).map_err(stage_err("lexicons"))?;

        let (selection, ingest_stats) = run_ingest(cfg)?;
        for w in &selection.warnings {
            content.warnings.push(format!(
                "source gap on {}: {} articles vs trailing median {}",
                w.date, w.count, w.trailing_median
            ));
        }
        content.files.insert("volume.csv".into(), volume_csv(&selection));
        content
            .files
            .insert("selected.jsonl".into(), records_to_jsonl(&selection.buckets));
        content.files.insert("ingest_stats.json".into(), ingest_stats);
        indicators_from_bundles(cfg, &selection, &lexicons)?
    } else {
        load_indicator_csvs(cfg)?
    };
    content.files.insert(
        format!("emotions_{}.csv", set.lm.emotion_name),
        set.lm.to_csv(),
    );
    for e in &set.emotions {
        content
            .files
            .insert(format!("emotions_{}.csv", e.emotion_name), e.to_csv());
    }

    // Per (emotion, h): frame, rolling path, forecasts, fluctuation test.
    for emotion in &set.emotions {
        for &h in &cfg.model.h_list {
            run_model_stage(cfg, &market, &set.lm, emotion, h, &mut content)?;
        }
        if cfg.model.sweep.enabled {
            run_sweep_stage(cfg, &market, &set.lm, emotion, &mut content)?;
        }
    }

    // Event overlay restricted to the sample.
    let events = cfg.event_calendar();
    events.validate()?;
    let (inside, outside) = events.split_by_range(cfg.sample.start, cfg.sample.end);
    for e in &outside {
        content.warnings.push(format!(
            "event {} ({}) outside the sample range, excluded",
            e.id, e.date
        ));
    }
    let mut events_csv = String::from("id,date,label\n");
    for e in &inside {
        let _ = writeln!(events_csv, "{},{},{}", e.id, e.date, e.label.replace(',', ";"));
    }
    content.files.insert("events.csv".into(), events_csv);

    Ok(content)
}

fn run_model_stage(
    cfg: &PipelineConfig,
    market: &MarketSeries,
    lm: &EmotionSeries,
    emotion: &EmotionSeries,
    h: usize,
    content: &mut ReportContent,
) -> Result<(), PipelineError> {
    let q = cfg.model.q;
    let probe = build_regression_frame(market, lm, emotion, q, h).map_err(stage_err("frame"))?;
    let t0 = cfg
        .model
        .window_t0
        .unwrap_or_else(|| default_window_t0(probe.n_rows()));

    let boundary = cfg
        .indicators
        .estimation_end
        .or_else(|| probe.row_dates().get(t0.saturating_sub(1)).copied());
    let lm_run = scaled_for_run(lm, cfg.indicators.scale_scope, boundary)?;
    let emotion_run = scaled_for_run(emotion, cfg.indicators.scale_scope, boundary)?;
    let frame = build_regression_frame(market, &lm_run, &emotion_run, q, h)
        .map_err(stage_err("frame"))?;

    let rcfg = RollingConfig {
        q,
        h,
        window_t0: t0,
        ci_level: cfg.model.ci_level,
        compute_ci: cfg.model.rolling_ci,
    };
    let tag = format!("{}_q{}_h{}", emotion.emotion_name, fmt_q(q), h);

    let path = rolling_fit(&frame, &rcfg).map_err(stage_err("rolling"))?;
    content.files.insert(
        format!("coeffpath_{tag}.csv"),
        rolling::path_to_csv(&path, frame.names()),
    );

    let oos = oos_forecast_errors(&frame, &rcfg).map_err(stage_err("forecast"))?;
    for (date, reason) in &oos.skipped {
        content
            .warnings
            .push(format!("forecast window ending {date} skipped: {reason}"));
    }
    content.files.insert(
        format!("forecasts_{tag}.csv"),
        rolling::forecasts_to_csv(&oos.records),
    );

    let (dates, values) = loss_differentials(&oos.records);
    let series = LossDifferentialSeries::new(dates, values).map_err(stage_err("fluctuation"))?;
    let mut fcfg = FluctuationConfig::from_table(cfg.test.mu, cfg.test.alpha, series.n_oos())
        .map_err(stage_err("fluctuation"))?;
    if let Some(b) = cfg.test.hac_bandwidth {
        fcfg.hac_bandwidth = Bandwidth::Fixed(b);
    }
    fcfg.per_window_variance = cfg.test.per_window_variance;
    let fpath = match fluctuation_statistics(&series, &fcfg) {
        Ok(p) => p,
        Err(FluctError::ZeroVariance) => {
            content.warnings.push(format!(
                "fluctuation test for {tag}: zero-variance loss differentials, verdicts inconclusive"
            ));
            degenerate_path(&series, &fcfg)
        }
        Err(e) => return Err(stage_err("fluctuation")(e)),
    };
    content
        .files
        .insert(format!("fluctuation_{tag}.csv"), crate::fluct::path_to_csv(&fpath));
    Ok(())
}

fn run_sweep_stage(
    cfg: &PipelineConfig,
    market: &MarketSeries,
    lm: &EmotionSeries,
    emotion: &EmotionSeries,
    content: &mut ReportContent,
) -> Result<(), PipelineError> {
    let h = cfg.model.sweep.h;
    let rows = quantile_sweep(
        |q| build_regression_frame(market, lm, emotion, q, h),
        &cfg.model.sweep.grid,
        cfg.model.ci_level,
    )
    .map_err(stage_err("sweep"))?;
    content.files.insert(
        format!("sweep_{}.csv", emotion.emotion_name),
        rolling::sweep_to_csv(&rows),
    );
    Ok(())
}

/// Runs the configured pipeline end to end and writes the bundle.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<ReportBundle, PipelineError> {
    let content = build_report(cfg)?;
    emit_report(&content, &cfg.output.dir)
}

/// Writes synthetic market and indicator files that load like real inputs.
pub fn write_simulation(
    out_dir: &Path,
    dgp: &crate::dgp::DgpOutput,
    schema: &crate::market::MarketCsvSchema,
    q: f64,
) -> Result<ReportBundle, PipelineError> {
    let mut content = ReportContent {
        config_echo: serde_json::to_value(&dgp.spec).expect("spec serializes"),
        ..Default::default()
    };
    content
        .files
        .insert("market_synth.csv".into(), market_to_csv(&dgp.market, schema));
    content.files.insert(
        format!("emotions_{}.csv", dgp.lm.emotion_name),
        dgp.lm.to_csv(),
    );
    content.files.insert(
        format!("emotions_{}.csv", dgp.emotion.emotion_name),
        dgp.emotion.to_csv(),
    );
    let truth = serde_json::json!({
        "q": q,
        "true_emotion_beta": dgp.true_emotion_beta(q),
        "spec": dgp.spec,
    });
    content.files.insert(
        "truth.json".into(),
        serde_json::to_string_pretty(&truth).expect("truth serializes") + "\n",
    );
    emit_report(&content, out_dir)
}
