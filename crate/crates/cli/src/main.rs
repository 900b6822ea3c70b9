//! Pipeline driver: each subcommand runs one stage of the workflow from a
//! shared TOML configuration, `run` executes everything end to end.

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use newsquant::config::PipelineConfig;
use newsquant::dgp::{DgpSpec, EmotionDistribution};
use newsquant::emotion::ScaleScope;
use newsquant::fluct::{
    degenerate_path, fluctuation_statistics, path_to_csv as fluct_csv, Bandwidth, FluctError,
    FluctuationConfig, LossDifferentialSeries,
};
use newsquant::market::{load_market_csv, MarketSeries};
use newsquant::pipeline::{
    self, emit_report, load_indicator_csvs, run_ingest, run_pipeline, IndicatorSet,
    ReportContent,
};
use newsquant::rolling::{
    build_regression_frame, default_window_t0, forecasts_to_csv, loss_differentials,
    oos_forecast_errors, path_to_csv as rolling_csv, rolling_fit,
    RollingConfig,
};
use std::fmt::Write as _;
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "newsquant",
    version,
    about = "News-emotion indicators and quantile-regression spread forecasting"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Pipeline configuration file (TOML).
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Override the configured output directory.
    #[arg(long, value_name = "DIR")]
    out_dir: Option<PathBuf>,
    /// Override the configured seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Clone)]
struct ModelArgs {
    /// Emotion series to model (defaults to every configured emotion).
    #[arg(long)]
    emotion: Option<String>,
    /// News lag in trading days (defaults to the configured h list).
    #[arg(long)]
    h: Option<usize>,
    /// Quantile level override.
    #[arg(long)]
    q: Option<f64>,
    /// Rolling window length override.
    #[arg(long)]
    t0: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Parse GKG files, apply the article filters, bucket by trading day.
    Ingest(Common),
    /// Build the standardized emotion indicator series.
    Emotions(Common),
    /// Export the aligned regression frame for one (emotion, h).
    Frame {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Rolling coefficient paths with confidence intervals and pseudo-R1.
    Rolling {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Rolling out-of-sample forecasts and check losses.
    Forecast {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Fluctuation test over the out-of-sample loss differentials.
    Fluctuation {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        model: ModelArgs,
        /// Rolling fraction mu override.
        #[arg(long)]
        mu: Option<f64>,
        /// Nominal two-sided size override.
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// Generate synthetic market and indicator files with known quantiles.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Series length.
        #[arg(long, default_value_t = 1200)]
        n: usize,
        /// News lag used in the generating process.
        #[arg(long, default_value_t = 1)]
        h: usize,
        /// Scale coefficient on the emotion regressor.
        #[arg(long, default_value_t = 0.5)]
        gamma: f64,
        /// Location coefficient on the emotion regressor.
        #[arg(long, default_value_t = 0.0)]
        beta_loc: f64,
        /// Draw the emotion regressor from a standard normal instead of the
        /// nonnegative unit-variance uniform (requires gamma = 0).
        #[arg(long)]
        normal_emotion: bool,
    },
    /// Assemble events.csv and the manifest for an existing output directory.
    Report(Common),
    /// Run the full pipeline and write the report bundle.
    Run(Common),
}

fn load_config(common: &Common) -> Result<PipelineConfig> {
    let mut cfg = PipelineConfig::load(&common.config)
        .with_context(|| format!("loading {}", common.config.display()))?;
    if let Some(dir) = &common.out_dir {
        cfg.output.dir = dir.clone();
    }
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn load_market(cfg: &PipelineConfig) -> Result<MarketSeries> {
    let path = cfg
        .data
        .market_csv
        .as_ref()
        .context("config sets no data.market_csv")?;
    let market = load_market_csv(path, &cfg.data.market_schema, &cfg.sample.country)?
        .clip(cfg.sample.start, cfg.sample.end);
    if market.is_empty() {
        bail!("no market observations inside the sample range");
    }
    Ok(market)
}

fn load_indicators(cfg: &PipelineConfig) -> Result<IndicatorSet> {
    if !cfg.data.emotion_csvs.is_empty() {
        return Ok(load_indicator_csvs(cfg)?);
    }
    let lexicon_path = cfg
        .data
        .lexicon_file
        .as_ref()
        .context("config sets neither data.emotion_csvs nor data.lexicon_file")?;
    let lexicons = newsquant::emotion::load_lexicon_file(lexicon_path)?;
    let (selection, _) = run_ingest(cfg)?;
    Ok(pipeline::indicators_from_bundles(cfg, &selection, &lexicons)?)
}

fn write_out(cfg: &PipelineConfig, name: &str, text: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(&cfg.output.dir)?;
    let path = cfg.output.dir.join(name);
    std::fs::write(&path, text)?;
    Ok(path)
}

fn fmt_q(q: f64) -> String {
    format!("{q}").replace('.', "p")
}

struct ModelSelection {
    emotions: Vec<String>,
    hs: Vec<usize>,
    q: f64,
    t0: Option<usize>,
}

fn resolve_model(cfg: &PipelineConfig, set: &IndicatorSet, model: &ModelArgs) -> Result<ModelSelection> {
    let available: Vec<String> = set.emotions.iter().map(|e| e.emotion_name.clone()).collect();
    let emotions = match &model.emotion {
        Some(name) => {
            if !available.contains(name) {
                bail!("emotion {name:?} not among {available:?}");
            }
            vec![name.clone()]
        }
        None => available,
    };
    let hs = match model.h {
        Some(h) => vec![h],
        None => cfg.model.h_list.clone(),
    };
    Ok(ModelSelection {
        emotions,
        hs,
        q: model.q.unwrap_or(cfg.model.q),
        t0: model.t0.or(cfg.model.window_t0),
    })
}

fn frame_for<'a>(
    market: &MarketSeries,
    set: &'a IndicatorSet,
    emotion: &str,
    q: f64,
    h: usize,
) -> Result<(newsquant::qreg::RegressionFrame, &'a newsquant::emotion::EmotionSeries)> {
    let series = set
        .emotions
        .iter()
        .find(|e| e.emotion_name == emotion)
        .with_context(|| format!("no emotion series named {emotion:?}"))?;
    let frame = build_regression_frame(market, &set.lm, series, q, h)?;
    Ok((frame, series))
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Ingest(common) => {
            let cfg = load_config(&common)?;
            cfg.validate_inputs()?;
            let (selection, stats_text) = run_ingest(&cfg)?;
            let mut volume = String::from("date,count\n");
            for (date, count) in selection.daily_volume() {
                let _ = writeln!(volume, "{date},{count}");
            }
            write_out(&cfg, "volume.csv", &volume)?;
            write_out(&cfg, "ingest_stats.json", &stats_text)?;
            let mut jsonl = String::new();
            for (date, bundle) in &selection.buckets {
                for record in bundle {
                    let row = serde_json::json!({"trading_date": date, "record": record});
                    jsonl.push_str(&row.to_string());
                    jsonl.push('\n');
                }
            }
            write_out(&cfg, "selected.jsonl", &jsonl)?;
            eprintln!(
                "ingest: {} records in, {} selected over {} trading days, {} warnings",
                selection.stats.input,
                selection.stats.selected,
                selection.buckets.len(),
                selection.warnings.len()
            );
        }
        Command::Emotions(common) => {
            let cfg = load_config(&common)?;
            cfg.validate_inputs()?;
            let set = load_indicators(&cfg)?;
            let mut all = vec![&set.lm];
            all.extend(set.emotions.iter());
            for series in all {
                let mut out = series.clone();
                if cfg.indicators.scale_scope == ScaleScope::EstimationWindow {
                    match cfg.indicators.estimation_end {
                        Some(end) => out.restandardize(ScaleScope::EstimationWindow, Some(end))?,
                        None => eprintln!(
                            "emotions: estimation-window scaling needs indicators.estimation_end; keeping full-sample scale"
                        ),
                    }
                }
                let name = format!("emotions_{}.csv", out.emotion_name);
                write_out(&cfg, &name, &out.to_csv())?;
                eprintln!("emotions: wrote {name} (scale {})", out.scale);
            }
        }
        Command::Frame { common, model } => {
            let cfg = load_config(&common)?;
            cfg.validate_inputs()?;
            let market = load_market(&cfg)?;
            let set = load_indicators(&cfg)?;
            let sel = resolve_model(&cfg, &set, &model)?;
            for emotion in &sel.emotions {
                for &h in &sel.hs {
                    let (frame, _) = frame_for(&market, &set, emotion, sel.q, h)?;
                    let mut csv = String::from("date,target");
                    for n in frame.names() {
                        let _ = write!(csv, ",{n}");
                    }
                    csv.push('\n');
                    for i in 0..frame.n_rows() {
                        let _ = write!(csv, "{},{}", frame.row_dates()[i], frame.target()[i]);
                        for col in frame.columns() {
                            let _ = write!(csv, ",{}", col[i]);
                        }
                        csv.push('\n');
                    }
                    let name = format!("frame_{emotion}_q{}_h{h}.csv", fmt_q(sel.q));
                    write_out(&cfg, &name, &csv)?;
                    eprintln!("frame: wrote {name} ({} rows)", frame.n_rows());
                }
            }
        }
        Command::Rolling { common, model } => {
            let cfg = load_config(&common)?;
            cfg.validate_inputs()?;
            let market = load_market(&cfg)?;
            let set = load_indicators(&cfg)?;
            let sel = resolve_model(&cfg, &set, &model)?;
            for emotion in &sel.emotions {
                for &h in &sel.hs {
                    let (frame, _) = frame_for(&market, &set, emotion, sel.q, h)?;
                    let t0 = sel.t0.unwrap_or_else(|| default_window_t0(frame.n_rows()));
                    let rcfg = RollingConfig {
                        q: sel.q,
                        h,
                        window_t0: t0,
                        ci_level: cfg.model.ci_level,
                        compute_ci: cfg.model.rolling_ci,
                    };
                    let path = rolling_fit(&frame, &rcfg)?;
                    let name = format!("coeffpath_{emotion}_q{}_h{h}.csv", fmt_q(sel.q));
                    write_out(&cfg, &name, &rolling_csv(&path, frame.names()))?;
                    eprintln!("rolling: wrote {name} ({} windows, T0={t0})", path.entries.len());
                }
            }
        }
        Command::Forecast { common, model } => {
            let cfg = load_config(&common)?;
            cfg.validate_inputs()?;
            let market = load_market(&cfg)?;
            let set = load_indicators(&cfg)?;
            let sel = resolve_model(&cfg, &set, &model)?;
            for emotion in &sel.emotions {
                for &h in &sel.hs {
                    let (frame, _) = frame_for(&market, &set, emotion, sel.q, h)?;
                    let t0 = sel.t0.unwrap_or_else(|| default_window_t0(frame.n_rows()));
                    let rcfg = RollingConfig {
                        q: sel.q,
                        h,
                        window_t0: t0,
                        ci_level: cfg.model.ci_level,
                        compute_ci: false,
                    };
                    let oos = oos_forecast_errors(&frame, &rcfg)?;
                    let name = format!("forecasts_{emotion}_q{}_h{h}.csv", fmt_q(sel.q));
                    write_out(&cfg, &name, &forecasts_to_csv(&oos.records))?;
                    eprintln!(
                        "forecast: wrote {name} ({} records, {} skipped)",
                        oos.records.len(),
                        oos.skipped.len()
                    );
                }
            }
        }
        Command::Fluctuation {
            common,
            model,
            mu,
            alpha,
        } => {
            let cfg = load_config(&common)?;
            cfg.validate_inputs()?;
            let market = load_market(&cfg)?;
            let set = load_indicators(&cfg)?;
            let sel = resolve_model(&cfg, &set, &model)?;
            let mu = mu.unwrap_or(cfg.test.mu);
            let alpha = alpha.unwrap_or(cfg.test.alpha);
            for emotion in &sel.emotions {
                for &h in &sel.hs {
                    let (frame, _) = frame_for(&market, &set, emotion, sel.q, h)?;
                    let t0 = sel.t0.unwrap_or_else(|| default_window_t0(frame.n_rows()));
                    let rcfg = RollingConfig {
                        q: sel.q,
                        h,
                        window_t0: t0,
                        ci_level: cfg.model.ci_level,
                        compute_ci: false,
                    };
                    let oos = oos_forecast_errors(&frame, &rcfg)?;
                    let (dates, values) = loss_differentials(&oos.records);
                    let series = LossDifferentialSeries::new(dates, values)?;
                    let mut fcfg = FluctuationConfig::from_table(mu, alpha, series.n_oos())?;
                    if let Some(b) = cfg.test.hac_bandwidth {
                        fcfg.hac_bandwidth = Bandwidth::Fixed(b);
                    }
                    fcfg.per_window_variance = cfg.test.per_window_variance;
                    let path = match fluctuation_statistics(&series, &fcfg) {
                        Ok(p) => p,
                        Err(FluctError::ZeroVariance) => {
                            eprintln!("fluctuation: zero-variance differentials for {emotion}, verdicts inconclusive");
                            degenerate_path(&series, &fcfg)
                        }
                        Err(e) => return Err(e.into()),
                    };
                    let name = format!("fluctuation_{emotion}_q{}_h{h}.csv", fmt_q(sel.q));
                    write_out(&cfg, &name, &fluct_csv(&path))?;
                    let flagged = path
                        .points
                        .iter()
                        .filter(|p| p.verdict != newsquant::fluct::Verdict::Inconclusive)
                        .count();
                    eprintln!(
                        "fluctuation: wrote {name} (m={}, cv={:.3}, {flagged} flagged windows)",
                        path.m, path.critical_value
                    );
                }
            }
        }
        Command::Simulate {
            common,
            n,
            h,
            gamma,
            beta_loc,
            normal_emotion,
        } => {
            let cfg = load_config(&common)?;
            let spec = DgpSpec {
                n,
                h,
                emotion_scale_coeff: gamma,
                emotion_loc_coeff: beta_loc,
                emotion_dist: if normal_emotion {
                    EmotionDistribution::StandardNormal
                } else {
                    EmotionDistribution::UnitUniform
                },
                start_date: cfg.sample.start,
                ..DgpSpec::default()
            };
            let out = newsquant::dgp::simulate_dgp(&spec, cfg.seed)?;
            let bundle =
                pipeline::write_simulation(&cfg.output.dir, &out, &cfg.data.market_schema, cfg.model.q)?;
            eprintln!(
                "simulate: wrote {} files to {} (true beta at q={}: {:.4})",
                bundle.outputs.len(),
                bundle.out_dir.display(),
                cfg.model.q,
                out.true_emotion_beta(cfg.model.q)
            );
        }
        Command::Report(common) => {
            let cfg = load_config(&common)?;
            let dir = &cfg.output.dir;
            if !dir.is_dir() {
                bail!("output directory {} does not exist", dir.display());
            }
            // Re-digest whatever stage outputs are present and refresh the
            // bundle-level files.
            let mut content = ReportContent {
                seed: cfg.seed,
                config_echo: serde_json::to_value(&cfg)?,
                ..Default::default()
            };
            let mut names: Vec<String> = Vec::new();
            for entry in std::fs::read_dir(dir)? {
                let entry = entry?;
                let name = entry.file_name().to_string_lossy().to_string();
                if entry.file_type()?.is_file() && name != "manifest.json" && name != "events.csv" {
                    names.push(name);
                }
            }
            names.sort();
            for name in names {
                let text = std::fs::read_to_string(dir.join(&name))
                    .with_context(|| format!("reading {name}"))?;
                content.files.insert(name, text);
            }
            let events = cfg.event_calendar();
            events.validate()?;
            let (inside, outside) = events.split_by_range(cfg.sample.start, cfg.sample.end);
            for e in &outside {
                content
                    .warnings
                    .push(format!("event {} ({}) outside the sample range, excluded", e.id, e.date));
            }
            let mut events_csv = String::from("id,date,label\n");
            for e in &inside {
                let _ = writeln!(events_csv, "{},{},{}", e.id, e.date, e.label.replace(',', ";"));
            }
            content.files.insert("events.csv".into(), events_csv);
            let bundle = emit_report(&content, dir)?;
            eprintln!(
                "report: manifest over {} files at {}",
                bundle.outputs.len(),
                bundle.manifest_path.display()
            );
        }
        Command::Run(common) => {
            let cfg = load_config(&common)?;
            let bundle = run_pipeline(&cfg)?;
            for w in &bundle.warnings {
                eprintln!("warning: {w}");
            }
            eprintln!(
                "run: wrote {} files to {}",
                bundle.outputs.len(),
                bundle.out_dir.display()
            );
        }
    }
    Ok(())
}
