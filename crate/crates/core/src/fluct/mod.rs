//! Forecast-comparison inference: HAC long-run variance, the
//! Diebold-Mariano statistic, and its rolling-window (fluctuation) version
//! with simulated sup-statistic critical values.

mod critical;

pub use critical::{
    critical_value, generate_cv_table, simulate_max_abs_stats, CvGenConfig, CvRow, CvTable,
};

use chrono::NaiveDate;
use serde::Serialize;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FluctError {
    #[error("series length {len} too short; need at least {need}")]
    TooShort { len: usize, need: usize },
    #[error("long-run variance is not positive")]
    ZeroVariance,
    #[error("mu={0} outside the supported [0.1, 0.9] range")]
    UnsupportedMu(f64),
    #[error("no critical value tabulated for alpha={0}")]
    UnsupportedAlpha(f64),
    #[error("invalid fluctuation config: {0}")]
    InvalidConfig(String),
    #[error("critical-value table: {0}")]
    BadTable(String),
}

/// Newey-West long-run variance with Bartlett weights:
/// `gamma_0 + 2 * sum_{j=1..L} (1 - j/(L+1)) gamma_j`, autocovariances
/// about the sample mean with denominator n. A negative estimate is
/// truncated to zero and flagged.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HacEstimate {
    pub value: f64,
    /// True when the raw estimate was non-positive and got floored at zero.
    pub truncated: bool,
}

pub fn hac_lrv(series: &[f64], bandwidth: usize) -> Result<HacEstimate, FluctError> {
    let n = series.len();
    if n < 2 {
        return Err(FluctError::TooShort { len: n, need: 2 });
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let centered: Vec<f64> = series.iter().map(|v| v - mean).collect();
    let gamma = |lag: usize| -> f64 {
        centered[lag..]
            .iter()
            .zip(&centered[..n - lag])
            .map(|(a, b)| a * b)
            .sum::<f64>()
            / n as f64
    };
    let l = bandwidth.min(n - 1);
    let mut lrv = gamma(0);
    for j in 1..=l {
        let weight = 1.0 - j as f64 / (l as f64 + 1.0);
        lrv += 2.0 * weight * gamma(j);
    }
    if lrv <= 0.0 {
        Ok(HacEstimate {
            value: 0.0,
            truncated: true,
        })
    } else {
        Ok(HacEstimate {
            value: lrv,
            truncated: false,
        })
    }
}

/// Bandwidth rule used when the configuration says `Auto`.
pub fn auto_bandwidth(m: usize) -> usize {
    (1.3 * (m as f64).powf(1.0 / 3.0)).floor() as usize
}

/// Diebold-Mariano statistic `mean(d) / sqrt(lrv / n)`. Negative when the
/// first (augmented) model's losses are smaller on average.
pub fn dm_statistic(d: &[f64], lrv: f64) -> Result<f64, FluctError> {
    if d.is_empty() {
        return Err(FluctError::TooShort { len: 0, need: 1 });
    }
    if lrv <= 0.0 {
        return Err(FluctError::ZeroVariance);
    }
    let mean = d.iter().sum::<f64>() / d.len() as f64;
    Ok(mean / (lrv / d.len() as f64).sqrt())
}

/// Loss differentials `d_t = loss_augmented - loss_benchmark` over the
/// out-of-sample dates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LossDifferentialSeries {
    pub dates: Vec<NaiveDate>,
    pub values: Vec<f64>,
}

impl LossDifferentialSeries {
    pub fn new(dates: Vec<NaiveDate>, values: Vec<f64>) -> Result<Self, FluctError> {
        if dates.len() != values.len() {
            return Err(FluctError::InvalidConfig(
                "dates and values have different lengths".into(),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(FluctError::InvalidConfig(
                "non-finite loss differential".into(),
            ));
        }
        Ok(Self { dates, values })
    }

    pub fn n_oos(&self) -> usize {
        self.values.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Bandwidth {
    Auto,
    Fixed(usize),
}

#[derive(Debug, Clone, Serialize)]
pub struct FluctuationConfig {
    /// Rolling fraction mu = m / n_oos.
    pub mu: f64,
    /// Window length m = round(mu * n_oos).
    pub m: usize,
    pub hac_bandwidth: Bandwidth,
    /// Two-sided nominal size.
    pub alpha: f64,
    /// Two-sided sup-statistic critical value at (mu, alpha).
    pub critical_value: f64,
    /// Estimate sigma per window instead of once on the full series
    /// (sensitivity analysis only).
    pub per_window_variance: bool,
}

impl FluctuationConfig {
    /// Builds the config, reading the critical value from the bundled table.
    pub fn from_table(mu: f64, alpha: f64, n_oos: usize) -> Result<Self, FluctError> {
        let cv = critical_value(mu, alpha, n_oos)?;
        Self::with_critical_value(mu, alpha, n_oos, cv)
    }

    pub fn with_critical_value(
        mu: f64,
        alpha: f64,
        n_oos: usize,
        critical_value: f64,
    ) -> Result<Self, FluctError> {
        if !(mu > 0.0 && mu < 1.0) {
            return Err(FluctError::InvalidConfig(format!("mu={mu} outside (0,1)")));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(FluctError::InvalidConfig(format!(
                "alpha={alpha} outside (0,1)"
            )));
        }
        let m = (mu * n_oos as f64).round() as usize;
        if m < 5 {
            return Err(FluctError::InvalidConfig(format!(
                "window m={m} below the minimum of 5"
            )));
        }
        Ok(Self {
            mu,
            m,
            hac_bandwidth: Bandwidth::Auto,
            alpha,
            critical_value,
            per_window_variance: false,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    AugmentedBetter,
    BenchmarkBetter,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::AugmentedBetter => "augmented_better",
            Verdict::BenchmarkBetter => "benchmark_better",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FluctuationPoint {
    pub date: NaiveDate,
    pub f_stat: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, Serialize)]
pub struct FluctuationPath {
    pub m: usize,
    pub critical_value: f64,
    /// Long-run standard deviation used in the denominator (full-series
    /// estimate unless per-window variance is on, then the first window's).
    pub sigma: f64,
    pub points: Vec<FluctuationPoint>,
}

/// Rolling DM statistics: for each window end `j`,
/// `F_j = sum_{i=j-m+1..j} d_i / (sigma * sqrt(m))`, compared against the
/// two-sided critical band. The model pair is flagged only outside the band.
pub fn fluctuation_statistics(
    series: &LossDifferentialSeries,
    cfg: &FluctuationConfig,
) -> Result<FluctuationPath, FluctError> {
    let n = series.n_oos();
    let m = cfg.m;
    if n < m {
        return Err(FluctError::TooShort { len: n, need: m });
    }
    let bandwidth = match cfg.hac_bandwidth {
        Bandwidth::Auto => auto_bandwidth(m),
        Bandwidth::Fixed(b) => b,
    };
    let full_sigma2 = if cfg.per_window_variance {
        None
    } else {
        let est = hac_lrv(&series.values, bandwidth)?;
        if est.value <= 0.0 {
            return Err(FluctError::ZeroVariance);
        }
        Some(est.value)
    };

    let mut prefix = vec![0.0; n + 1];
    for (i, v) in series.values.iter().enumerate() {
        prefix[i + 1] = prefix[i] + v;
    }

    let mut points = Vec::with_capacity(n - m + 1);
    let mut sigma_used = full_sigma2.map(|v| v.sqrt()).unwrap_or(0.0);
    for j in (m - 1)..n {
        let sum = prefix[j + 1] - prefix[j + 1 - m];
        let sigma2 = match full_sigma2 {
            Some(v) => v,
            None => {
                let window = &series.values[j + 1 - m..=j];
                let est = hac_lrv(window, auto_bandwidth(m))?;
                if est.value <= 0.0 {
                    return Err(FluctError::ZeroVariance);
                }
                est.value
            }
        };
        let sigma = sigma2.sqrt();
        if j == m - 1 {
            sigma_used = sigma;
        }
        let f = sum / (sigma * (m as f64).sqrt());
        let verdict = if f < -cfg.critical_value {
            Verdict::AugmentedBetter
        } else if f > cfg.critical_value {
            Verdict::BenchmarkBetter
        } else {
            Verdict::Inconclusive
        };
        points.push(FluctuationPoint {
            date: series.dates[j],
            f_stat: f,
            verdict,
        });
    }

    Ok(FluctuationPath {
        m,
        critical_value: cfg.critical_value,
        sigma: sigma_used,
        points,
    })
}

/// Placeholder path for the degenerate case of identical models: no
/// statistic is defined, every window is inconclusive.
pub fn degenerate_path(series: &LossDifferentialSeries, cfg: &FluctuationConfig) -> FluctuationPath {
    let n = series.n_oos();
    let m = cfg.m.min(n.max(1));
    let points = if n >= m {
        series.dates[(m - 1)..]
            .iter()
            .map(|&date| FluctuationPoint {
                date,
                f_stat: f64::NAN,
                verdict: Verdict::Inconclusive,
            })
            .collect()
    } else {
        Vec::new()
    };
    FluctuationPath {
        m: cfg.m,
        critical_value: cfg.critical_value,
        sigma: 0.0,
        points,
    }
}

pub fn path_to_csv(path: &FluctuationPath) -> String {
    let mut out = String::from("date,F,cv_lower,cv_upper,verdict\n");
    for p in &path.points {
        let f = if p.f_stat.is_finite() {
            p.f_stat.to_string()
        } else {
            String::new()
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            p.date,
            f,
            -path.critical_value,
            path.critical_value,
            p.verdict.as_str()
        );
    }
    out
}
