//! Emotion indicators from news metadata and quantile-regression
//! forecasting of sovereign bond spread changes.
//!
//! The crate covers the full pipeline: parsing GKG-style news metadata,
//! building daily standardized emotion indicators, estimating
//! emotion-augmented quantile regressions, rolling in-sample and
//! out-of-sample evaluation, and the fluctuation test with simulated
//! critical values. The `newsquant` binary in the companion CLI crate
//! drives these stages from a TOML configuration.

pub mod calendar;
pub mod config;
pub mod dgp;
pub mod emotion;
pub mod fluct;
pub mod gkg;
pub mod market;
pub mod pipeline;
pub mod qreg;
pub mod rng;
pub mod rolling;
pub mod stats;
