//! Regenerates the bundled fluctuation-test critical-value table by Monte
//! Carlo. The defaults reproduce the table shipped in the library
//! (`crates/core/data/fluctuation_cv.csv`); runs take a few minutes.

use anyhow::{bail, Context, Result};
use clap::Parser;
use newsquant::fluct::{generate_cv_table, CvGenConfig};
use std::path::PathBuf;

#[derive(Parser)]
#[command(about = "Monte Carlo generator for fluctuation-test critical values")]
struct Opts {
    /// Output CSV path.
    #[arg(long, value_name = "PATH")]
    out: PathBuf,
    /// Differential-path length (asymptotic at 10000).
    #[arg(long, default_value_t = 10_000)]
    n: usize,
    /// Simulated paths per mu.
    #[arg(long, default_value_t = 100_000)]
    paths: usize,
    #[arg(long, default_value_t = 20240515)]
    seed: u64,
    /// Comma-separated mu grid.
    #[arg(long, default_value = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9")]
    mus: String,
    /// Comma-separated alpha grid.
    #[arg(long, default_value = "0.05,0.1")]
    alphas: String,
}

fn parse_grid(raw: &str) -> Result<Vec<f64>> {
    let vals: Vec<f64> = raw
        .split(',')
        .map(|s| s.trim().parse::<f64>().context("bad grid value"))
        .collect::<Result<_>>()?;
    if vals.iter().any(|v| !(*v > 0.0 && *v < 1.0)) {
        bail!("grid values must lie in (0,1)");
    }
    Ok(vals)
}

fn main() -> Result<()> {
    let opts = Opts::parse();
    let mus = parse_grid(&opts.mus)?;
    let alphas = parse_grid(&opts.alphas)?;
    let gen = CvGenConfig {
        n: opts.n,
        paths: opts.paths,
        seed: opts.seed,
    };
    eprintln!(
        "simulating {} paths of length {} for {} mu values...",
        gen.paths,
        gen.n,
        mus.len()
    );
    let table = generate_cv_table(&mus, &alphas, &gen);
    std::fs::write(&opts.out, table.to_csv())?;
    for row in &table.rows {
        eprintln!("mu={:.2} alpha={:.2} n={} cv={:.4}", row.mu, row.alpha, row.n, row.cv);
    }
    eprintln!("wrote {}", opts.out.display());
    Ok(())
}
