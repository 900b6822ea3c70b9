//! Simulated critical values for the sup of rolling |DM| statistics.
//!
//! Under the null of equal predictive accuracy with iid differentials, the
//! band must cover the largest absolute rolling statistic over all windows
//! simultaneously. The table is produced by Monte Carlo: simulate iid
//! standard-normal differential paths, compute `max_j |F_j|` per path with
//! the same statistic construction used on real data (full-series HAC
//! variance, automatic bandwidth), and take the (1 - alpha) quantile. The
//! bundled table ships in `data/fluctuation_cv.csv` together with its
//! generator provenance and can be regenerated with the `gen_cv_table`
//! binary.

use super::{auto_bandwidth, hac_lrv, FluctError};
use crate::rng;
use crate::stats;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;
use std::fmt::Write as _;
use std::sync::OnceLock;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CvRow {
    pub mu: f64,
    pub alpha: f64,
    pub n: usize,
    pub cv: f64,
}

#[derive(Debug, Clone)]
pub struct CvTable {
    pub provenance: Vec<String>,
    pub rows: Vec<CvRow>,
}

impl CvTable {
    /// Parses the `mu,alpha,n,cv` format. Lines starting with `#` carry
    /// provenance and are preserved.
    pub fn parse(text: &str) -> Result<CvTable, FluctError> {
        let mut provenance = Vec::new();
        let mut rows = Vec::new();
        let mut saw_header = false;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                provenance.push(rest.trim().to_string());
                continue;
            }
            if !saw_header {
                if line != "mu,alpha,n,cv" {
                    return Err(FluctError::BadTable(format!(
                        "line {}: expected header mu,alpha,n,cv",
                        lineno + 1
                    )));
                }
                saw_header = true;
                continue;
            }
            let parts: Vec<&str> = line.split(',').collect();
            if parts.len() != 4 {
                return Err(FluctError::BadTable(format!(
                    "line {}: expected 4 fields",
                    lineno + 1
                )));
            }
            let parse_f = |s: &str| -> Result<f64, FluctError> {
                s.parse()
                    .map_err(|_| FluctError::BadTable(format!("bad number {s:?}")))
            };
            let row = CvRow {
                mu: parse_f(parts[0])?,
                alpha: parse_f(parts[1])?,
                n: parts[2]
                    .parse()
                    .map_err(|_| FluctError::BadTable(format!("bad n {:?}", parts[2])))?,
                cv: parse_f(parts[3])?,
            };
            if !(row.mu > 0.0 && row.mu < 1.0) || !(row.alpha > 0.0 && row.alpha < 1.0) {
                return Err(FluctError::BadTable(format!(
                    "line {}: mu/alpha out of range",
                    lineno + 1
                )));
            }
            if !row.cv.is_finite() || row.cv <= 0.0 {
                return Err(FluctError::BadTable(format!(
                    "line {}: non-positive critical value",
                    lineno + 1
                )));
            }
            rows.push(row);
        }
        if rows.is_empty() {
            return Err(FluctError::BadTable("no rows".into()));
        }
        Ok(CvTable { provenance, rows })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for p in &self.provenance {
            let _ = writeln!(out, "# {p}");
        }
        out.push_str("mu,alpha,n,cv\n");
        for r in &self.rows {
            let _ = writeln!(out, "{},{},{},{}", r.mu, r.alpha, r.n, r.cv);
        }
        out
    }

    /// Critical value at (mu, alpha), using the tabulated n closest to
    /// `n_oos`. Off-grid mu within [0.1, 0.9] interpolates linearly when
    /// `interpolate` is set.
    pub fn critical_value(
        &self,
        mu: f64,
        alpha: f64,
        n_oos: usize,
        interpolate: bool,
    ) -> Result<f64, FluctError> {
        const MU_EPS: f64 = 1e-9;
        if !(0.1 - MU_EPS..=0.9 + MU_EPS).contains(&mu) {
            return Err(FluctError::UnsupportedMu(mu));
        }
        let at_alpha: Vec<&CvRow> = self
            .rows
            .iter()
            .filter(|r| (r.alpha - alpha).abs() < 1e-9)
            .collect();
        if at_alpha.is_empty() {
            return Err(FluctError::UnsupportedAlpha(alpha));
        }
        // Prefer the n nearest to the request (ties toward larger n).
        let best_n = at_alpha
            .iter()
            .map(|r| r.n)
            .min_by_key(|&n| {
                let d = n.abs_diff(n_oos);
                (d, usize::MAX - n)
            })
            .expect("nonempty");
        let mut grid: Vec<&CvRow> = at_alpha.into_iter().filter(|r| r.n == best_n).collect();
        grid.sort_by(|a, b| a.mu.partial_cmp(&b.mu).unwrap());

        if let Some(exact) = grid.iter().find(|r| (r.mu - mu).abs() < MU_EPS) {
            return Ok(exact.cv);
        }
        if !interpolate {
            return Err(FluctError::UnsupportedMu(mu));
        }
        let above = grid.iter().position(|r| r.mu > mu);
        match above {
            Some(i) if i > 0 => {
                let lo = grid[i - 1];
                let hi = grid[i];
                let w = (mu - lo.mu) / (hi.mu - lo.mu);
                Ok(lo.cv + w * (hi.cv - lo.cv))
            }
            _ => Err(FluctError::UnsupportedMu(mu)),
        }
    }
}

/// The table bundled with the crate.
pub fn bundled_table() -> &'static CvTable {
    static TABLE: OnceLock<CvTable> = OnceLock::new();
    TABLE.get_or_init(|| {
        CvTable::parse(include_str!("../../data/fluctuation_cv.csv"))
            .expect("bundled critical-value table parses")
    })
}

/// Two-sided critical value from the bundled table (mu interpolation on).
pub fn critical_value(mu: f64, alpha: f64, n_oos: usize) -> Result<f64, FluctError> {
    bundled_table().critical_value(mu, alpha, n_oos, true)
}

#[derive(Debug, Clone, Copy)]
pub struct CvGenConfig {
    /// Differential-path length (10,000 approximates the asymptotic value).
    pub n: usize,
    pub paths: usize,
    pub seed: u64,
}

/// Simulates `max_j |F_j|` for iid standard-normal differentials, one value
/// per path. Each path draws from its own counter-based stream, so the
/// result is independent of scheduling.
pub fn simulate_max_abs_stats(mu: f64, gen: &CvGenConfig) -> Vec<f64> {
    let n = gen.n;
    let m = (mu * n as f64).round() as usize;
    assert!(m >= 2 && m <= n, "window m={m} out of range");
    let bandwidth = auto_bandwidth(m);
    (0..gen.paths as u64)
        .into_par_iter()
        .map(|path| {
            let mut rng = rng::path_stream(gen.seed, "fluctuation-cv", path);
            let d: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let sigma2 = hac_lrv(&d, bandwidth).expect("n >= 2").value;
            let denom = (sigma2 * m as f64).sqrt();
            let mut prefix = 0.0;
            let mut window_sum = 0.0;
            let mut max_abs: f64 = 0.0;
            let mut sums = Vec::with_capacity(n + 1);
            sums.push(0.0);
            for v in &d {
                prefix += v;
                sums.push(prefix);
            }
            for j in m..=n {
                window_sum = sums[j] - sums[j - m];
                max_abs = max_abs.max((window_sum / denom).abs());
            }
            let _ = window_sum;
            max_abs
        })
        .collect()
}

/// Generates a table over the mu and alpha grids at one path length.
pub fn generate_cv_table(mus: &[f64], alphas: &[f64], gen: &CvGenConfig) -> CvTable {
    let mut rows = Vec::new();
    for &mu in mus {
        let mut stats_sample = simulate_max_abs_stats(mu, gen);
        stats_sample.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for &alpha in alphas {
            let cv = stats::percentile_lower_vertex(&stats_sample, 1.0 - alpha);
            rows.push(CvRow {
                mu,
                alpha,
                n: gen.n,
                cv,
            });
        }
    }
    CvTable {
        provenance: vec![
            "fluctuation-test critical values: (1-alpha) quantile of max_j |F_j| over".into(),
            "iid standard-normal differential paths; F_j uses the full-series HAC".into(),
            "variance with Bartlett weights and bandwidth floor(1.3*m^(1/3)).".into(),
            format!(
                "generator: gen_cv_table, seed={}, paths={}, n={}",
                gen.seed, gen.paths, gen.n
            ),
        ],
        rows,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_rejects_garbage() {
        assert!(CvTable::parse("").is_err());
        assert!(CvTable::parse("mu,alpha,n,cv\n0.3,0.05,10000,abc\n").is_err());
        assert!(CvTable::parse("mu,alpha,n,cv\n1.5,0.05,10000,3.0\n").is_err());
        assert!(CvTable::parse("wrong,header\n0.3,0.05,10000,3.0\n").is_err());
        let ok = CvTable::parse("# seed=1\nmu,alpha,n,cv\n0.3,0.05,10000,3.01\n").unwrap();
        assert_eq!(ok.rows.len(), 1);
        assert_eq!(ok.provenance, vec!["seed=1".to_string()]);
    }

    #[test]
    fn round_trip_csv() {
        let t = CvTable::parse("# p\nmu,alpha,n,cv\n0.2,0.05,10000,3.1\n0.3,0.05,10000,3.0\n")
            .unwrap();
        let again = CvTable::parse(&t.to_csv()).unwrap();
        assert_eq!(again.rows, t.rows);
    }

    #[test]
    fn interpolation_and_bounds() {
        let t = CvTable::parse(
            "mu,alpha,n,cv\n0.2,0.05,10000,3.2\n0.4,0.05,10000,3.0\n0.2,0.1,10000,2.9\n0.4,0.1,10000,2.7\n",
        )
        .unwrap();
        assert!((t.critical_value(0.3, 0.05, 500, true).unwrap() - 3.1).abs() < 1e-12);
        assert!(t.critical_value(0.3, 0.05, 500, false).is_err());
        assert!(matches!(
            t.critical_value(0.95, 0.05, 500, true),
            Err(FluctError::UnsupportedMu(_))
        ));
        assert!(matches!(
            t.critical_value(0.3, 0.01, 500, true),
            Err(FluctError::UnsupportedAlpha(_))
        ));
        // alpha monotonicity on the tabled values
        let c05 = t.critical_value(0.2, 0.05, 500, true).unwrap();
        let c10 = t.critical_value(0.2, 0.1, 500, true).unwrap();
        assert!(c05 > c10);
    }

    #[test]
    fn bundled_table_loads_and_dominates_pointwise_normal() {
        let cv = critical_value(0.30, 0.05, 10_000).unwrap();
        // Sup over many overlapping windows dominates a single two-sided
        // normal comparison.
        assert!(cv > 1.96, "cv = {cv}");
        let c10 = critical_value(0.30, 0.10, 10_000).unwrap();
        assert!(cv > c10);
    }

    #[test]
    fn simulated_stats_are_deterministic_and_positive() {
        let gen = CvGenConfig {
            n: 200,
            paths: 16,
            seed: 9,
        };
        let a = simulate_max_abs_stats(0.3, &gen);
        let b = simulate_max_abs_stats(0.3, &gen);
        assert_eq!(a, b);
        assert!(a.iter().all(|&v| v > 0.0));
    }
}
