//! Confidence intervals by inversion of the quantile rank-score test.
//!
//! To test `H0: beta_j = xi`, the target is shifted by `xi * x_j` and the
//! restricted model (all other regressors) is refit. Its dual solution
//! yields regression rank scores `b_hat = a_hat - (1 - q)`, which the
//! restriction makes orthogonal to the remaining design, and
//!
//! ```text
//! T(xi) = x_j' b_hat / sqrt(q (1 - q) x_tilde' x_tilde)
//! ```
//!
//! is asymptotically standard normal under H0, with `x_tilde` the residual
//! of projecting `x_j` on the other regressors. The interval collects the
//! `xi` not rejected at the requested level, located by bisection from the
//! point estimate.

use super::fit::{QuantileFit, MAX_ITERATIONS};
use super::frame::RegressionFrame;
use super::linalg;
use super::solver;
use super::QregError;
use crate::stats;

/// Absolute bisection tolerance on the interval endpoints.
const XI_TOL: f64 = 1e-6;
/// Bracket half-width in crude standard-error units.
const BRACKET_UNITS: f64 = 50.0;

struct RankTest<'a> {
    restricted_cols: Vec<Vec<f64>>,
    xj: &'a [f64],
    target: &'a [f64],
    q: f64,
    denom: f64,
}

impl RankTest<'_> {
    /// Rank-score statistic for H0: beta_j = xi.
    fn statistic(&self, xi: f64) -> Result<f64, QregError> {
        let shifted: Vec<f64> = self
            .target
            .iter()
            .zip(self.xj)
            .map(|(y, x)| y - xi * x)
            .collect();
        let out =
            solver::solve_checkloss(&self.restricted_cols, &shifted, self.q, MAX_ITERATIONS)?;
        let centered = 1.0 - self.q;
        let s: f64 = self
            .xj
            .iter()
            .zip(&out.dual)
            .map(|(x, a)| x * (a - centered))
            .sum();
        Ok(s / self.denom)
    }
}

/// Residual of projecting `xj` on the columns in `cols` (least squares).
fn project_out(cols: &[Vec<f64>], xj: &[f64]) -> Result<Vec<f64>, QregError> {
    let p = cols.len();
    let mut gram = vec![0.0; p * p];
    for j in 0..p {
        for k in 0..=j {
            let dot: f64 = cols[j].iter().zip(&cols[k]).map(|(a, b)| a * b).sum();
            gram[j * p + k] = dot;
            gram[k * p + j] = dot;
        }
    }
    let mut rhs: Vec<f64> = cols
        .iter()
        .map(|c| c.iter().zip(xj).map(|(a, b)| a * b).sum())
        .collect();
    linalg::cholesky_solve(&mut gram, p, &mut rhs).map_err(|_| QregError::RankDeficient)?;
    let mut resid = xj.to_vec();
    for (j, col) in cols.iter().enumerate() {
        for (r, x) in resid.iter_mut().zip(col) {
            *r -= rhs[j] * x;
        }
    }
    Ok(resid)
}

/// Rank-inversion confidence interval for one coefficient.
///
/// The search bracket is the point estimate plus/minus 50 crude
/// standard-error units; a test that never rejects inside the bracket is
/// reported as `UnboundedInterval`.
pub fn rank_inversion_ci(
    frame: &RegressionFrame,
    fit: &QuantileFit,
    name: &str,
    level: f64,
) -> Result<(f64, f64), QregError> {
    if !(level > 0.0 && level < 1.0) {
        return Err(QregError::InvalidFrame(format!(
            "confidence level {level} outside (0,1)"
        )));
    }
    let beta_hat = fit
        .coefficient(name)
        .ok_or_else(|| QregError::MissingRegressor(name.to_string()))?;
    let xj = frame
        .column(name)
        .ok_or_else(|| QregError::MissingRegressor(name.to_string()))?;
    let restricted = frame.without_column(name)?;
    let q = frame.q();

    let x_tilde = project_out(restricted.columns(), xj)?;
    let stt: f64 = x_tilde.iter().map(|v| v * v).sum();
    let xj_norm: f64 = xj.iter().map(|v| v * v).sum();
    if stt <= 1e-10 * xj_norm.max(1e-300) {
        return Err(QregError::RankDeficient);
    }

    let test = RankTest {
        restricted_cols: restricted.columns().to_vec(),
        xj,
        target: frame.target(),
        q,
        denom: (q * (1.0 - q) * stt).sqrt(),
    };

    let z_crit = stats::norm_quantile(1.0 - (1.0 - level) / 2.0);
    let resid_sd = stats::sample_sd(&fit.residuals).unwrap_or(0.0);
    let se_scale = (resid_sd / stt.sqrt()).max(1e-8 * (1.0 + beta_hat.abs()));
    let half = BRACKET_UNITS * se_scale;

    // Upper endpoint: T is nonincreasing in xi; find where it crosses -z.
    let upper = {
        let hi = beta_hat + half;
        if test.statistic(hi)? > -z_crit {
            return Err(QregError::UnboundedInterval);
        }
        let mut lo = beta_hat;
        let mut hi = hi;
        while hi - lo > XI_TOL {
            let mid = 0.5 * (lo + hi);
            if test.statistic(mid)? <= -z_crit {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    };

    // Lower endpoint: crossing of +z.
    let lower = {
        let lo = beta_hat - half;
        if test.statistic(lo)? < z_crit {
            return Err(QregError::UnboundedInterval);
        }
        let mut lo = lo;
        let mut hi = beta_hat;
        while hi - lo > XI_TOL {
            let mid = 0.5 * (lo + hi);
            if test.statistic(mid)? >= z_crit {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };

    Ok((lower.min(beta_hat), upper.max(beta_hat)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qreg::fit::fit_quantile;
    use crate::qreg::frame::INTERCEPT;
    use chrono::NaiveDate;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn dates(n: usize) -> Vec<NaiveDate> {
        (0..n)
            .map(|i| {
                NaiveDate::from_ymd_opt(2018, 1, 1).unwrap() + chrono::Duration::days(i as i64)
            })
            .collect()
    }

    #[test]
    fn point_estimate_sits_inside_its_ci() {
        let mut rng = crate::rng::substream(11, "rank-ci-test");
        let n = 200;
        let x: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let y: Vec<f64> = x
            .iter()
            .map(|&xi| 1.0 + 0.8 * xi + rng.sample::<f64, _>(StandardNormal))
            .collect();
        let frame = RegressionFrame::new(
            0.5,
            0,
            dates(n),
            y,
            vec![(INTERCEPT.into(), vec![1.0; n]), ("x".into(), x)],
            None,
        )
        .unwrap();
        let fit = fit_quantile(&frame).unwrap();
        let (lo, hi) = rank_inversion_ci(&frame, &fit, "x", 0.90).unwrap();
        let beta = fit.coefficient("x").unwrap();
        assert!(lo <= beta && beta <= hi, "{lo} <= {beta} <= {hi}");
        assert!(hi - lo < 1.0, "interval implausibly wide: [{lo}, {hi}]");
        assert!(lo < 0.8 && 0.8 < hi, "true value outside [{lo}, {hi}]");
    }

    #[test]
    fn duplicate_regressor_propagates_rank_deficiency() {
        let n = 40;
        let x: Vec<f64> = (0..n).map(|i| i as f64).collect();
        let frame = RegressionFrame::new(
            0.5,
            0,
            dates(n),
            x.clone(),
            vec![
                (INTERCEPT.into(), vec![1.0; n]),
                ("a".into(), x.clone()),
                ("b".into(), x),
            ],
            None,
        )
        .unwrap();
        // The full fit itself is rank deficient; test the CI path on the
        // projection directly.
        let restricted = frame.without_column("b").unwrap();
        let xb = frame.column("b").unwrap();
        let resid = project_out(restricted.columns(), xb).unwrap();
        let stt: f64 = resid.iter().map(|v| v * v).sum();
        assert!(stt < 1e-8);
    }
}
