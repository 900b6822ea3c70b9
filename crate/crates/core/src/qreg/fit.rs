//! Fitting, goodness of fit, and prediction.

use super::frame::RegressionFrame;
use super::solver;
use super::QregError;
use crate::stats;
use serde::Serialize;
use std::collections::BTreeMap;

/// The check (pinball) loss `rho_q(z) = (q - I(z < 0)) z`.
pub fn check_loss(z: f64, q: f64) -> f64 {
    debug_assert!(q > 0.0 && q < 1.0);
    if z >= 0.0 {
        q * z
    } else {
        (q - 1.0) * z
    }
}

/// Minimized check loss of the intercept-only model, attained at the
/// lower-vertex sample quantile.
pub fn restricted_intercept_loss(target: &[f64], q: f64) -> f64 {
    let alpha = stats::percentile_of(target, q);
    target.iter().map(|&y| check_loss(y - alpha, q)).sum()
}

/// A fitted quantile regression: a vertex solution of the check-loss
/// program fitting exactly p observations.
#[derive(Debug, Clone, Serialize)]
pub struct QuantileFit {
    pub q: f64,
    pub names: Vec<String>,
    pub coefficients: Vec<f64>,
    pub residuals: Vec<f64>,
    pub objective: f64,
    /// Koenker-Machado pseudo-R1 against the intercept-only model; `None`
    /// when the restricted loss is zero (constant target).
    pub pseudo_r1: Option<f64>,
    /// Rows fitted exactly, ascending.
    pub active_set: Vec<usize>,
    /// Dual solution in [0,1]^n (the regression rank scores before
    /// centering).
    pub dual: Vec<f64>,
    pub iterations: usize,
}

impl QuantileFit {
    pub fn coefficient(&self, name: &str) -> Option<f64> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.coefficients[i])
    }

    pub fn coefficient_map(&self) -> BTreeMap<String, f64> {
        self.names
            .iter()
            .cloned()
            .zip(self.coefficients.iter().copied())
            .collect()
    }
}

/// Maximum interior-point iterations before `NonConvergence`.
pub const MAX_ITERATIONS: usize = 200;

/// Minimizes the total check loss over the frame's columns.
pub fn fit_quantile(frame: &RegressionFrame) -> Result<QuantileFit, QregError> {
    let out = solver::solve_checkloss(frame.columns(), frame.target(), frame.q(), MAX_ITERATIONS)?;
    let restricted = restricted_intercept_loss(frame.target(), frame.q());
    let pseudo_r1 = (restricted > 0.0).then(|| 1.0 - out.objective / restricted);
    Ok(QuantileFit {
        q: frame.q(),
        names: frame.names().to_vec(),
        coefficients: out.coefficients,
        residuals: out.residuals,
        objective: out.objective,
        pseudo_r1,
        active_set: out.active_set,
        dual: out.dual,
        iterations: out.iterations,
    })
}

/// `R1(q) = 1 - V_full / V_restricted` with the intercept-only restricted
/// model on the same target and q.
pub fn pseudo_r1(fit_full: &QuantileFit, frame: &RegressionFrame) -> Result<f64, QregError> {
    if fit_full.residuals.len() != frame.n_rows() {
        return Err(QregError::InvalidFrame(
            "fit and frame have different row counts".into(),
        ));
    }
    let restricted = restricted_intercept_loss(frame.target(), fit_full.q);
    if restricted <= 0.0 {
        return Err(QregError::ZeroRestrictedLoss);
    }
    Ok(1.0 - fit_full.objective / restricted)
}

/// Inner product of the coefficients with a named regressor row. Every
/// coefficient name must be supplied; extra entries are ignored.
pub fn predict(fit: &QuantileFit, row: &BTreeMap<String, f64>) -> Result<f64, QregError> {
    let mut acc = 0.0;
    for (name, coef) in fit.names.iter().zip(&fit.coefficients) {
        let x = row
            .get(name)
            .ok_or_else(|| QregError::MissingRegressor(name.clone()))?;
        acc += coef * x;
    }
    Ok(acc)
}

/// Serialization form for fit results: coefficient and CI maps plus scalars.
#[derive(Debug, Clone, Serialize)]
pub struct FitReport {
    pub q: f64,
    pub coefficients: BTreeMap<String, f64>,
    pub ci: BTreeMap<String, (f64, f64)>,
    pub objective: f64,
    pub pseudo_r1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residuals: Option<Vec<f64>>,
}

impl FitReport {
    pub fn new(fit: &QuantileFit, ci: BTreeMap<String, (f64, f64)>, with_residuals: bool) -> Self {
        Self {
            q: fit.q,
            coefficients: fit.coefficient_map(),
            ci,
            objective: fit.objective,
            pseudo_r1: fit.pseudo_r1,
            residuals: with_residuals.then(|| fit.residuals.clone()),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("fit report serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qreg::frame::INTERCEPT;
    use chrono::NaiveDate;

    fn dates(n: usize) -> Vec<NaiveDate> {
        (0..n)
            .map(|i| {
                NaiveDate::from_ymd_opt(2018, 1, 1).unwrap() + chrono::Duration::days(i as i64)
            })
            .collect()
    }

    fn frame(q: f64, target: Vec<f64>, cols: Vec<(String, Vec<f64>)>) -> RegressionFrame {
        let n = target.len();
        RegressionFrame::new(q, 0, dates(n), target, cols, None).unwrap()
    }

    #[test]
    fn check_loss_values() {
        assert!((check_loss(2.0, 0.95) - 1.9).abs() < 1e-15);
        assert!((check_loss(-2.0, 0.95) - 0.1).abs() < 1e-15);
        for q in [0.05, 0.5, 0.95] {
            assert_eq!(check_loss(0.0, q), 0.0);
        }
    }

    #[test]
    fn intercept_only_median() {
        let f = frame(
            0.5,
            vec![1.0, 2.0, 3.0],
            vec![(INTERCEPT.into(), vec![1.0; 3])],
        );
        let fit = fit_quantile(&f).unwrap();
        assert!((fit.coefficient(INTERCEPT).unwrap() - 2.0).abs() < 1e-10);
        assert_eq!(fit.pseudo_r1, Some(0.0));
    }

    #[test]
    fn perfect_fit_has_unit_r1() {
        let x: Vec<f64> = (0..20).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| 3.0 + 2.0 * v).collect();
        let f = frame(
            0.95,
            y,
            vec![(INTERCEPT.into(), vec![1.0; 20]), ("x".into(), x)],
        );
        let fit = fit_quantile(&f).unwrap();
        let r1 = pseudo_r1(&fit, &f).unwrap();
        assert!((r1 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn constant_target_degenerates() {
        let f = frame(
            0.5,
            vec![4.0; 10],
            vec![(INTERCEPT.into(), vec![1.0; 10])],
        );
        let fit = fit_quantile(&f).unwrap();
        assert_eq!(fit.pseudo_r1, None);
        assert!(matches!(
            pseudo_r1(&fit, &f),
            Err(QregError::ZeroRestrictedLoss)
        ));
    }

    #[test]
    fn predict_dot_product_and_vertex_property() {
        let x: Vec<f64> = vec![0.0, 1.0, 2.0, 3.0, 5.0, 8.0];
        let y: Vec<f64> = vec![1.0, 2.5, 2.9, 4.2, 6.0, 9.1];
        let f = frame(
            0.5,
            y.clone(),
            vec![(INTERCEPT.into(), vec![1.0; 6]), ("x".into(), x.clone())],
        );
        let fit = fit_quantile(&f).unwrap();

        // all-zero row with intercept 1 returns alpha
        let row: BTreeMap<String, f64> =
            [(INTERCEPT.to_string(), 1.0), ("x".to_string(), 0.0)].into();
        assert!(
            (predict(&fit, &row).unwrap() - fit.coefficient(INTERCEPT).unwrap()).abs() < 1e-12
        );

        // exactly-fit observations are reproduced
        for &i in &fit.active_set {
            let row: BTreeMap<String, f64> =
                [(INTERCEPT.to_string(), 1.0), ("x".to_string(), x[i])].into();
            assert!((predict(&fit, &row).unwrap() - y[i]).abs() < 1e-10);
        }

        // hand-computed dot product
        let row: BTreeMap<String, f64> =
            [(INTERCEPT.to_string(), 1.0), ("x".to_string(), 4.0)].into();
        let want = fit.coefficient(INTERCEPT).unwrap() + 4.0 * fit.coefficient("x").unwrap();
        assert!((predict(&fit, &row).unwrap() - want).abs() < 1e-12);

        // missing regressor errors
        let row: BTreeMap<String, f64> = [(INTERCEPT.to_string(), 1.0)].into();
        assert!(matches!(
            predict(&fit, &row),
            Err(QregError::MissingRegressor(_))
        ));
    }

    #[test]
    fn fit_report_serializes_maps_and_scalars() {
        let f = frame(
            0.5,
            vec![1.0, 2.0, 3.0, 4.0],
            vec![(INTERCEPT.into(), vec![1.0; 4])],
        );
        let fit = fit_quantile(&f).unwrap();
        let report = FitReport::new(&fit, BTreeMap::new(), false);
        let json: serde_json::Value = serde_json::from_str(&report.to_json()).unwrap();
        assert_eq!(json["q"], 0.5);
        assert!(json["coefficients"]["intercept"].is_number());
        assert!(json.get("residuals").is_none());
    }

    #[test]
    fn duplicate_regressor_is_rank_deficient() {
        let x: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let f = frame(
            0.5,
            x.clone(),
            vec![
                (INTERCEPT.into(), vec![1.0; 10]),
                ("a".into(), x.clone()),
                ("b".into(), x),
            ],
        );
        assert!(matches!(fit_quantile(&f), Err(QregError::RankDeficient)));
    }
}
