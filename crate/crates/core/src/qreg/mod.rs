//! Linear quantile regression by check-loss minimization: coefficients,
//! Koenker-Machado pseudo-R1, and rank-inversion confidence intervals.

mod fit;
mod frame;
mod linalg;
mod rank_ci;
mod solver;

pub use fit::{
    check_loss, fit_quantile, predict, pseudo_r1, restricted_intercept_loss, FitReport,
    QuantileFit, MAX_ITERATIONS,
};
pub use frame::{RegressionFrame, INTERCEPT};
pub use rank_ci::rank_inversion_ci;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum QregError {
    #[error("design matrix is rank deficient")]
    RankDeficient,
    #[error("solver did not converge within {0} iterations")]
    NonConvergence(usize),
    #[error("restricted model has zero check loss; pseudo-R1 undefined")]
    ZeroRestrictedLoss,
    #[error("rank-inversion bracket exhausted without rejection")]
    UnboundedInterval,
    #[error("missing regressor {0:?}")]
    MissingRegressor(String),
    #[error("invalid frame: {0}")]
    InvalidFrame(String),
}
