//! Regression and lag diagnostics.
//!
//! The reported R² is the squared Pearson correlation from an ordinary
//! least squares fit, not `1 - SSE/SST` around the identity line: the model
//! already has affine freedom through its scale and offset parameters, so
//! penalizing a pure affine discrepancy would say nothing about the shape
//! agreement the statistic is meant to capture.

use crate::series::{align, AnnualSeries, SeriesError};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum DiagnosticsError {
    #[error("regression needs at least {min} overlapping points, got {n}")]
    TooFewPoints { n: usize, min: usize },
    #[error("regressor has zero variance over the evaluation window")]
    ZeroVariance,
    #[error("no lag in {lag_min}..={lag_max} leaves a usable overlap")]
    NoFeasibleLag { lag_min: i32, lag_max: i32 },
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// Summary of a simple linear regression of `y` on `x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionReport {
    pub slope: f64,
    pub intercept: f64,
    /// Squared Pearson correlation, in [0, 1].
    pub r_squared: f64,
    pub n_points: usize,
    /// First and last calendar year of the overlap actually used.
    pub window: (i32, i32),
}

/// Ordinary least squares of `y` on `x` over their common years.
///
/// Uses centered sums for numerical stability. Errors when the overlap has
/// fewer than three points or `x` is constant over it.
pub fn ols_fit(x: &AnnualSeries, y: &AnnualSeries) -> Result<RegressionReport, DiagnosticsError> {
    let (x, y) = align(x, y)?;
    let n = x.len();
    if n < 3 {
        return Err(DiagnosticsError::TooFewPoints { n, min: 3 });
    }
    let nf = n as f64;
    let mean_x = x.values().iter().sum::<f64>() / nf;
    let mean_y = y.values().iter().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for (&xv, &yv) in x.values().iter().zip(y.values()) {
        let dx = xv - mean_x;
        let dy = yv - mean_y;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if sxx == 0.0 {
        return Err(DiagnosticsError::ZeroVariance);
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    // A constant y is fit perfectly by the horizontal line; report 1.
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        ((sxy * sxy) / (sxx * syy)).clamp(0.0, 1.0)
    };
    Ok(RegressionReport {
        slope,
        intercept,
        r_squared,
        n_points: n,
        window: (x.start_year(), x.end_year()),
    })
}

/// Scan integer lags and return the one maximizing the R² of `observed`
/// against the shifted prediction, with ties broken by the smallest lag.
///
/// Candidates whose overlap is too short or degenerate are skipped; if
/// every candidate is, an error is returned.
pub fn best_lag(
    observed: &AnnualSeries,
    predicted_unlagged: &AnnualSeries,
    lag_min: i32,
    lag_max: i32,
) -> Result<(i32, f64), DiagnosticsError> {
    let mut best: Option<(i32, f64)> = None;
    for lag in lag_min..=lag_max {
        let shifted = predicted_unlagged.shift(lag);
        let r2 = match ols_fit(&shifted, observed) {
            Ok(report) => report.r_squared,
            Err(_) => continue,
        };
        match best {
            Some((_, best_r2)) if r2 <= best_r2 => {}
            _ => best = Some((lag, r2)),
        }
    }
    best.ok_or(DiagnosticsError::NoFeasibleLag { lag_min, lag_max })
}

/// Full lag scan: R² for every feasible candidate, in lag order.
///
/// This is the table behind [`best_lag`]; the CLI prints it when asked to
/// scan.
pub fn lag_scan(
    observed: &AnnualSeries,
    predicted_unlagged: &AnnualSeries,
    lag_min: i32,
    lag_max: i32,
) -> Vec<(i32, Option<f64>)> {
    (lag_min..=lag_max)
        .map(|lag| {
            let shifted = predicted_unlagged.shift(lag);
            (lag, ols_fit(&shifted, observed).ok().map(|r| r.r_squared))
        })
        .collect()
}
