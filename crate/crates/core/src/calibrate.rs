//! Country-parameter calibration.
//!
//! The fitting pipeline is an exhaustive integer-lag search wrapped around
//! a coarse grid over `(a2, b, c)` and a derivative-free coordinate
//! refinement from the best vertex. The objective is the sum of squared
//! differences between the smoothed observed growth series and the model
//! prediction over the evaluation window; R² is reported afterwards but
//! never optimized, because it is affine-invariant and would leave the
//! scale and offset unidentified.
//!
//! Only the ratio `n0 / b` is identified (see [`crate::model`]), so `n0`
//! stays fixed throughout and only `b` moves. Grid vertices and lag
//! candidates are evaluated in parallel; the reduction is a minimum with a
//! lexicographic `(lag, a2, b, c)` tie-break, so results do not depend on
//! worker count or evaluation order.

use crate::diagnostics::{ols_fit, DiagnosticsError};
use crate::model::{predict_growth, ModelError, ProductivityModelParams};
use crate::series::{align, AnnualSeries, SeriesError, SmoothingMode, YearWindow};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CalibrationError {
    #[error("invalid calibration spec field {field}: {reason}")]
    InvalidSpec { field: &'static str, reason: String },
    #[error("refinement start lies outside the {field} bounds")]
    StartOutOfBounds { field: &'static str },
    #[error("evaluation window keeps only {n} points, need at least {min}")]
    InsufficientOverlap { n: usize, min: usize },
    #[error("objective is not finite for these parameters")]
    NonFiniteObjective,
    #[error("no feasible grid vertex in the whole lag range")]
    AllVerticesInfeasible,
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

fn invalid_spec(field: &'static str, reason: impl Into<String>) -> CalibrationError {
    CalibrationError::InvalidSpec {
        field,
        reason: reason.into(),
    }
}

/// Grid resolution per continuous parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridResolution {
    pub a2: usize,
    pub b: usize,
    pub c: usize,
}

/// Everything the calibration needs besides the data: bounds, the lag
/// range, the fixed quantities, grid resolution and refinement control.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationSpec {
    /// Bounds on the trend increment, dollars, `[lo, hi]` with `lo > 0`.
    pub a2: (f64, f64),
    /// Bounds on the map divisor; both ends must share a sign, so the
    /// interval excludes a neighborhood of zero.
    pub b: (f64, f64),
    /// Bounds on the map offset, per year.
    pub c: (f64, f64),
    /// Inclusive integer lag range in years.
    pub lag: (u32, u32),
    /// Recursion seed, fixed during calibration.
    pub n0: f64,
    /// Year at which the recursion is seeded.
    pub base_year: i32,
    /// Odd window used to smooth the observed series before fitting.
    pub smoothing_window: usize,
    #[serde(default)]
    pub smoothing_mode: SmoothingMode,
    pub grid: GridResolution,
    /// Stop refining once a sweep improves the objective by less than this.
    #[serde(default = "default_tol")]
    pub tol: f64,
    /// Maximum number of refinement sweeps.
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    /// Optional calendar-year clip on the evaluation window.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<YearWindow>,
}

fn default_tol() -> f64 {
    1e-10
}

fn default_max_iters() -> usize {
    500
}

impl CalibrationSpec {
    pub fn validate(&self) -> Result<(), CalibrationError> {
        for (field, (lo, hi)) in [("a2", self.a2), ("b", self.b), ("c", self.c)] {
            if !(lo.is_finite() && hi.is_finite()) {
                return Err(invalid_spec(field, "bounds must be finite"));
            }
            if lo > hi {
                return Err(invalid_spec(field, format!("bounds out of order: {lo} > {hi}")));
            }
        }
        if self.a2.0 <= 0.0 {
            return Err(invalid_spec("a2", "lower bound must be positive"));
        }
        if self.b.0 * self.b.1 <= 0.0 {
            return Err(invalid_spec(
                "b",
                "bounds must share a sign and exclude zero",
            ));
        }
        if self.lag.0 > self.lag.1 {
            return Err(invalid_spec("lag", "range out of order"));
        }
        if self.lag.1 > 10 {
            return Err(invalid_spec("lag", "lags above 10 years are not supported"));
        }
        if !(self.n0.is_finite() && self.n0 > 0.0) {
            return Err(invalid_spec("n0", "must be positive"));
        }
        if self.smoothing_window.is_multiple_of(2) || self.smoothing_window == 0 {
            return Err(invalid_spec("smoothing_window", "must be odd"));
        }
        for (field, res) in [
            ("grid.a2", self.grid.a2),
            ("grid.b", self.grid.b),
            ("grid.c", self.grid.c),
        ] {
            if res < 2 {
                return Err(invalid_spec(field, "grid resolution must be at least 2"));
            }
        }
        if self.tol.is_nan() || self.tol < 0.0 {
            return Err(invalid_spec("tol", "must be non-negative"));
        }
        Ok(())
    }

    fn params_at(&self, a2: f64, b: f64, c: f64, lag: u32) -> ProductivityModelParams {
        ProductivityModelParams {
            a2,
            n0: self.n0,
            base_year: self.base_year,
            b,
            c,
            lag_t: lag,
            smoothing_window: self.smoothing_window,
        }
    }
}

/// A calibrated parameter set with its fit statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub params: ProductivityModelParams,
    /// Sum of squared residuals over the evaluation window.
    pub objective: f64,
    /// Squared Pearson correlation of smoothed-observed against predicted
    /// over the window; 0 when the prediction is degenerate (no variance).
    pub r_squared: f64,
    /// First and last year of the window actually used.
    pub window: (i32, i32),
    /// Smoothed-observed minus predicted, year by year.
    pub residuals: AnnualSeries,
    /// Number of objective evaluations spent.
    pub evaluations: u64,
}

/// The winning vertex of a grid search.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPoint {
    pub params: ProductivityModelParams,
    pub objective: f64,
    pub evaluations: u64,
}

/// Sum of squared differences between the smoothed observed series and the
/// prediction from `params`, over the (optionally clipped) overlap.
pub fn objective(
    params: &ProductivityModelParams,
    gdppc: &AnnualSeries,
    observed_dpp: &AnnualSeries,
    spec: &CalibrationSpec,
) -> Result<f64, CalibrationError> {
    let smoothed = observed_dpp.smoothed(params.smoothing_window, spec.smoothing_mode)?;
    sse_against(params, gdppc, &smoothed, spec)
}

/// Objective with the observed series already smoothed; shared by the grid
/// and refinement loops so smoothing happens once per calibration.
fn sse_against(
    params: &ProductivityModelParams,
    gdppc: &AnnualSeries,
    smoothed_obs: &AnnualSeries,
    spec: &CalibrationSpec,
) -> Result<f64, CalibrationError> {
    let (obs, pred) = evaluation_pair(params, gdppc, smoothed_obs, spec)?;
    let sse: f64 = obs
        .values()
        .iter()
        .zip(pred.values())
        .map(|(o, p)| {
            let r = o - p;
            r * r
        })
        .sum();
    if !sse.is_finite() {
        return Err(CalibrationError::NonFiniteObjective);
    }
    Ok(sse)
}

/// Aligned and clipped (smoothed-observed, predicted) pair.
fn evaluation_pair(
    params: &ProductivityModelParams,
    gdppc: &AnnualSeries,
    smoothed_obs: &AnnualSeries,
    spec: &CalibrationSpec,
) -> Result<(AnnualSeries, AnnualSeries), CalibrationError> {
    let pred = predict_growth(gdppc, params)?.series;
    let (mut obs, mut pred) = align(smoothed_obs, &pred)?;
    if let Some(w) = spec.window {
        obs = obs.clip(w)?;
        pred = pred.clip(w)?;
    }
    if obs.len() < 3 {
        return Err(CalibrationError::InsufficientOverlap {
            n: obs.len(),
            min: 3,
        });
    }
    Ok((obs, pred))
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if lo == hi {
        return vec![lo];
    }
    (0..n)
        .map(|i| {
            if i == n - 1 {
                hi
            } else {
                lo + (hi - lo) * i as f64 / (n - 1) as f64
            }
        })
        .collect()
}

/// Evaluate the objective at every `(a2, b, c)` vertex for a single lag.
/// Vertices are generated in lexicographic order and the minimum keeps the
/// first of any tied value, so the result is reproducible under any degree
/// of parallelism.
fn grid_search_at_lag(
    spec: &CalibrationSpec,
    lag: u32,
    gdppc: &AnnualSeries,
    smoothed_obs: &AnnualSeries,
) -> (Option<(f64, ProductivityModelParams)>, u64) {
    let mut vertices = Vec::with_capacity(spec.grid.a2 * spec.grid.b * spec.grid.c);
    for &a2 in &linspace(spec.a2.0, spec.a2.1, spec.grid.a2) {
        for &b in &linspace(spec.b.0, spec.b.1, spec.grid.b) {
            for &c in &linspace(spec.c.0, spec.c.1, spec.grid.c) {
                vertices.push(spec.params_at(a2, b, c, lag));
            }
        }
    }
    let evals = vertices.len() as u64;
    let objectives: Vec<Option<f64>> = vertices
        .par_iter()
        .map(|p| sse_against(p, gdppc, smoothed_obs, spec).ok())
        .collect();
    let mut best: Option<(f64, usize)> = None;
    for (i, obj) in objectives.iter().enumerate() {
        if let Some(o) = obj {
            if best.is_none_or(|(bo, _)| *o < bo) {
                best = Some((*o, i));
            }
        }
    }
    (best.map(|(o, i)| (o, vertices[i].clone())), evals)
}

/// Exhaustive grid search over `(a2, b, c)` for every lag in range.
///
/// Returns the minimum-objective vertex; ties break lexicographically by
/// `(lag, a2, b, c)` ascending. Errors when no vertex is feasible.
pub fn grid_search(
    spec: &CalibrationSpec,
    gdppc: &AnnualSeries,
    observed_dpp: &AnnualSeries,
) -> Result<GridPoint, CalibrationError> {
    spec.validate()?;
    let smoothed = observed_dpp.smoothed(spec.smoothing_window, spec.smoothing_mode)?;
    let mut best: Option<(f64, ProductivityModelParams)> = None;
    let mut evals = 0;
    for lag in spec.lag.0..=spec.lag.1 {
        let (candidate, n) = grid_search_at_lag(spec, lag, gdppc, &smoothed);
        evals += n;
        if let Some((obj, params)) = candidate {
            if best.as_ref().is_none_or(|(bo, _)| obj < *bo) {
                best = Some((obj, params));
            }
        }
    }
    let (objective, params) = best.ok_or(CalibrationError::AllVerticesInfeasible)?;
    Ok(GridPoint {
        params,
        objective,
        evaluations: evals,
    })
}

/// State shared by the refinement loops.
struct Descent<'a> {
    spec: &'a CalibrationSpec,
    gdppc: &'a AnnualSeries,
    smoothed: &'a AnnualSeries,
    bounds: [(f64, f64); 3],
    evals: u64,
}

impl Descent<'_> {
    fn eval(&mut self, params: &ProductivityModelParams) -> f64 {
        self.evals += 1;
        sse_against(params, self.gdppc, self.smoothed, self.spec).unwrap_or(f64::INFINITY)
    }

    /// One cyclic coordinate sweep around `point`. Each coordinate probes
    /// its step in both directions and keeps doubling along an improving
    /// direction. Returns the improved point or `point` unchanged.
    fn sweep(
        &mut self,
        point: &ProductivityModelParams,
        point_obj: f64,
        steps: &[f64; 3],
    ) -> (ProductivityModelParams, f64) {
        let mut current = point.clone();
        let mut obj = point_obj;
        #[allow(clippy::needless_range_loop)] // coord indexes three parallel arrays
        for coord in 0..3 {
            if steps[coord] == 0.0 {
                continue;
            }
            'directions: for dir in [1.0, -1.0] {
                let mut step = steps[coord] * dir;
                let mut advanced = false;
                loop {
                    let (lo, hi) = self.bounds[coord];
                    let here = get_coord(&current, coord);
                    let candidate_value = (here + step).clamp(lo, hi);
                    if candidate_value == here {
                        break;
                    }
                    let candidate = set_coord(&current, coord, candidate_value);
                    let o = self.eval(&candidate);
                    if o < obj {
                        current = candidate;
                        obj = o;
                        advanced = true;
                        step *= 2.0;
                    } else {
                        break;
                    }
                }
                if advanced {
                    break 'directions;
                }
            }
        }
        (current, obj)
    }
}

/// Derivative-free local descent over `(a2, b, c)` with the lag fixed.
///
/// Pattern search in the Hooke-Jeeves style: cyclic coordinate sweeps with
/// doubling along improving directions, followed by pattern moves that
/// project the last successful displacement to track a correlated valley.
/// An iteration that improves the objective by less than `spec.tol` halves
/// every step; refinement stops once the steps shrink below resolution or
/// after `spec.max_iters` iterations. The result never degrades the
/// starting objective and stays inside the bounds.
pub fn refine(
    start: &ProductivityModelParams,
    spec: &CalibrationSpec,
    gdppc: &AnnualSeries,
    observed_dpp: &AnnualSeries,
) -> Result<FitResult, CalibrationError> {
    spec.validate()?;
    start.validate()?;
    let bounds = [spec.a2, spec.b, spec.c];
    let values = [start.a2, start.b, start.c];
    for (i, field) in ["a2", "b", "c"].iter().enumerate() {
        if values[i] < bounds[i].0 || values[i] > bounds[i].1 {
            return Err(CalibrationError::StartOutOfBounds { field });
        }
    }

    let smoothed = observed_dpp.smoothed(spec.smoothing_window, spec.smoothing_mode)?;
    let mut descent = Descent {
        spec,
        gdppc,
        smoothed: &smoothed,
        bounds,
        evals: 0,
    };
    let mut current = start.clone();
    let mut obj = sse_against(&current, gdppc, &smoothed, spec)?;
    descent.evals += 1;

    // An infinite tolerance means no improvement is ever worth a sweep.
    if spec.tol == f64::INFINITY {
        let evals = descent.evals;
        return assemble(current, obj, evals, gdppc, &smoothed, spec);
    }

    let mut steps: [f64; 3] = [
        half_cell(spec.a2, spec.grid.a2),
        half_cell(spec.b, spec.grid.b),
        half_cell(spec.c, spec.grid.c),
    ];
    let floors: [f64; 3] = bounds.map(|(lo, hi)| lo.abs().max(hi.abs()).max(1.0) * 1e-14);

    let mut iters = 0;
    while iters < spec.max_iters {
        let before = obj;
        let (mut trial, mut trial_obj) = descent.sweep(&current, obj, &steps);
        if trial_obj < obj {
            // Pattern phase: project the successful displacement and sweep
            // around the projected point while that keeps paying off.
            loop {
                let mut pattern = trial.clone();
                #[allow(clippy::needless_range_loop)]
                for coord in 0..3 {
                    let (lo, hi) = bounds[coord];
                    let projected =
                        2.0 * get_coord(&trial, coord) - get_coord(&current, coord);
                    set_coord_in_place(&mut pattern, coord, projected.clamp(lo, hi));
                }
                let pattern_obj = descent.eval(&pattern);
                let (probe, probe_obj) = descent.sweep(&pattern, pattern_obj, &steps);
                if probe_obj < trial_obj {
                    current = trial;
                    trial = probe;
                    trial_obj = probe_obj;
                } else {
                    break;
                }
            }
            current = trial;
            obj = trial_obj;
        }
        iters += 1;
        if before - obj < spec.tol {
            for s in &mut steps {
                *s *= 0.5;
            }
            if steps.iter().zip(&floors).all(|(s, f)| *s < *f) {
                break;
            }
        }
    }
    let evals = descent.evals;
    assemble(current, obj, evals, gdppc, &smoothed, spec)
}

fn half_cell((lo, hi): (f64, f64), res: usize) -> f64 {
    (hi - lo) / (2.0 * (res - 1) as f64)
}

fn get_coord(p: &ProductivityModelParams, coord: usize) -> f64 {
    match coord {
        0 => p.a2,
        1 => p.b,
        _ => p.c,
    }
}

fn set_coord(p: &ProductivityModelParams, coord: usize, value: f64) -> ProductivityModelParams {
    let mut out = p.clone();
    set_coord_in_place(&mut out, coord, value);
    out
}

fn set_coord_in_place(p: &mut ProductivityModelParams, coord: usize, value: f64) {
    match coord {
        0 => p.a2 = value,
        1 => p.b = value,
        _ => p.c = value,
    }
}

fn assemble(
    params: ProductivityModelParams,
    objective: f64,
    evaluations: u64,
    gdppc: &AnnualSeries,
    smoothed_obs: &AnnualSeries,
    spec: &CalibrationSpec,
) -> Result<FitResult, CalibrationError> {
    let (obs, pred) = evaluation_pair(&params, gdppc, smoothed_obs, spec)?;
    let residual_values: Vec<f64> = obs
        .values()
        .iter()
        .zip(pred.values())
        .map(|(o, p)| o - p)
        .collect();
    let residuals = AnnualSeries::new(obs.start_year(), residual_values)?;
    let r_squared = match ols_fit(&pred, &obs) {
        Ok(report) => report.r_squared,
        Err(DiagnosticsError::ZeroVariance) => 0.0,
        Err(DiagnosticsError::Series(e)) => return Err(e.into()),
        Err(DiagnosticsError::TooFewPoints { n, min }) => {
            return Err(CalibrationError::InsufficientOverlap { n, min })
        }
        Err(DiagnosticsError::NoFeasibleLag { .. }) => unreachable!("ols_fit never scans lags"),
    };
    Ok(FitResult {
        params,
        objective,
        r_squared,
        window: (obs.start_year(), obs.end_year()),
        residuals,
        evaluations,
    })
}

/// Full calibration: per-lag grid search and refinement, best lag wins.
///
/// Ties across lags resolve to the smaller lag. Lags whose evaluation
/// window is infeasible are skipped; an error is returned only when every
/// lag is. Two runs with identical inputs produce bit-identical results.
pub fn calibrate(
    spec: &CalibrationSpec,
    gdppc: &AnnualSeries,
    observed_dpp: &AnnualSeries,
) -> Result<FitResult, CalibrationError> {
    spec.validate()?;
    let smoothed = observed_dpp.smoothed(spec.smoothing_window, spec.smoothing_mode)?;
    let mut total_evals: u64 = 0;
    let mut best: Option<FitResult> = None;
    for lag in spec.lag.0..=spec.lag.1 {
        let (candidate, n) = grid_search_at_lag(spec, lag, gdppc, &smoothed);
        total_evals += n;
        let Some((_, vertex)) = candidate else {
            continue;
        };
        let fit = refine(&vertex, spec, gdppc, observed_dpp)?;
        total_evals += fit.evaluations;
        if best.as_ref().is_none_or(|b| fit.objective < b.objective) {
            best = Some(fit);
        }
    }
    let mut winner = best.ok_or(CalibrationError::AllVerticesInfeasible)?;
    winner.evaluations = total_evals;
    Ok(winner)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn true_params() -> ProductivityModelParams {
        ProductivityModelParams {
            a2: 105.0,
            n0: 1_450_000.0,
            base_year: 1959,
            b: -6_000_000.0,
            c: 0.24,
            lag_t: 2,
            smoothing_window: 1,
        }
    }

    // Synthetic GDP with seeded relative deviations and the exact model
    // productivity derived from it.
    fn synthetic(seed: u64, years: usize) -> (AnnualSeries, AnnualSeries) {
        let params = true_params();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut g = vec![2000.0f64];
        for _ in 1..years {
            let prev = *g.last().unwrap();
            let eps: f64 = rng.random_range(-0.03..0.03);
            g.push(prev + params.a2 + eps * prev);
        }
        let gdppc = AnnualSeries::new(params.base_year, g).unwrap();
        let observed = predict_growth(&gdppc, &params).unwrap().series;
        (gdppc, observed)
    }

    fn spec_around_truth() -> CalibrationSpec {
        CalibrationSpec {
            a2: (52.5, 157.5),
            b: (-9e6, -3e6),
            c: (0.0, 0.48),
            lag: (0, 8),
            n0: 1_450_000.0,
            base_year: 1959,
            smoothing_window: 1,
            smoothing_mode: SmoothingMode::Centered,
            grid: GridResolution { a2: 3, b: 3, c: 3 },
            tol: 1e-15,
            max_iters: 500,
            window: None,
        }
    }

    #[test]
    fn objective_is_zero_at_the_generating_params() {
        let (gdppc, observed) = synthetic(11, 50);
        let spec = spec_around_truth();
        let obj = objective(&true_params(), &gdppc, &observed, &spec).unwrap();
        assert!(obj <= 1e-20, "objective {obj}");
    }

    #[test]
    fn objective_of_constant_offset_is_n_delta_squared() {
        let (gdppc, observed) = synthetic(12, 40);
        let spec = spec_around_truth();
        let mut shifted = true_params();
        let delta = 0.0078125; // 2^-7, keeps the offset exact per point
        shifted.c += delta;
        let obj = objective(&shifted, &gdppc, &observed, &spec).unwrap();
        let n = observed.len() as f64;
        assert!(
            (obj - n * delta * delta).abs() < 1e-15,
            "obj {obj} vs {}",
            n * delta * delta
        );
    }

    #[test]
    fn objective_errors_on_empty_window() {
        let (gdppc, observed) = synthetic(13, 40);
        let mut spec = spec_around_truth();
        spec.window = Some(YearWindow::new(Some(2100), Some(2105)));
        assert!(matches!(
            objective(&true_params(), &gdppc, &observed, &spec),
            Err(CalibrationError::Series(_))
        ));
    }

    #[test]
    fn grid_finds_the_true_vertex() {
        let (gdppc, observed) = synthetic(14, 50);
        let spec = spec_around_truth();
        // The grid midpoints land exactly on (105, -6e6, 0.24).
        let point = grid_search(&spec, &gdppc, &observed).unwrap();
        assert_eq!(point.params.a2, 105.0);
        assert_eq!(point.params.b, -6e6);
        assert_eq!(point.params.c, 0.24);
        assert_eq!(point.params.lag_t, 2);
        assert!(point.objective <= 1e-20);
        assert_eq!(point.evaluations, 27 * 9);
    }

    #[test]
    fn one_vertex_grid_returns_it() {
        let (gdppc, observed) = synthetic(15, 40);
        let mut spec = spec_around_truth();
        spec.a2 = (105.0, 105.0);
        spec.b = (-6e6, -6e6);
        spec.c = (0.25, 0.25);
        spec.lag = (1, 1);
        let point = grid_search(&spec, &gdppc, &observed).unwrap();
        assert_eq!(point.params.a2, 105.0);
        assert_eq!(point.params.c, 0.25);
        assert_eq!(point.params.lag_t, 1);
        assert_eq!(point.evaluations, 1);
    }

    #[test]
    fn equal_objectives_tie_break_lexicographically() {
        // Trend-exact GDP with integer steps: deviation is exactly zero, so
        // the prediction is the constant n0/b + c. With n0/b = -0.25 and
        // observed identically zero, c = 0.1875 and c = 0.3125 miss by
        // exactly the same 0.0625 per point.
        let mut g = vec![2000.0];
        for _ in 0..30 {
            g.push(g.last().unwrap() + 105.0);
        }
        let gdppc = AnnualSeries::new(1959, g).unwrap();
        let observed = AnnualSeries::new(1959, vec![0.0; 31]).unwrap();
        let spec = CalibrationSpec {
            a2: (105.0, 105.0),
            b: (-4e6, -4e6),
            c: (0.1875, 0.3125),
            lag: (0, 0),
            n0: 1_000_000.0,
            base_year: 1959,
            smoothing_window: 1,
            smoothing_mode: SmoothingMode::Centered,
            grid: GridResolution { a2: 2, b: 2, c: 2 },
            tol: 1e-10,
            max_iters: 500,
            window: None,
        };
        let point = grid_search(&spec, &gdppc, &observed).unwrap();
        assert_eq!(point.params.c, 0.1875);
    }

    #[test]
    fn refine_keeps_an_already_optimal_start() {
        let (gdppc, observed) = synthetic(16, 50);
        let spec = spec_around_truth();
        let fit = refine(&true_params(), &spec, &gdppc, &observed).unwrap();
        assert_eq!(fit.params, true_params());
        assert!(fit.objective <= 1e-20);
    }

    #[test]
    fn refine_with_infinite_tolerance_returns_start() {
        let (gdppc, observed) = synthetic(17, 50);
        let mut spec = spec_around_truth();
        spec.tol = f64::INFINITY;
        let mut start = true_params();
        start.c = 0.3; // deliberately off
        let fit = refine(&start, &spec, &gdppc, &observed).unwrap();
        assert_eq!(fit.params, start);
        assert_eq!(fit.evaluations, 1);
    }

    #[test]
    fn refine_recovers_from_a_five_percent_perturbation() {
        let (gdppc, observed) = synthetic(18, 60);
        let spec = spec_around_truth();
        let truth = true_params();
        let mut start = truth.clone();
        start.a2 *= 1.05;
        start.b *= 0.95;
        start.c *= 1.05;
        let fit = refine(&start, &spec, &gdppc, &observed).unwrap();
        assert!(
            fit.objective < 1e-12,
            "objective did not converge: {}",
            fit.objective
        );
        assert!((fit.params.a2 - truth.a2).abs() / truth.a2 < 0.01);
        assert!((fit.params.c - truth.c).abs() / truth.c < 0.01);
        let ratio = spec.n0 / fit.params.b;
        let true_ratio = truth.n0 / truth.b;
        assert!((ratio - true_ratio).abs() / true_ratio.abs() < 0.01);
    }

    #[test]
    fn refine_rejects_out_of_bounds_start() {
        let (gdppc, observed) = synthetic(19, 40);
        let spec = spec_around_truth();
        let mut start = true_params();
        start.a2 = 1000.0;
        assert!(matches!(
            refine(&start, &spec, &gdppc, &observed),
            Err(CalibrationError::StartOutOfBounds { field: "a2" })
        ));
    }

    #[test]
    fn calibrate_beats_the_grid_and_recovers_truth() {
        let (gdppc, observed) = synthetic(20, 60);
        let spec = spec_around_truth();
        let grid = grid_search(&spec, &gdppc, &observed).unwrap();
        let fit = calibrate(&spec, &gdppc, &observed).unwrap();
        assert!(fit.objective <= grid.objective);
        assert_eq!(fit.params.lag_t, 2);
        assert!(fit.r_squared >= 0.999);
    }

    #[test]
    fn calibrate_matches_constant_observation_with_degenerate_family() {
        // Trend-exact GDP: prediction is n0/b + c, so any (b, c) with
        // n0/b + c = k fits a constant observation perfectly.
        let mut g = vec![2000.0];
        for _ in 0..30 {
            g.push(g.last().unwrap() + 105.0);
        }
        let gdppc = AnnualSeries::new(1959, g).unwrap();
        let observed = AnnualSeries::new(1959, vec![0.05; 31]).unwrap();
        let spec = CalibrationSpec {
            a2: (105.0, 105.0),
            b: (-8e6, -2e6),
            c: (0.0, 0.6),
            lag: (0, 2),
            n0: 1_000_000.0,
            base_year: 1959,
            smoothing_window: 1,
            smoothing_mode: SmoothingMode::Centered,
            grid: GridResolution { a2: 2, b: 5, c: 5 },
            tol: 1e-16,
            max_iters: 500,
            window: None,
        };
        let fit = calibrate(&spec, &gdppc, &observed).unwrap();
        assert!(fit.objective < 1e-12, "objective {}", fit.objective);
        let implied = spec.n0 / fit.params.b + fit.params.c;
        assert!((implied - 0.05).abs() < 1e-7, "implied constant {implied}");
    }

    #[test]
    fn calibrate_is_deterministic() {
        let (gdppc, observed) = synthetic(21, 50);
        let spec = spec_around_truth();
        let fit1 = calibrate(&spec, &gdppc, &observed).unwrap();
        let fit2 = calibrate(&spec, &gdppc, &observed).unwrap();
        assert_eq!(fit1, fit2);
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let base = spec_around_truth();
        let mut s = base.clone();
        s.b = (-1.0, 1.0);
        assert!(matches!(
            s.validate(),
            Err(CalibrationError::InvalidSpec { field: "b", .. })
        ));
        let mut s = base.clone();
        s.a2 = (-5.0, 10.0);
        assert!(s.validate().is_err());
        let mut s = base.clone();
        s.grid.c = 1;
        assert!(s.validate().is_err());
        let mut s = base.clone();
        s.lag = (5, 2);
        assert!(s.validate().is_err());
        let mut s = base;
        s.smoothing_window = 2;
        assert!(s.validate().is_err());
    }
}
