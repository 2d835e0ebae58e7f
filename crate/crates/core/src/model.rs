//! The productivity model.
//!
//! Everything in this module is driven by one quantity: the deviation of
//! annual real-GDP-per-capita growth from a country-specific trend,
//!
//! ```text
//! dev(t) = (G(t) - G(t-1)) / G(t-1)  -  a2 / G(t-1)
//! ```
//!
//! The trend term `a2 / G` says that neutral growth corresponds to a fixed
//! annual dollar increment `a2`: when `G(t) = G(t-1) + a2` the deviation is
//! exactly zero. The deviation feeds two parallel formulations:
//!
//! 1. A formal population proxy `N` evolved by the one-year recursion
//!    `N(t) = N(t-1) * (2 * dev(t) + 1)`, followed by the linear map
//!    `dP/P = N/b + c` applied with an integer lag `T`. The lag is what
//!    makes the model predictive: the map extends `T` years past the last
//!    GDP observation.
//! 2. A labor-force-participation (LFP) path integrated from the same
//!    deviation, plus diagnostic forms expressing productivity growth
//!    through the LFP path.
//!
//! `N` is a formally defined proxy, not a census count, so no rounding to
//! whole persons is ever applied. Only the ratio `n0 / b` is identified by
//! the data (scaling both leaves every prediction unchanged); calibration
//! therefore keeps `n0` fixed.

use crate::series::{AnnualSeries, SeriesError};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("non-positive GDP value {value} at year {year}")]
    NonPositiveGdp { year: i32, value: f64 },
    #[error("base year {base_year} outside the GDP range {first}..={last}")]
    BaseYearOutsideSeries {
        base_year: i32,
        first: i32,
        last: i32,
    },
    #[error("GDP history must reach back to {needed} to start the LFP path at {t0} with lag {lag}")]
    InsufficientGdpHistory { needed: i32, t0: i32, lag: u32 },
    #[error("invalid parameter {field}: {reason}")]
    InvalidParam { field: &'static str, reason: String },
    #[error(transparent)]
    Series(#[from] SeriesError),
}

fn invalid(field: &'static str, reason: impl Into<String>) -> ModelError {
    ModelError::InvalidParam {
        field,
        reason: reason.into(),
    }
}

/// Parameters of the population recursion and the linear productivity map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProductivityModelParams {
    /// Trend increment in dollars per person per year.
    pub a2: f64,
    /// Population proxy at `base_year`, in (formal) persons.
    pub n0: f64,
    /// Calendar year at which the recursion is seeded with `n0`.
    pub base_year: i32,
    /// Scale divisor of the linear map, signed, in persons.
    pub b: f64,
    /// Offset of the linear map, per year.
    pub c: f64,
    /// Integer lag of productivity behind the GDP-derived driver, years.
    pub lag_t: u32,
    /// Odd moving-average window applied to observed series when fitting.
    pub smoothing_window: usize,
}

impl ProductivityModelParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.a2.is_finite() && self.a2 > 0.0) {
            return Err(invalid("a2", format!("must be positive, got {}", self.a2)));
        }
        if !(self.n0.is_finite() && self.n0 > 0.0) {
            return Err(invalid("n0", format!("must be positive, got {}", self.n0)));
        }
        if !(self.b.is_finite() && self.b != 0.0) {
            return Err(invalid("b", format!("must be non-zero, got {}", self.b)));
        }
        if !self.c.is_finite() {
            return Err(invalid("c", format!("must be finite, got {}", self.c)));
        }
        if self.lag_t > 10 {
            return Err(invalid(
                "lag_t",
                format!("must lie in 0..=10, got {}", self.lag_t),
            ));
        }
        if self.smoothing_window.is_multiple_of(2) || self.smoothing_window == 0 {
            return Err(invalid(
                "smoothing_window",
                format!("must be odd, got {}", self.smoothing_window),
            ));
        }
        Ok(())
    }
}

/// Parameters of the LFP evolution equation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LfpParams {
    pub b1: f64,
    pub c1: f64,
    /// Sensitivity exponent on the relative LFP excursion.
    pub alpha1: f64,
    /// Trend increment used for the LFP forcing, dollars per person per year.
    pub a1: f64,
    /// First simulated year.
    pub t0: i32,
    /// LFP level at `t0`, a fraction in (0, 1).
    pub lfp0: f64,
    pub lag_t: u32,
}

impl LfpParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.b1.is_finite() && self.b1 != 0.0) {
            return Err(invalid("b1", format!("must be non-zero, got {}", self.b1)));
        }
        if !self.c1.is_finite() || !self.alpha1.is_finite() {
            return Err(invalid("c1/alpha1", "must be finite".to_string()));
        }
        if !(self.a1.is_finite() && self.a1 > 0.0) {
            return Err(invalid("a1", format!("must be positive, got {}", self.a1)));
        }
        if !(self.lfp0.is_finite() && self.lfp0 > 0.0 && self.lfp0 < 1.0) {
            return Err(invalid(
                "lfp0",
                format!("must lie in (0, 1), got {}", self.lfp0),
            ));
        }
        Ok(())
    }
}

/// Parameters of the diagnostic productivity-from-LFP form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LfpProductivityParams {
    pub b2: f64,
    pub c2: f64,
    /// Shared with the LFP evolution equation.
    pub alpha1: f64,
    pub t0: i32,
    pub lfp0: f64,
}

impl LfpProductivityParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.b2.is_finite() && self.c2.is_finite() && self.alpha1.is_finite()) {
            return Err(invalid("b2/c2/alpha1", "must be finite".to_string()));
        }
        if !(self.lfp0.is_finite() && self.lfp0 > 0.0 && self.lfp0 < 1.0) {
            return Err(invalid(
                "lfp0",
                format!("must lie in (0, 1), got {}", self.lfp0),
            ));
        }
        Ok(())
    }
}

/// Parameters linking the LFP path to the specific-age count `Ns` and on to
/// productivity growth. No published values exist for these constants; they
/// are accepted through user configuration only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NsLinkParams {
    pub b3: f64,
    pub c3: f64,
    /// Exponent on the relative LFP excursion; conventionally equal to the
    /// `alpha1` of the LFP equation.
    pub alpha2: f64,
    pub b4: f64,
    pub c4: f64,
    pub lag_t: i32,
    /// Reference LFP level for the exponential term.
    pub lfp0: f64,
}

impl NsLinkParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        for (name, v) in [
            ("b3", self.b3),
            ("c3", self.c3),
            ("alpha2", self.alpha2),
            ("b4", self.b4),
            ("c4", self.c4),
        ] {
            if !v.is_finite() {
                return Err(ModelError::InvalidParam {
                    field: name,
                    reason: format!("must be finite, got {v}"),
                });
            }
        }
        if !(self.lfp0.is_finite() && self.lfp0 > 0.0 && self.lfp0 < 1.0) {
            return Err(invalid(
                "lfp0",
                format!("must lie in (0, 1), got {}", self.lfp0),
            ));
        }
        Ok(())
    }
}

/// Population recursion output plus the years, if any, where the recursion
/// factor `2*dev + 1` was non-positive. The formula is honored as written
/// (the proxy changes sign rather than being clamped), and the years are
/// reported so callers can surface a warning.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationPath {
    pub series: AnnualSeries,
    pub sign_flip_years: Vec<i32>,
}

/// Simulated LFP path plus the years where it left the open interval
/// (0, 1). The simulation continues through such excursions; the model
/// imposes no bound.
#[derive(Debug, Clone, PartialEq)]
pub struct LfpPath {
    pub series: AnnualSeries,
    pub out_of_range_years: Vec<i32>,
}

/// A predicted productivity-growth series together with any recursion
/// warnings collected on the way.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthPrediction {
    pub series: AnnualSeries,
    pub sign_flip_years: Vec<i32>,
}

/// Deviation of annual GDP growth from the trend increment `a2`.
///
/// `dev(t) = (G(t) - G(t-1))/G(t-1) - a2/G(t-1)`, starting one year after
/// the GDP series. Every GDP value must be strictly positive.
pub fn trend_deviation(gdppc: &AnnualSeries, a2: f64) -> Result<AnnualSeries, ModelError> {
    for (year, v) in gdppc.iter() {
        if v <= 0.0 {
            return Err(ModelError::NonPositiveGdp { year, value: v });
        }
    }
    if gdppc.len() < 2 {
        return Err(SeriesError::TooShort {
            len: gdppc.len(),
            min: 2,
        }
        .into());
    }
    let vals: Vec<f64> = gdppc
        .values()
        .windows(2)
        .map(|w| (w[1] - w[0]) / w[0] - a2 / w[0])
        .collect();
    Ok(AnnualSeries::new(gdppc.start_year() + 1, vals)?)
}

/// Evolve the formal population proxy from `base_year` to the end of the
/// GDP series: `N(base_year) = n0`, then `N(t) = N(t-1) * (2*dev(t) + 1)`.
///
/// No lag is applied here; the single lag `T` belongs to the linear map in
/// [`predict_productivity_growth`].
pub fn specific_age_population(
    gdppc: &AnnualSeries,
    params: &ProductivityModelParams,
) -> Result<PopulationPath, ModelError> {
    params.validate()?;
    if params.base_year < gdppc.start_year() || params.base_year > gdppc.end_year() {
        return Err(ModelError::BaseYearOutsideSeries {
            base_year: params.base_year,
            first: gdppc.start_year(),
            last: gdppc.end_year(),
        });
    }
    let mut values = Vec::with_capacity((gdppc.end_year() - params.base_year + 1) as usize);
    let mut sign_flips = Vec::new();
    values.push(params.n0);
    if params.base_year < gdppc.end_year() {
        let dev = trend_deviation(gdppc, params.a2)?;
        let mut n = params.n0;
        for t in (params.base_year + 1)..=gdppc.end_year() {
            let factor = 2.0 * dev.get(t).expect("dev covers base_year+1..=end") + 1.0;
            if factor <= 0.0 {
                sign_flips.push(t);
            }
            n *= factor;
            values.push(n);
        }
    }
    Ok(PopulationPath {
        series: AnnualSeries::new(params.base_year, values)?,
        sign_flip_years: sign_flips,
    })
}

/// Linear productivity map with lag: the proxy value at year `t` yields the
/// predicted growth rate `n(t)/b + c` at year `t + lag_t`.
///
/// Because the proxy runs to the last GDP year, the output extends `lag_t`
/// years beyond it; those trailing years are the forecast.
pub fn predict_productivity_growth(
    n: &AnnualSeries,
    params: &ProductivityModelParams,
) -> Result<AnnualSeries, ModelError> {
    params.validate()?;
    let vals: Vec<f64> = n.values().iter().map(|&v| v / params.b + params.c).collect();
    Ok(AnnualSeries::new(n.start_year(), vals)?.shift(params.lag_t as i32))
}

/// Full pipeline from GDP per capita to predicted productivity growth.
pub fn predict_growth(
    gdppc: &AnnualSeries,
    params: &ProductivityModelParams,
) -> Result<GrowthPrediction, ModelError> {
    let pop = specific_age_population(gdppc, params)?;
    let series = predict_productivity_growth(&pop.series, params)?;
    Ok(GrowthPrediction {
        series,
        sign_flip_years: pop.sign_flip_years,
    })
}

/// Integrate the LFP evolution equation forward with an annual step.
///
/// For each year `t >= t0` the forcing is the trend deviation (computed
/// with `a1`) at year `t - lag_t`; the relative step solves
///
/// ```text
/// r(t) = (dev(t - lag) * exp(-alpha1 * (LFP(t) - lfp0)/lfp0) - c1) / b1
/// LFP(t+1) = LFP(t) * (1 + r(t))
/// ```
///
/// using the prior year's LFP in the exponent (explicit scheme). The path
/// runs while forcing is available, i.e. through `gdp_end + lag_t + 1`.
pub fn simulate_lfp(gdppc: &AnnualSeries, params: &LfpParams) -> Result<LfpPath, ModelError> {
    params.validate()?;
    let dev = trend_deviation(gdppc, params.a1)?;
    let lag = params.lag_t as i32;
    if params.t0 - lag < dev.start_year() {
        return Err(ModelError::InsufficientGdpHistory {
            needed: params.t0 - lag - 1,
            t0: params.t0,
            lag: params.lag_t,
        });
    }
    let last_step = dev.end_year() + lag;
    let mut values = vec![params.lfp0];
    let mut out_of_range = Vec::new();
    let mut lfp = params.lfp0;
    for t in params.t0..=last_step {
        let g = dev.get(t - lag).expect("forcing available by construction");
        let r = (g * (-params.alpha1 * (lfp - params.lfp0) / params.lfp0).exp() - params.c1)
            / params.b1;
        lfp *= 1.0 + r;
        if lfp <= 0.0 || lfp >= 1.0 {
            out_of_range.push(t + 1);
        }
        values.push(lfp);
    }
    Ok(LfpPath {
        series: AnnualSeries::new(params.t0, values)?,
        out_of_range_years: out_of_range,
    })
}

/// Productivity growth expressed through the LFP path:
/// `(b2 * rlfp(t) + c2) * exp(alpha1 * (LFP(t) - lfp0)/lfp0)`.
///
/// This form is diagnostic, not recursive, so the exponent uses the
/// same-year LFP. The result starts one year after the LFP series.
pub fn productivity_from_lfp(
    lfp: &AnnualSeries,
    params: &LfpProductivityParams,
) -> Result<AnnualSeries, ModelError> {
    params.validate()?;
    let rlfp = lfp.growth_rate()?;
    let vals: Vec<f64> = rlfp
        .iter()
        .map(|(year, r)| {
            let level = lfp.get(year).expect("growth years lie inside the series");
            (params.b2 * r + params.c2)
                * (params.alpha1 * (level - params.lfp0) / params.lfp0).exp()
        })
        .collect();
    Ok(AnnualSeries::new(rlfp.start_year(), vals)?)
}

/// Specific-age count implied by the LFP path. The left-hand side evaluated
/// at year `t` equals `Ns` at year `t - lag_t`, so the output is shifted
/// back by the lag.
pub fn ns_from_lfp(lfp: &AnnualSeries, params: &NsLinkParams) -> Result<AnnualSeries, ModelError> {
    params.validate()?;
    let rlfp = lfp.growth_rate()?;
    let vals: Vec<f64> = rlfp
        .iter()
        .map(|(year, r)| {
            let level = lfp.get(year).expect("growth years lie inside the series");
            (params.b3 * r + params.c3)
                * (params.alpha2 * (level - params.lfp0) / params.lfp0).exp()
        })
        .collect();
    Ok(AnnualSeries::new(rlfp.start_year(), vals)?.shift(-params.lag_t))
}

/// Linear map from the specific-age count to productivity growth:
/// the value at year `t` is `b4 * ns(t - lag_t) + c4`.
pub fn productivity_from_ns(
    ns: &AnnualSeries,
    params: &NsLinkParams,
) -> Result<AnnualSeries, ModelError> {
    params.validate()?;
    let vals: Vec<f64> = ns
        .values()
        .iter()
        .map(|&v| params.b4 * v + params.c4)
        .collect();
    Ok(AnnualSeries::new(ns.start_year(), vals)?.shift(params.lag_t))
}
