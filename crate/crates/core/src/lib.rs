//! Annual labor-productivity growth modelling and forecasting.
//!
//! `prodcast` models the growth rate of labor productivity in a country as a
//! nonlinear function of real GDP per capita. The driving force is the
//! deviation of annual GDP growth from a country-specific trend increment; a
//! formal population proxy integrates that deviation through a one-year
//! recursion, and a linear map with an integer lag turns the proxy into a
//! predicted productivity growth rate. Because the productivity response
//! trails the GDP signal by the lag, the model predicts productivity a few
//! years past the last GDP observation.
//!
//! The crate is organised around a small set of modules:
//!
//! * [`series`] — the year-indexed series container and its transforms
//!   (growth rates, centered moving averages, lag shifts, alignment).
//! * [`model`] — the trend-deviation recursion, the productivity map, and
//!   the labor-force-participation forms of the same driving force.
//! * [`diagnostics`] — ordinary least squares fits and lag scans for
//!   comparing observed against predicted series.
//! * [`calibrate`] — grid search plus derivative-free refinement of the
//!   country parameters against observed data.
//! * [`io`] — CSV series ingestion, JSON country configs, and result
//!   serialization.
//! * [`synth`] — seeded synthetic data generation for round-trip testing.
//!
//! A narrative guide with worked examples lives in the `book/` directory of
//! the repository; every code snippet in it compiles and runs as a doctest.

pub mod calibrate;
pub mod diagnostics;
pub mod io;
pub mod model;
pub mod series;
pub mod synth;

pub use calibrate::{CalibrationSpec, FitResult};
pub use diagnostics::RegressionReport;
pub use model::{LfpParams, LfpProductivityParams, NsLinkParams, ProductivityModelParams};
pub use series::{AnnualSeries, SmoothingMode, YearWindow};
