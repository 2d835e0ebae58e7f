//! Seeded synthetic data for round-trip testing.
//!
//! The GDP path grows by the trend increment plus a relative shock each
//! year, `G(t+1) = G(t) + a2 + eps * G(t)`, and the productivity series is
//! the exact model prediction from that path, optionally with observation
//! noise. Everything is driven by one seed, so the same seed always yields
//! byte-identical output files.

use crate::model::{predict_growth, ModelError, ProductivityModelParams};
use crate::series::AnnualSeries;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("synthetic GDP needs at least 2 years, got {0}")]
    TooFewYears(usize),
    #[error("invalid {field}: {reason}")]
    Invalid { field: &'static str, reason: String },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Shape of the synthetic GDP path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthOptions {
    /// GDP per capita at the base year.
    #[serde(default = "default_start_gdp")]
    pub start_gdp: f64,
    /// Standard deviation of the relative annual GDP shock; zero gives the
    /// trend-exact path.
    #[serde(default = "default_gdp_shock")]
    pub gdp_shock: f64,
}

fn default_start_gdp() -> f64 {
    2000.0
}

fn default_gdp_shock() -> f64 {
    0.02
}

impl Default for SynthOptions {
    fn default() -> Self {
        Self {
            start_gdp: default_start_gdp(),
            gdp_shock: default_gdp_shock(),
        }
    }
}

/// A generated GDP series and the matching observed productivity series.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthData {
    pub gdp: AnnualSeries,
    pub productivity: AnnualSeries,
}

/// Generate `years` of GDP starting at the parameter set's base year, and
/// the model productivity derived from it plus observation noise of
/// standard deviation `noise`.
pub fn generate(
    params: &ProductivityModelParams,
    options: &SynthOptions,
    years: usize,
    seed: u64,
    noise: f64,
) -> Result<SynthData, SynthError> {
    params.validate()?;
    if years < 2 {
        return Err(SynthError::TooFewYears(years));
    }
    if !(options.start_gdp.is_finite() && options.start_gdp > 0.0) {
        return Err(SynthError::Invalid {
            field: "start_gdp",
            reason: format!("must be positive, got {}", options.start_gdp),
        });
    }
    for (field, v) in [("gdp_shock", options.gdp_shock), ("noise", noise)] {
        if !(v.is_finite() && v >= 0.0) {
            return Err(SynthError::Invalid {
                field,
                reason: format!("must be non-negative, got {v}"),
            });
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shock = Normal::new(0.0, options.gdp_shock).expect("validated above");
    let mut g = Vec::with_capacity(years);
    g.push(options.start_gdp);
    for _ in 1..years {
        let prev = *g.last().unwrap();
        let eps: f64 = shock.sample(&mut rng);
        g.push(prev + params.a2 + eps * prev);
    }
    let gdp = AnnualSeries::new(params.base_year, g).map_err(ModelError::from)?;

    let clean = predict_growth(&gdp, params)?.series;
    let productivity = if noise > 0.0 {
        let obs_noise = Normal::new(0.0, noise).expect("validated above");
        let noisy: Vec<f64> = clean
            .values()
            .iter()
            .map(|&v| v + obs_noise.sample(&mut rng))
            .collect();
        AnnualSeries::new(clean.start_year(), noisy).map_err(ModelError::from)?
    } else {
        clean
    };
    Ok(SynthData { gdp, productivity })
}
