//! File formats: annual-series CSV, country config JSON, calibration spec
//! JSON, fit result JSON, and plot-data CSV.
//!
//! Series CSV carries a `year,value` header; rows may arrive out of order
//! but must cover contiguous years once sorted — gaps and duplicates are
//! rejected with the offending row, never interpolated. Configs are strict
//! JSON: unknown keys are errors, and every parsed parameter set is
//! validated before use. Floats are written in shortest round-trip form,
//! so reading a file back reproduces the exact values written.

use crate::calibrate::{CalibrationError, CalibrationSpec, FitResult};
use crate::model::{LfpParams, ModelError, NsLinkParams, ProductivityModelParams};
use crate::series::{AnnualSeries, SeriesError, SmoothingMode, YearWindow};
use crate::synth::SynthOptions;
use serde::{Deserialize, Serialize};
use std::fs;

use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: row {row}: {message}")]
    Row {
        path: String,
        row: usize,
        message: String,
    },
    #[error("{path}: expected header `year,value`, found `{found}`")]
    BadHeader { path: String, found: String },
    #[error("{path}: duplicate year {year} at row {row}")]
    DuplicateYear {
        path: String,
        year: i32,
        row: usize,
    },
    #[error("{path}: gap in years: {missing} is missing")]
    YearGap { path: String, missing: i32 },
    #[error("{path}: no data rows")]
    NoRows { path: String },
    #[error("{path}: {key}: {message}")]
    Key {
        path: String,
        key: String,
        message: String,
    },
    #[error(transparent)]
    Series(#[from] SeriesError),
}

fn io_err(path: &Path, source: std::io::Error) -> IoError {
    IoError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn key_err(path: &Path, key: impl Into<String>, message: impl Into<String>) -> IoError {
    IoError::Key {
        path: path.display().to_string(),
        key: key.into(),
        message: message.into(),
    }
}

// ---------------------------------------------------------------------------
// Series CSV

/// Read a `year,value` CSV into a series.
///
/// Rows are sorted by year before validation; duplicates and gaps are
/// reported with row numbers (the header is row 1).
pub fn read_annual_csv(path: impl AsRef<Path>) -> Result<AnnualSeries, IoError> {
    let path = path.as_ref();
    let display = path.display().to_string();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => {
                if let csv::ErrorKind::Io(io) = e.into_kind() {
                    io_err(path, io)
                } else {
                    unreachable!()
                }
            }
            _ => IoError::Row {
                path: display.clone(),
                row: 1,
                message: e.to_string(),
            },
        })?;

    let headers = reader.headers().map_err(|e| IoError::Row {
        path: display.clone(),
        row: 1,
        message: e.to_string(),
    })?;
    let fields: Vec<String> = headers
        .iter()
        .map(|h| h.trim().trim_start_matches('\u{feff}').to_string())
        .collect();
    if fields != ["year", "value"] {
        return Err(IoError::BadHeader {
            path: display,
            found: fields.join(","),
        });
    }

    let mut rows: Vec<(i32, f64, usize)> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 2;
        let record = record.map_err(|e| IoError::Row {
            path: display.clone(),
            row,
            message: e.to_string(),
        })?;
        if record.len() != 2 {
            return Err(IoError::Row {
                path: display.clone(),
                row,
                message: format!("expected 2 fields, found {}", record.len()),
            });
        }
        let year: i32 = record[0].trim().parse().map_err(|_| IoError::Row {
            path: display.clone(),
            row,
            message: format!("`{}` is not a year", &record[0]),
        })?;
        let value: f64 = record[1].trim().parse().map_err(|_| IoError::Row {
            path: display.clone(),
            row,
            message: format!("`{}` is not a number", &record[1]),
        })?;
        if !value.is_finite() {
            return Err(IoError::Row {
                path: display.clone(),
                row,
                message: format!("`{}` is not finite", &record[1]),
            });
        }
        rows.push((year, value, row));
    }
    if rows.is_empty() {
        return Err(IoError::NoRows { path: display });
    }

    rows.sort_by_key(|&(year, _, row)| (year, row));
    for pair in rows.windows(2) {
        let (prev_year, _, _) = pair[0];
        let (year, _, row) = pair[1];
        if year == prev_year {
            return Err(IoError::DuplicateYear {
                path: display,
                year,
                row,
            });
        }
        if year != prev_year + 1 {
            return Err(IoError::YearGap {
                path: display,
                missing: prev_year + 1,
            });
        }
    }

    let start_year = rows[0].0;
    let values = rows.into_iter().map(|(_, v, _)| v).collect();
    Ok(AnnualSeries::new(start_year, values)?)
}

/// Write a series as `year,value` CSV with LF line endings.
pub fn write_annual_csv(series: &AnnualSeries, path: impl AsRef<Path>) -> Result<(), IoError> {
    let path = path.as_ref();
    let mut out = String::from("year,value\n");
    for (year, value) in series.iter() {
        out.push_str(&format!("{year},{value}\n"));
    }
    fs::write(path, out).map_err(|e| io_err(path, e))
}

/// Write `year,observed,predicted` over the union of years; a year missing
/// from one series leaves that cell empty.
pub fn write_plot_data(
    observed: &AnnualSeries,
    predicted: &AnnualSeries,
    path: impl AsRef<Path>,
) -> Result<(), IoError> {
    let path = path.as_ref();
    let first = observed.start_year().min(predicted.start_year());
    let last = observed.end_year().max(predicted.end_year());
    let mut out = String::from("year,observed,predicted\n");
    for year in first..=last {
        let o = observed.get(year);
        let p = predicted.get(year);
        if o.is_none() && p.is_none() {
            continue;
        }
        let cell = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        out.push_str(&format!("{year},{},{}\n", cell(o), cell(p)));
    }
    fs::write(path, out).map_err(|e| io_err(path, e))
}

/// Write a prediction as `year,predicted,forecast`; rows past
/// `last_observed_year` carry `forecast=true`.
pub fn write_forecast_csv(
    predicted: &AnnualSeries,
    last_observed_year: i32,
    path: impl AsRef<Path>,
) -> Result<(), IoError> {
    let path = path.as_ref();
    let mut out = String::from("year,predicted,forecast\n");
    for (year, value) in predicted.iter() {
        out.push_str(&format!("{year},{value},{}\n", year > last_observed_year));
    }
    fs::write(path, out).map_err(|e| io_err(path, e))
}

// ---------------------------------------------------------------------------
// Country configs

/// Optional pointers to the data files a config was built against.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataPaths {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gdp: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub productivity: Option<String>,
}

/// A country's parameter set plus optional sub-configurations.
#[derive(Debug, Clone, PartialEq)]
pub struct CountryConfig {
    pub country: String,
    pub params: ProductivityModelParams,
    pub smoothing_mode: SmoothingMode,
    pub lfp: Option<LfpParams>,
    pub ns: Option<NsLinkParams>,
    pub window: Option<YearWindow>,
    pub synth: SynthOptions,
    pub data: Option<DataPaths>,
}

/// The flat on-disk shape of a country config.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    country: String,
    a2: f64,
    n0: f64,
    base_year: i32,
    b: f64,
    c: f64,
    lag_t: u32,
    smoothing_window: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    smoothing_mode: Option<SmoothingMode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lfp: Option<LfpParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ns: Option<NsLinkParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    window: Option<YearWindow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    synth: Option<SynthOptions>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    data: Option<DataPaths>,
}

impl From<&CountryConfig> for RawConfig {
    fn from(config: &CountryConfig) -> Self {
        RawConfig {
            country: config.country.clone(),
            a2: config.params.a2,
            n0: config.params.n0,
            base_year: config.params.base_year,
            b: config.params.b,
            c: config.params.c,
            lag_t: config.params.lag_t,
            smoothing_window: config.params.smoothing_window,
            smoothing_mode: Some(config.smoothing_mode),
            lfp: config.lfp.clone(),
            ns: config.ns.clone(),
            window: config.window,
            synth: Some(config.synth),
            data: config.data.clone(),
        }
    }
}

impl RawConfig {
    fn into_config(self, path: &Path) -> Result<CountryConfig, IoError> {
        let params = ProductivityModelParams {
            a2: self.a2,
            n0: self.n0,
            base_year: self.base_year,
            b: self.b,
            c: self.c,
            lag_t: self.lag_t,
            smoothing_window: self.smoothing_window,
        };
        params
            .validate()
            .map_err(|e| model_key_err(path, "", e))?;
        if let Some(lfp) = &self.lfp {
            lfp.validate().map_err(|e| model_key_err(path, "lfp.", e))?;
        }
        if let Some(ns) = &self.ns {
            ns.validate().map_err(|e| model_key_err(path, "ns.", e))?;
        }
        if let (Some(first), Some(last)) = (
            self.window.and_then(|w| w.first),
            self.window.and_then(|w| w.last),
        ) {
            if first > last {
                return Err(key_err(
                    path,
                    "window",
                    format!("first {first} is after last {last}"),
                ));
            }
        }
        Ok(CountryConfig {
            country: self.country,
            params,
            smoothing_mode: self.smoothing_mode.unwrap_or_default(),
            lfp: self.lfp,
            ns: self.ns,
            window: self.window,
            synth: self.synth.unwrap_or_default(),
            data: self.data,
        })
    }
}

fn model_key_err(path: &Path, prefix: &str, e: ModelError) -> IoError {
    match e {
        ModelError::InvalidParam { field, reason } => {
            key_err(path, format!("{prefix}{field}"), reason)
        }
        other => key_err(path, prefix.trim_end_matches('.'), other.to_string()),
    }
}

fn parse_json<T: serde::de::DeserializeOwned>(path: &Path, text: &str) -> Result<T, IoError> {
    let mut de = serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let key = e.path().to_string();
        key_err(
            path,
            if key == "." { String::new() } else { key },
            e.inner().to_string(),
        )
    })
}

/// Read a country config. A fit-result file (recognized by its top-level
/// `config` key) is accepted too, so a calibration output can drive
/// prediction directly.
pub fn read_country_config(path: impl AsRef<Path>) -> Result<CountryConfig, IoError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| key_err(path, String::new(), e.to_string()))?;
    let raw: RawConfig = if value.get("config").is_some() {
        parse_json::<FitResultFile>(path, &text)?.config
    } else {
        parse_json(path, &text)?
    };
    raw.into_config(path)
}

/// Write a country config as flat JSON.
pub fn write_country_config(
    config: &CountryConfig,
    path: impl AsRef<Path>,
) -> Result<(), IoError> {
    let path = path.as_ref();
    let raw = RawConfig::from(config);
    let text = serde_json::to_string_pretty(&raw).expect("config serialization cannot fail");
    fs::write(path, text + "\n").map_err(|e| io_err(path, e))
}

// ---------------------------------------------------------------------------
// Calibration specs and fit results

/// Read and validate a calibration spec.
pub fn read_calibration_spec(path: impl AsRef<Path>) -> Result<CalibrationSpec, IoError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let spec: CalibrationSpec = parse_json(path, &text)?;
    spec.validate().map_err(|e| match e {
        CalibrationError::InvalidSpec { field, reason } => key_err(path, field, reason),
        other => key_err(path, String::new(), other.to_string()),
    })?;
    Ok(spec)
}

/// On-disk shape of a calibration result: the fitted parameters as a
/// ready-to-use country config plus the fit statistics.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FitResultFile {
    config: RawConfig,
    objective: f64,
    r_squared: f64,
    window: YearWindow,
    evaluations: u64,
    residuals: AnnualSeries,
}

/// Write a fit result. The embedded config carries the fitted parameters,
/// the spec's smoothing mode and the window the fit was evaluated on.
pub fn write_fit_result(
    fit: &FitResult,
    country: &str,
    spec: &CalibrationSpec,
    path: impl AsRef<Path>,
) -> Result<(), IoError> {
    let path = path.as_ref();
    let config = CountryConfig {
        country: country.to_string(),
        params: fit.params.clone(),
        smoothing_mode: spec.smoothing_mode,
        lfp: None,
        ns: None,
        window: Some(YearWindow::new(Some(fit.window.0), Some(fit.window.1))),
        synth: SynthOptions::default(),
        data: None,
    };
    let file = FitResultFile {
        config: RawConfig::from(&config),
        objective: fit.objective,
        r_squared: fit.r_squared,
        window: YearWindow::new(Some(fit.window.0), Some(fit.window.1)),
        evaluations: fit.evaluations,
        residuals: fit.residuals.clone(),
    };
    let text = serde_json::to_string_pretty(&file).expect("fit serialization cannot fail");
    fs::write(path, text + "\n").map_err(|e| io_err(path, e))
}

/// Read back a fit result written by [`write_fit_result`].
pub fn read_fit_result(path: impl AsRef<Path>) -> Result<(CountryConfig, FitResult), IoError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let file: FitResultFile = parse_json(path, &text)?;
    let config = file.config.into_config(path)?;
    let window = (
        file.window.first.unwrap_or(config.params.base_year),
        file.window.last.unwrap_or(config.params.base_year),
    );
    let fit = FitResult {
        params: config.params.clone(),
        objective: file.objective,
        r_squared: file.r_squared,
        window,
        residuals: file.residuals,
        evaluations: file.evaluations,
    };
    Ok((config, fit))
}
