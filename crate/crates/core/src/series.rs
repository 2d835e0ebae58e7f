//! Year-indexed time series.
//!
//! [`AnnualSeries`] stores one finite value per calendar year over a
//! contiguous range. Contiguity is structural: the container holds a start
//! year and a dense vector, so a gap cannot be represented at all. Inputs
//! with gaps are rejected at the ingestion boundary (see [`crate::io`])
//! rather than silently interpolated, because interpolation would corrupt
//! growth rates downstream.
//!
//! All transforms return new series; values are immutable after
//! construction, so series can be shared freely across threads.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SeriesError {
    #[error("series must contain at least one value")]
    Empty,
    #[error("non-finite value {value} at year {year}")]
    NonFinite { year: i32, value: f64 },
    #[error("series has {len} points but the operation needs at least {min}")]
    TooShort { len: usize, min: usize },
    #[error("zero value at year {year} would be used as a denominator")]
    ZeroDenominator { year: i32 },
    #[error("moving-average window must be odd, got {window}")]
    EvenWindow { window: usize },
    #[error("window {window} exceeds series length {len}")]
    WindowTooLong { window: usize, len: usize },
    #[error("year ranges {a_first}..={a_last} and {b_first}..={b_last} do not overlap")]
    EmptyOverlap {
        a_first: i32,
        a_last: i32,
        b_first: i32,
        b_last: i32,
    },
    #[error("clipping {first}..={last} to {lo:?}..{hi:?} leaves no years")]
    EmptyClip {
        first: i32,
        last: i32,
        lo: Option<i32>,
        hi: Option<i32>,
    },
}

/// How observed series are smoothed before comparison or fitting.
///
/// The default is a centered average with the ends trimmed, which keeps
/// peaks aligned in time and is what the lag diagnostics assume. The
/// trailing variant is exposed for sensitivity checks only; it delays an
/// affine signal by half the window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SmoothingMode {
    #[default]
    Centered,
    Trailing,
}

/// Optional inclusive calendar-year clip, open on either end.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct YearWindow {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub first: Option<i32>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub last: Option<i32>,
}

impl YearWindow {
    pub fn new(first: Option<i32>, last: Option<i32>) -> Self {
        Self { first, last }
    }
}

/// A contiguous run of annual values starting at `start_year`.
///
/// The value at index `i` belongs to calendar year `start_year + i`. A
/// series is never empty and never contains a NaN or infinity; both are
/// enforced at construction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnnualSeries {
    start_year: i32,
    values: Vec<f64>,
}

impl AnnualSeries {
    pub fn new(start_year: i32, values: Vec<f64>) -> Result<Self, SeriesError> {
        if values.is_empty() {
            return Err(SeriesError::Empty);
        }
        for (i, &v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(SeriesError::NonFinite {
                    year: start_year + i as i32,
                    value: v,
                });
            }
        }
        Ok(Self { start_year, values })
    }

    pub fn start_year(&self) -> i32 {
        self.start_year
    }

    pub fn end_year(&self) -> i32 {
        self.start_year + (self.values.len() - 1) as i32
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    /// Always false; kept for API symmetry with std collections.
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn years(&self) -> impl Iterator<Item = i32> + '_ {
        (0..self.values.len()).map(move |i| self.start_year + i as i32)
    }

    /// Iterate `(year, value)` pairs in year order.
    pub fn iter(&self) -> impl Iterator<Item = (i32, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(move |(i, &v)| (self.start_year + i as i32, v))
    }

    /// Value at a calendar year, or `None` outside the covered range.
    pub fn get(&self, year: i32) -> Option<f64> {
        if year < self.start_year || year > self.end_year() {
            return None;
        }
        Some(self.values[(year - self.start_year) as usize])
    }

    /// Year-over-year relative change, `(v(t) - v(t-1)) / v(t-1)`.
    ///
    /// The result starts one year after `self` and is one point shorter.
    /// Every value except the last acts as a denominator and must be
    /// non-zero.
    pub fn growth_rate(&self) -> Result<AnnualSeries, SeriesError> {
        if self.values.len() < 2 {
            return Err(SeriesError::TooShort {
                len: self.values.len(),
                min: 2,
            });
        }
        for (i, &v) in self.values[..self.values.len() - 1].iter().enumerate() {
            if v == 0.0 {
                return Err(SeriesError::ZeroDenominator {
                    year: self.start_year + i as i32,
                });
            }
        }
        let rates = self
            .values
            .windows(2)
            .map(|w| (w[1] - w[0]) / w[0])
            .collect();
        AnnualSeries::new(self.start_year + 1, rates)
    }

    /// Centered moving average with an odd window, trimmed to the interior.
    ///
    /// The result covers `start_year + h ..= end_year - h` with
    /// `h = (window - 1) / 2`; no padding or partial windows are used.
    /// Window 1 returns the series unchanged. Each window mean is computed
    /// relative to its first element, so a constant series comes back
    /// bit-identical.
    pub fn moving_average(&self, window: usize) -> Result<AnnualSeries, SeriesError> {
        if window.is_multiple_of(2) {
            return Err(SeriesError::EvenWindow { window });
        }
        if window > self.values.len() {
            return Err(SeriesError::WindowTooLong {
                window,
                len: self.values.len(),
            });
        }
        if window == 1 {
            return Ok(self.clone());
        }
        let half = (window - 1) / 2;
        let out = self
            .values
            .windows(window)
            .map(anchored_mean)
            .collect();
        AnnualSeries::new(self.start_year + half as i32, out)
    }

    /// Trailing moving average: the value at year `t` averages
    /// `t-window+1 ..= t`. Provided for sensitivity checks; the centered
    /// variant is the default everywhere.
    pub fn moving_average_trailing(&self, window: usize) -> Result<AnnualSeries, SeriesError> {
        if window.is_multiple_of(2) {
            return Err(SeriesError::EvenWindow { window });
        }
        if window > self.values.len() {
            return Err(SeriesError::WindowTooLong {
                window,
                len: self.values.len(),
            });
        }
        if window == 1 {
            return Ok(self.clone());
        }
        let out = self
            .values
            .windows(window)
            .map(anchored_mean)
            .collect();
        AnnualSeries::new(self.start_year + (window - 1) as i32, out)
    }

    /// Smooth with the given window under the chosen mode.
    pub fn smoothed(&self, window: usize, mode: SmoothingMode) -> Result<AnnualSeries, SeriesError> {
        match mode {
            SmoothingMode::Centered => self.moving_average(window),
            SmoothingMode::Trailing => self.moving_average_trailing(window),
        }
    }

    /// Relabel every year by `lag`: the value formerly at `t` is now at
    /// `t + lag`. Values are untouched; `lag` may be zero or negative.
    pub fn shift(&self, lag: i32) -> AnnualSeries {
        AnnualSeries {
            start_year: self.start_year + lag,
            values: self.values.clone(),
        }
    }

    /// Restrict to the inclusive window, leaving open ends untouched.
    pub fn clip(&self, window: YearWindow) -> Result<AnnualSeries, SeriesError> {
        let lo = window.first.unwrap_or(self.start_year).max(self.start_year);
        let hi = window.last.unwrap_or(self.end_year()).min(self.end_year());
        if lo > hi {
            return Err(SeriesError::EmptyClip {
                first: self.start_year,
                last: self.end_year(),
                lo: window.first,
                hi: window.last,
            });
        }
        let a = (lo - self.start_year) as usize;
        let b = (hi - self.start_year) as usize;
        AnnualSeries::new(lo, self.values[a..=b].to_vec())
    }
}

/// Mean of a window, computed as deviations from the first element.
///
/// Shifting by the anchor keeps the sum exactly zero for constant input,
/// so averaging a constant returns that constant bit-for-bit.
fn anchored_mean(w: &[f64]) -> f64 {
    let anchor = w[0];
    let sum: f64 = w.iter().map(|&v| v - anchor).sum();
    anchor + sum / w.len() as f64
}

/// Restrict both series to their common years.
///
/// Errors when the year ranges are disjoint. Aligning already-aligned
/// series returns them unchanged.
pub fn align(a: &AnnualSeries, b: &AnnualSeries) -> Result<(AnnualSeries, AnnualSeries), SeriesError> {
    let lo = a.start_year.max(b.start_year);
    let hi = a.end_year().min(b.end_year());
    if lo > hi {
        return Err(SeriesError::EmptyOverlap {
            a_first: a.start_year,
            a_last: a.end_year(),
            b_first: b.start_year,
            b_last: b.end_year(),
        });
    }
    let w = YearWindow::new(Some(lo), Some(hi));
    Ok((a.clip(w)?, b.clip(w)?))
}

impl<'de> Deserialize<'de> for AnnualSeries {
    fn deserialize<D>(deserializer: D) -> Result<Self, D::Error>
    where
        D: serde::Deserializer<'de>,
    {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Raw {
            start_year: i32,
            values: Vec<f64>,
        }
        let raw = Raw::deserialize(deserializer)?;
        AnnualSeries::new(raw.start_year, raw.values).map_err(serde::de::Error::custom)
    }
}
