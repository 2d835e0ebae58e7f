//! `prodcast` — fit, predict and evaluate annual labor-productivity growth
//! from real GDP per capita.
//!
//! Exit codes: 0 success, 1 input or parse problem, 2 infeasible or
//! degenerate computation (too little overlap, zero variance, no feasible
//! grid vertex). The split keeps batch runs across countries scriptable.

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use std::fmt::Display;
use std::path::PathBuf;
use std::process::ExitCode;

use prodcast::calibrate::{calibrate, CalibrationError};
use prodcast::diagnostics::{best_lag, lag_scan, ols_fit, DiagnosticsError};
use prodcast::io::{
    self, read_annual_csv, read_calibration_spec, read_country_config, IoError,
};
use prodcast::model::{predict_growth, simulate_lfp, ModelError};
use prodcast::series::{SeriesError, YearWindow};
use prodcast::synth::{generate, SynthError};

#[derive(Parser)]
#[command(name = "prodcast", version, about = "Labor-productivity growth modelling from real GDP per capita")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Calibrate country parameters against observed productivity growth.
    Fit {
        /// GDP per capita CSV (`year,value`).
        #[arg(long)]
        gdp: PathBuf,
        /// Observed productivity growth CSV (`year,value`).
        #[arg(long)]
        productivity: PathBuf,
        /// Calibration spec JSON (bounds, lag range, grid, fixed n0).
        #[arg(long)]
        spec: PathBuf,
        /// Output fit-result JSON.
        #[arg(long)]
        out: PathBuf,
        /// Clip the evaluation window to `first:last` (inclusive years).
        #[arg(long)]
        window: Option<String>,
    },
    /// Predict productivity growth from GDP using a country config; the
    /// output extends `lag_t` years past the last GDP observation.
    Predict {
        #[arg(long)]
        gdp: PathBuf,
        /// Country config JSON, or a fit-result JSON from `fit`.
        #[arg(long)]
        config: PathBuf,
        /// Output CSV (`year,predicted,forecast`).
        #[arg(long)]
        out: PathBuf,
    },
    /// Regress an observed series on a predicted one and report R².
    Evaluate {
        #[arg(long)]
        observed: PathBuf,
        #[arg(long)]
        predicted: PathBuf,
        /// Clip both series to `first:last` before regressing.
        #[arg(long)]
        window: Option<String>,
        /// Smooth the observed series with a centered moving average of
        /// this odd width first.
        #[arg(long)]
        smooth: Option<usize>,
        /// Scan lags `lo:hi` applied to the predicted series and report
        /// the R² table plus the best lag.
        #[arg(long, value_name = "LO:HI")]
        lag_scan: Option<String>,
    },
    /// Simulate the labor-force-participation path implied by GDP.
    Lfp {
        #[arg(long)]
        gdp: PathBuf,
        /// Country config JSON with an `lfp` section.
        #[arg(long)]
        config: PathBuf,
        /// Output CSV (`year,value`).
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a seeded synthetic GDP/productivity pair.
    Synth {
        /// Country config JSON providing the generating parameters and the
        /// optional `synth` block (start_gdp, gdp_shock).
        #[arg(long)]
        params: PathBuf,
        /// Number of GDP years to generate.
        #[arg(long)]
        years: usize,
        /// RNG seed; the same seed always produces identical files.
        #[arg(long)]
        seed: u64,
        /// Standard deviation of observation noise added to productivity.
        #[arg(long)]
        noise: f64,
        #[arg(long)]
        out_gdp: PathBuf,
        #[arg(long)]
        out_prod: PathBuf,
    },
}

enum CliError {
    Input(String),
    Infeasible(String),
}

fn input(e: impl Display) -> CliError {
    CliError::Input(e.to_string())
}

fn infeasible(e: impl Display) -> CliError {
    CliError::Infeasible(e.to_string())
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        input(e)
    }
}

impl From<SynthError> for CliError {
    fn from(e: SynthError) -> Self {
        input(e)
    }
}

impl From<SeriesError> for CliError {
    fn from(e: SeriesError) -> Self {
        match e {
            SeriesError::EvenWindow { .. } => input(e),
            _ => infeasible(e),
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::InvalidParam { .. } => input(e),
            ModelError::Series(s) => s.into(),
            _ => infeasible(e),
        }
    }
}

impl From<DiagnosticsError> for CliError {
    fn from(e: DiagnosticsError) -> Self {
        match e {
            DiagnosticsError::Series(s) => s.into(),
            _ => infeasible(e),
        }
    }
}

impl From<CalibrationError> for CliError {
    fn from(e: CalibrationError) -> Self {
        match e {
            CalibrationError::InvalidSpec { .. } | CalibrationError::StartOutOfBounds { .. } => {
                input(e)
            }
            CalibrationError::Model(m) => m.into(),
            CalibrationError::Series(s) => s.into(),
            _ => infeasible(e),
        }
    }
}

fn main() -> ExitCode {
    // Die quietly on a closed pipe (e.g. `prodcast fit ... | head`)
    // instead of panicking on EPIPE.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    ExitCode::SUCCESS
                }
                _ => {
                    eprint!("{e}");
                    ExitCode::from(1)
                }
            };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Input(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
        Err(CliError::Infeasible(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Fit {
            gdp,
            productivity,
            spec,
            out,
            window,
        } => cmd_fit(gdp, productivity, spec, out, window),
        Command::Predict { gdp, config, out } => cmd_predict(gdp, config, out),
        Command::Evaluate {
            observed,
            predicted,
            window,
            smooth,
            lag_scan,
        } => cmd_evaluate(observed, predicted, window, smooth, lag_scan),
        Command::Lfp { gdp, config, out } => cmd_lfp(gdp, config, out),
        Command::Synth {
            params,
            years,
            seed,
            noise,
            out_gdp,
            out_prod,
        } => cmd_synth(params, years, seed, noise, out_gdp, out_prod),
    }
}

fn parse_year_pair(text: &str, flag: &str) -> Result<(i32, i32), CliError> {
    let (lo, hi) = text
        .split_once(':')
        .ok_or_else(|| input(format!("--{flag} expects `first:last`, got `{text}`")))?;
    let parse = |s: &str| {
        s.trim()
            .parse::<i32>()
            .map_err(|_| input(format!("--{flag}: `{s}` is not a year")))
    };
    Ok((parse(lo)?, parse(hi)?))
}

fn cmd_fit(
    gdp: PathBuf,
    productivity: PathBuf,
    spec_path: PathBuf,
    out: PathBuf,
    window: Option<String>,
) -> Result<(), CliError> {
    let gdppc = read_annual_csv(&gdp)?;
    let observed = read_annual_csv(&productivity)?;
    let mut spec = read_calibration_spec(&spec_path)?;
    if let Some(text) = window {
        let (first, last) = parse_year_pair(&text, "window")?;
        spec.window = Some(YearWindow::new(Some(first), Some(last)));
    }
    let fit = calibrate(&spec, &gdppc, &observed)?;
    io::write_fit_result(&fit, "calibrated", &spec, &out)?;

    println!("lag: {}", fit.params.lag_t);
    println!("a2: {}", fit.params.a2);
    println!("b: {} (n0 = {} fixed)", fit.params.b, fit.params.n0);
    println!("c: {}", fit.params.c);
    println!("objective (SSE): {:e}", fit.objective);
    println!("R²: {:.6}", fit.r_squared);
    println!(
        "window: {}..={} ({} points)",
        fit.window.0,
        fit.window.1,
        fit.residuals.len()
    );
    println!("evaluations: {}", fit.evaluations);
    println!("wrote {}", out.display());
    Ok(())
}

fn cmd_predict(gdp: PathBuf, config_path: PathBuf, out: PathBuf) -> Result<(), CliError> {
    let gdppc = read_annual_csv(&gdp)?;
    let config = read_country_config(&config_path)?;
    let prediction = predict_growth(&gdppc, &config.params)?;
    for year in &prediction.sign_flip_years {
        eprintln!("warning: recursion factor not positive in {year}; population proxy changed sign");
    }
    io::write_forecast_csv(&prediction.series, gdppc.end_year(), &out)?;
    let forecast_rows = prediction
        .series
        .years()
        .filter(|&y| y > gdppc.end_year())
        .count();
    println!(
        "predicted {}..={} ({} forecast rows) for {}",
        prediction.series.start_year(),
        prediction.series.end_year(),
        forecast_rows,
        config.country
    );
    println!("wrote {}", out.display());
    Ok(())
}

fn cmd_evaluate(
    observed_path: PathBuf,
    predicted_path: PathBuf,
    window: Option<String>,
    smooth: Option<usize>,
    lag_scan_range: Option<String>,
) -> Result<(), CliError> {
    let mut observed = read_annual_csv(&observed_path)?;
    let mut predicted = read_annual_csv(&predicted_path)?;
    if let Some(k) = smooth {
        observed = observed.moving_average(k)?;
    }
    if let Some(text) = window {
        let (first, last) = parse_year_pair(&text, "window")?;
        let w = YearWindow::new(Some(first), Some(last));
        observed = observed.clip(w)?;
        predicted = predicted.clip(w)?;
    }
    if let Some(text) = lag_scan_range {
        let (lo, hi) = parse_year_pair(&text, "lag-scan")?;
        println!("lag  R²");
        for (lag, r2) in lag_scan(&observed, &predicted, lo, hi) {
            match r2 {
                Some(r2) => println!("{lag:<4} {r2:.6}"),
                None => println!("{lag:<4} -"),
            }
        }
        let (lag, r2) = best_lag(&observed, &predicted, lo, hi)?;
        println!("best lag: {lag} (R² = {r2:.6})");
    } else {
        let report = ols_fit(&predicted, &observed)?;
        println!("n: {}", report.n_points);
        println!("window: {}..={}", report.window.0, report.window.1);
        println!("slope: {:.6}", report.slope);
        println!("intercept: {:.6}", report.intercept);
        println!("R²: {:.6}", report.r_squared);
    }
    Ok(())
}

fn cmd_lfp(gdp: PathBuf, config_path: PathBuf, out: PathBuf) -> Result<(), CliError> {
    let gdppc = read_annual_csv(&gdp)?;
    let config = read_country_config(&config_path)?;
    let params = config
        .lfp
        .ok_or_else(|| input(format!("{}: no `lfp` section", config_path.display())))?;
    let path = simulate_lfp(&gdppc, &params)?;
    for year in &path.out_of_range_years {
        eprintln!("warning: LFP left (0, 1) in {year}; simulation continued");
    }
    io::write_annual_csv(&path.series, &out)?;
    println!(
        "simulated LFP {}..={} for {}",
        path.series.start_year(),
        path.series.end_year(),
        config.country
    );
    println!("wrote {}", out.display());
    Ok(())
}

fn cmd_synth(
    params_path: PathBuf,
    years: usize,
    seed: u64,
    noise: f64,
    out_gdp: PathBuf,
    out_prod: PathBuf,
) -> Result<(), CliError> {
    let config = read_country_config(&params_path)?;
    let data = generate(&config.params, &config.synth, years, seed, noise)?;
    io::write_annual_csv(&data.gdp, &out_gdp)?;
    io::write_annual_csv(&data.productivity, &out_prod)?;
    println!(
        "gdp: {} years from {} -> {}",
        data.gdp.len(),
        data.gdp.start_year(),
        out_gdp.display()
    );
    println!(
        "productivity: {} years from {} -> {}",
        data.productivity.len(),
        data.productivity.start_year(),
        out_prod.display()
    );
    Ok(())
}
