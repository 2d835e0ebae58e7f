//! Black-box tests of the `prodcast` binary: flags, exit codes, file
//! formats and cross-command consistency.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use tempfile::{tempdir, TempDir};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_prodcast"))
}

fn repo_path(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

fn synth_pair(dir: &TempDir, seed: u64, noise: &str) -> (PathBuf, PathBuf) {
    let gdp = dir.path().join(format!("gdp_{seed}_{noise}.csv"));
    let prod = dir.path().join(format!("prod_{seed}_{noise}.csv"));
    let out = run(&[
        "synth",
        "--params",
        repo_path("fixtures/synth_params.json").to_str().unwrap(),
        "--years",
        "60",
        "--seed",
        &seed.to_string(),
        "--noise",
        noise,
        "--out-gdp",
        gdp.to_str().unwrap(),
        "--out-prod",
        prod.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "synth failed: {}", stderr(&out));
    (gdp, prod)
}

#[test]
fn missing_required_flag_exits_1_with_usage() {
    let out = run(&["fit", "--gdp", "nope.csv"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("--productivity"));
}

#[test]
fn unreadable_file_exits_1() {
    let dir = tempdir().unwrap();
    let out = run(&[
        "predict",
        "--gdp",
        "/definitely/not/here.csv",
        "--config",
        repo_path("configs/turkey.json").to_str().unwrap(),
        "--out",
        dir.path().join("p.csv").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn malformed_csv_exits_1_with_row_number() {
    let dir = tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "year,value\n2000,100\n2001,oops\n").unwrap();
    let out = run(&[
        "predict",
        "--gdp",
        bad.to_str().unwrap(),
        "--config",
        repo_path("configs/turkey.json").to_str().unwrap(),
        "--out",
        dir.path().join("p.csv").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("row 3"), "stderr: {}", stderr(&out));
}

#[test]
fn evaluate_identical_series_reports_r2_one() {
    let dir = tempdir().unwrap();
    let (_, prod) = synth_pair(&dir, 7, "0");
    let out = run(&[
        "evaluate",
        "--observed",
        prod.to_str().unwrap(),
        "--predicted",
        prod.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("R²: 1.000000"), "{}", stdout(&out));
}

#[test]
fn evaluate_constant_prediction_exits_2() {
    let dir = tempdir().unwrap();
    let (_, prod) = synth_pair(&dir, 8, "0");
    let flat = dir.path().join("flat.csv");
    fs::write(&flat, "year,value\n1961,5\n1962,5\n1963,5\n1964,5\n").unwrap();
    let out = run(&[
        "evaluate",
        "--observed",
        prod.to_str().unwrap(),
        "--predicted",
        flat.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("zero variance"));
}

#[test]
fn evaluate_rejects_even_smoothing_window() {
    let dir = tempdir().unwrap();
    let (_, prod) = synth_pair(&dir, 9, "0");
    let out = run(&[
        "evaluate",
        "--observed",
        prod.to_str().unwrap(),
        "--predicted",
        prod.to_str().unwrap(),
        "--smooth",
        "4",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn evaluate_lag_scan_recovers_a_constructed_shift() {
    let dir = tempdir().unwrap();
    let (_, prod) = synth_pair(&dir, 10, "0");
    // Shift the series back 3 years to play the unlagged prediction.
    let text = fs::read_to_string(&prod).unwrap();
    let shifted: String = std::iter::once("year,value".to_string())
        .chain(text.lines().skip(1).map(|line| {
            let (year, value) = line.split_once(',').unwrap();
            format!("{},{}", year.parse::<i32>().unwrap() - 3, value)
        }))
        .collect::<Vec<_>>()
        .join("\n");
    let predicted = dir.path().join("shifted.csv");
    fs::write(&predicted, shifted + "\n").unwrap();
    let out = run(&[
        "evaluate",
        "--observed",
        prod.to_str().unwrap(),
        "--predicted",
        predicted.to_str().unwrap(),
        "--lag-scan",
        "0:8",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(
        stdout(&out).contains("best lag: 3 (R² = 1.000000)"),
        "{}",
        stdout(&out)
    );
}

#[test]
fn synth_is_deterministic_per_seed() {
    let dir = tempdir().unwrap();
    let (g1, p1) = synth_pair(&dir, 42, "0.005");
    let dir2 = tempdir().unwrap();
    let (g2, p2) = synth_pair(&dir2, 42, "0.005");
    assert_eq!(fs::read(&g1).unwrap(), fs::read(&g2).unwrap());
    assert_eq!(fs::read(&p1).unwrap(), fs::read(&p2).unwrap());
    let dir3 = tempdir().unwrap();
    let (g3, _) = synth_pair(&dir3, 43, "0.005");
    assert_ne!(fs::read(&g1).unwrap(), fs::read(&g3).unwrap());
}

#[test]
fn shipped_synthetic_fixture_matches_its_seed() {
    // The committed fixture files were produced by `synth --seed 42`; the
    // generator must still reproduce them byte for byte.
    let dir = tempdir().unwrap();
    let (gdp, prod) = synth_pair(&dir, 42, "0");
    assert_eq!(
        fs::read(&gdp).unwrap(),
        fs::read(repo_path("fixtures/synthetic_gdp.csv")).unwrap()
    );
    assert_eq!(
        fs::read(&prod).unwrap(),
        fs::read(repo_path("fixtures/synthetic_productivity.csv")).unwrap()
    );
}

fn read_csv_column(path: &Path, column: usize) -> Vec<(i32, String)> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|line| {
            let cells: Vec<&str> = line.split(',').collect();
            (cells[0].parse().unwrap(), cells[column].to_string())
        })
        .collect()
}

#[test]
fn fit_then_predict_reproduces_the_fit_time_prediction() {
    let dir = tempdir().unwrap();
    let (gdp, prod) = synth_pair(&dir, 42, "0");
    let fit_json = dir.path().join("fit.json");
    let out = run(&[
        "fit",
        "--gdp",
        gdp.to_str().unwrap(),
        "--productivity",
        prod.to_str().unwrap(),
        "--spec",
        repo_path("fixtures/calibration_spec.json").to_str().unwrap(),
        "--out",
        fit_json.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).contains("lag: 2"), "{}", stdout(&out));

    let pred_csv = dir.path().join("pred.csv");
    let out = run(&[
        "predict",
        "--gdp",
        gdp.to_str().unwrap(),
        "--config",
        fit_json.to_str().unwrap(),
        "--out",
        pred_csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));

    // The CLI prediction must equal the library prediction from the fitted
    // parameters bit for bit over the fit window.
    let (config, fit) = prodcast::io::read_fit_result(&fit_json).unwrap();
    let gdppc = prodcast::io::read_annual_csv(&gdp).unwrap();
    let expected = prodcast::model::predict_growth(&gdppc, &config.params)
        .unwrap()
        .series;
    let rows = read_csv_column(&pred_csv, 1);
    assert_eq!(rows.len(), expected.len());
    for (year, cell) in rows {
        let got: f64 = cell.parse().unwrap();
        let want = expected.get(year).unwrap();
        assert_eq!(got.to_bits(), want.to_bits(), "year {year}");
    }
    assert!(fit.window.0 >= expected.start_year());
    assert!(fit.window.1 <= expected.end_year());
}

#[test]
fn predict_flags_the_lag_horizon_as_forecast() {
    // Trend-exact GDP through 2008 under the Turkey config (lag 2): the
    // prediction runs through 2010 and is the constant n0/b + c.
    let dir = tempdir().unwrap();
    let gdp_path = dir.path().join("gdp.csv");
    let mut lines = vec!["year,value".to_string()];
    let mut g: f64 = 2000.0;
    for year in 1959..=2008 {
        lines.push(format!("{year},{g}"));
        g += 105.0;
    }
    fs::write(&gdp_path, lines.join("\n") + "\n").unwrap();

    let pred_csv = dir.path().join("pred.csv");
    let out = run(&[
        "predict",
        "--gdp",
        gdp_path.to_str().unwrap(),
        "--config",
        repo_path("configs/turkey.json").to_str().unwrap(),
        "--out",
        pred_csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));

    let values = read_csv_column(&pred_csv, 1);
    let flags = read_csv_column(&pred_csv, 2);
    assert_eq!(values.first().unwrap().0, 1961);
    assert_eq!(values.last().unwrap().0, 2010);
    let constant = 1_450_000.0 / -6_000_000.0 + 0.24;
    for (year, cell) in &values {
        let v: f64 = cell.parse().unwrap();
        assert!((v - constant).abs() <= 1e-12, "year {year}: {v}");
    }
    for (year, flag) in flags {
        assert_eq!(flag == "true", year > 2008, "year {year}");
    }
}

#[test]
fn predict_with_zero_lag_has_no_forecast_rows() {
    let dir = tempdir().unwrap();
    let gdp_path = dir.path().join("gdp.csv");
    let mut lines = vec!["year,value".to_string()];
    let mut g: f64 = 3000.0;
    for year in 1959..=2000 {
        lines.push(format!("{year},{g}"));
        g += 180.0;
    }
    fs::write(&gdp_path, lines.join("\n") + "\n").unwrap();

    let pred_csv = dir.path().join("pred.csv");
    let out = run(&[
        "predict",
        "--gdp",
        gdp_path.to_str().unwrap(),
        "--config",
        repo_path("configs/spain.json").to_str().unwrap(),
        "--out",
        pred_csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let flags = read_csv_column(&pred_csv, 2);
    assert!(flags.iter().all(|(_, f)| f == "false"));
    assert_eq!(flags.last().unwrap().0, 2000);
}

#[test]
fn fit_with_too_narrow_a_window_exits_2() {
    let dir = tempdir().unwrap();
    let (gdp, prod) = synth_pair(&dir, 11, "0");
    let out = run(&[
        "fit",
        "--gdp",
        gdp.to_str().unwrap(),
        "--productivity",
        prod.to_str().unwrap(),
        "--spec",
        repo_path("fixtures/calibration_spec.json").to_str().unwrap(),
        "--out",
        dir.path().join("fit.json").to_str().unwrap(),
        "--window",
        "2015:2016",
    ]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
}

#[test]
fn lfp_simulation_needs_an_lfp_section() {
    let dir = tempdir().unwrap();
    let (gdp, _) = synth_pair(&dir, 12, "0");
    let out = run(&[
        "lfp",
        "--gdp",
        gdp.to_str().unwrap(),
        "--config",
        repo_path("configs/turkey.json").to_str().unwrap(),
        "--out",
        dir.path().join("lfp.csv").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("lfp"));
}

#[test]
fn lfp_simulation_writes_a_series() {
    let dir = tempdir().unwrap();
    let (gdp, _) = synth_pair(&dir, 13, "0");
    let config = dir.path().join("with_lfp.json");
    fs::write(
        &config,
        r#"{
            "country": "Synthland",
            "a2": 105.0, "n0": 1450000.0, "base_year": 1959,
            "b": -6000000.0, "c": 0.24, "lag_t": 2, "smoothing_window": 1,
            "lfp": {"b1": 2.0, "c1": 0.001, "alpha1": 1.0, "a1": 105.0,
                     "t0": 1965, "lfp0": 0.6, "lag_t": 2}
        }"#,
    )
    .unwrap();
    let lfp_csv = dir.path().join("lfp.csv");
    let out = run(&[
        "lfp",
        "--gdp",
        gdp.to_str().unwrap(),
        "--config",
        config.to_str().unwrap(),
        "--out",
        lfp_csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let series = prodcast::io::read_annual_csv(&lfp_csv).unwrap();
    assert_eq!(series.start_year(), 1965);
    assert_eq!(series.get(1965), Some(0.6));
    assert!(series.end_year() > 2018);
}
