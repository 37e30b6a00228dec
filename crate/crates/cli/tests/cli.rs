use std::path::Path;
use std::process::{Command, Output};

use wavereg::harness::FiveNumber;
use wavereg::io::read_records;

fn wavereg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wavereg"))
        .args(args)
        .output()
        .expect("spawn wavereg")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn help_lists_the_main_flags() {
    let out = wavereg(&["estimate", "--help"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for flag in [
        "--function",
        "--n",
        "--sigma2",
        "--seed",
        "--jstar",
        "--kappa",
        "--backend",
        "--threshold",
        "--plateau",
    ] {
        assert!(text.contains(flag), "missing {flag}");
    }
}

#[test]
fn invalid_sample_size_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = wavereg(&[
        "simulate",
        "--n",
        "1000",
        "--output",
        path(&dir.path().join("s.csv")),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("power of two"));
}

#[test]
fn unknown_function_is_a_validation_error() {
    let out = wavereg(&["simulate", "--function", "bumps"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_input_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("absent.csv");
    let out = wavereg(&[
        "estimate",
        "--input",
        path(&missing),
        "--out-dir",
        path(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("absent.csv"));
}

#[test]
fn rate_needs_three_sample_sizes() {
    let dir = tempfile::tempdir().unwrap();
    let out = wavereg(&[
        "rate",
        "--n-list",
        "512,1024",
        "--out-dir",
        path(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn simulate_then_estimate_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let sample = dir.path().join("sample.csv");
    assert!(wavereg(&[
        "simulate",
        "--n",
        "1024",
        "--seed",
        "9",
        "--output",
        path(&sample)
    ])
    .status
    .success());
    let out = wavereg(&[
        "estimate",
        "--input",
        path(&sample),
        "--out-dir",
        path(dir.path()),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let est = std::fs::read_to_string(dir.path().join("estimate.csv")).unwrap();
    let header = est.lines().find(|l| !l.starts_with('#')).unwrap();
    // No true r for a sample read from disk.
    assert_eq!(header, "x,r_hat_linear,r_hat_nonlinear");
    assert_eq!(est.lines().filter(|l| !l.starts_with('#')).count(), 1025);
    assert!(!dir.path().join("true_coefficients.csv").exists());
}

#[test]
fn linear_method_with_fixed_level_skips_selection() {
    let dir = tempfile::tempdir().unwrap();
    let out = wavereg(&[
        "estimate",
        "--n",
        "512",
        "--method",
        "linear",
        "--jstar",
        "4",
        "--out-dir",
        path(dir.path()),
    ]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("jstar=4"));
    assert!(!dir.path().join("jstar_scores.csv").exists());
    assert!(!dir.path().join("threshold_scores.csv").exists());
    assert!(dir.path().join("true_coefficients.csv").exists());
}

#[test]
fn config_file_values_are_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    std::fs::write(&cfg, "# run\nn = 2048\nfunction = ramp\nseed = 5\n").unwrap();
    let out_csv = dir.path().join("s.csv");
    let out = wavereg(&[
        "--config",
        path(&cfg),
        "simulate",
        "--seed",
        "6",
        "--output",
        path(&out_csv),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = std::fs::read_to_string(&out_csv).unwrap();
    assert!(text.contains("# n=2048"));
    assert!(text.contains("# function=ramp"));
    assert!(text.contains("# seed=6"));

    std::fs::write(&cfg, "n=2048\nwhatever=1\n").unwrap();
    let out = wavereg(&[
        "simulate",
        "--config",
        path(&cfg),
        "--output",
        path(&out_csv),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn summary_medians_match_the_records() {
    let dir = tempfile::tempdir().unwrap();
    let out = wavereg(&[
        "mc",
        "--n",
        "512",
        "--N",
        "12",
        "--seed",
        "2",
        "--out-dir",
        path(dir.path()),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let records =
        read_records(std::fs::File::open(dir.path().join("records.csv")).unwrap()).unwrap();
    assert_eq!(records.len(), 12);
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap())
            .unwrap();
    let entries = summary.as_array().unwrap();
    assert_eq!(entries.len(), 8);
    for e in entries {
        let method = e["method"].as_str().unwrap();
        let values: Vec<f64> = records
            .iter()
            .map(|r| r.metrics().iter().find(|(m, _)| *m == method).unwrap().1)
            .collect();
        let expected = FiveNumber::from_values(&values).unwrap();
        assert_eq!(e["median"].as_f64().unwrap(), expected.median, "{method}");
        assert_eq!(e["q1"].as_f64().unwrap(), expected.q1, "{method}");
    }
    let svg = std::fs::read_to_string(dir.path().join("boxplot.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
}

#[test]
fn printed_slope_matches_the_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = wavereg(&[
        "rate",
        "--n-list",
        "256,512,1024",
        "--N",
        "4",
        "--out-dir",
        path(dir.path()),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let stdout = String::from_utf8(out.stdout).unwrap();
    let printed = stdout
        .lines()
        .find_map(|l| l.strip_prefix("slope="))
        .unwrap();
    let csv = std::fs::read_to_string(dir.path().join("rate.csv")).unwrap();
    let row = csv.lines().filter(|l| !l.starts_with('#')).nth(1).unwrap();
    assert_eq!(row.rsplit(',').next().unwrap(), printed);
}

#[test]
fn table_rows_cover_the_support() {
    let dir = tempfile::tempdir().unwrap();
    let out_csv = dir.path().join("t.csv");
    assert!(wavereg(&[
        "table",
        "--vanishing-moments",
        "2",
        "--depth",
        "4",
        "--output",
        path(&out_csv)
    ])
    .status
    .success());
    let text = std::fs::read_to_string(&out_csv).unwrap();
    let rows = text.lines().filter(|l| !l.starts_with('#')).count() - 1;
    // db2 support [0, 3] at step 1/16.
    assert_eq!(rows, 3 * 16 + 1);
}
