//! End-to-end runs of the `qkerr` binary.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn qkerr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qkerr")).args(args).output().expect("spawn qkerr")
}

fn run_ok(args: &[&str]) {
    let out = qkerr(args);
    assert!(out.status.success(), "qkerr {args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
}

/// Header and numeric rows of a CSV, checking the line format on the way.
fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = fs::read_to_string(path).unwrap();
    assert!(!text.contains('\r'), "{} has CR line endings", path.display());
    assert!(text.ends_with('\n'));
    let mut reader = csv::Reader::from_path(path).unwrap();
    let header = reader.headers().unwrap().iter().map(str::to_string).collect();
    let rows = reader
        .records()
        .map(|r| r.unwrap().iter().map(|v| v.parse::<f64>().unwrap()).collect())
        .collect();
    (header, rows)
}

fn column(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"))
}

fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().into_string().unwrap(), fs::read(e.path()).unwrap())
        })
        .collect()
}

#[test]
fn revival_scan_returns_at_full_period() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    run_ok(&["revival-scan", "--samples", "256", "--m", "0", "--m", "1", "--out", out]);
    let (header, cs) = read_csv(&dir.path().join("revival_m0.csv"));
    assert_eq!(header, ["t", "t_over_Trev", "autocorr", "mean_x", "mean_p", "var_x", "skew2_x", "kurt_x"]);
    assert_eq!(cs.len(), 256);
    let (_, pacs) = read_csv(&dir.path().join("revival_m1.csv"));
    let ac = column(&header, "autocorr");
    for rows in [&cs, &pacs] {
        assert!((rows[0][ac] - 1.0).abs() < 1e-10);
        assert!((rows[255][ac] - 1.0).abs() < 1e-10);
        // nowhere in between does either state fully return
        assert!(rows[1..255].iter().all(|r| r[ac] < 1.0 - 1e-6));
    }
    let var = column(&header, "var_x");
    let near_half = cs.iter().filter(|r| (r[1] - 0.5).abs() < 0.05).map(|r| r[var]).fold(f64::INFINITY, f64::min);
    assert!(near_half < 0.5, "var_x near T/2: {near_half}");
}

#[test]
fn runs_are_bit_reproducible_and_echo_config() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let out = dir.path().to_str().unwrap();
        run_ok(&["delta", "--samples", "3", "--m", "0", "--m", "1", "--grid-points", "151", "--out", out]);
    }
    let (sa, sb) = (snapshot(a.path()), snapshot(b.path()));
    assert_eq!(sa.keys().collect::<Vec<_>>(), ["delta_all.csv", "delta_config.json", "delta_m0.csv", "delta_m1.csv"]);
    for (name, bytes) in &sa {
        if name.ends_with(".csv") {
            assert_eq!(bytes, &sb[name], "{name} differs between runs");
        }
    }
    let config: serde_json::Value = serde_json::from_slice(&sa["delta_config.json"]).unwrap();
    assert_eq!(config["chi"], 5.0);
    assert_eq!(config["nu"], 1.0);
    assert_eq!(config["cutoff_eps"], 1e-12);
    assert_eq!(config["m"], serde_json::json!([0, 1]));
    assert_eq!(config["grid"]["points_per_axis"], 151);
    assert!(config["grid"]["half_extent"].as_f64().unwrap() > 0.0);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    let out = dir.path().join("out");
    fs::write(&cfg, format!(r#"{{"nu": 0.5, "samples": 5, "out": {:?}}}"#, out.to_str().unwrap())).unwrap();
    run_ok(&["revival-scan", "--config", cfg.to_str().unwrap(), "--samples", "7"]);
    let (_, rows) = read_csv(&out.join("revival_m0.csv"));
    assert_eq!(rows.len(), 7);
    let config: serde_json::Value = serde_json::from_slice(&fs::read(out.join("revival-scan_config.json")).unwrap()).unwrap();
    assert_eq!(config["nu"], 0.5);
    assert_eq!(config["time"]["samples"], 7);
}

#[test]
fn failures_exit_nonzero_without_partial_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = out.to_str().unwrap();
    // a window this small cuts the state off at its boundary
    let res = qkerr(&["delta", "--m", "1", "--samples", "2", "--grid-extent", "1.5", "--out", o]);
    assert!(!res.status.success());
    assert!(String::from_utf8_lossy(&res.stderr).contains("boundary"));
    assert!(!out.exists());

    assert!(!qkerr(&["wigner", "--grid-points", "100", "--out", o]).status.success());
    assert!(!qkerr(&["squeezing", "--nu", "-1", "--out", o]).status.success());
    assert!(!qkerr(&["revival-scan", "--bogus"]).status.success());
    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"gridpoints": 3}"#).unwrap();
    assert!(!qkerr(&["delta", "--config", bad.to_str().unwrap(), "--out", o]).status.success());
    assert!(!out.exists());
}

#[test]
fn squeezing_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    run_ok(&[
        "squeezing", "--nu", "0.1", "--q", "1", "--q", "3", "--m", "0", "--m", "1", "--samples", "512",
        "--theta-samples", "181", "--out", out,
    ]);

    let (h, rows) = read_csv(&dir.path().join("dq_vs_nu.csv"));
    assert_eq!(h, ["m", "q", "theta", "nu", "dq_closed", "dq_numeric"]);
    let cs_q1: Vec<_> = rows.iter().filter(|r| r[0] == 0.0 && r[1] == 1.0).collect();
    assert_eq!(cs_q1.len(), 100);
    assert!(cs_q1.iter().all(|r| r[4] < 0.0));
    // at large nu the brute-force value falls to rounding level
    assert!(cs_q1.iter().filter(|r| r[4] < -1e-12).all(|r| r[5] < 0.0));
    assert!(rows.iter().all(|r| (r[4] - r[5]).abs() < 1e-6 * (1.0 + r[4].abs())));

    // D_1 changes sign where |tan theta| = e^{-2 nu}
    let (_, rows) = read_csv(&dir.path().join("dq_vs_theta.csv"));
    let boundary = (-0.2f64).exp();
    let mut checked = 0;
    for r in rows.iter().filter(|r| r[0] == 0.0 && r[1] == 1.0) {
        let margin = r[3].tan().abs() - boundary;
        if margin.abs() > 1e-3 {
            assert_eq!(r[4] < 0.0, margin < 0.0, "theta = {}", r[3]);
            checked += 1;
        }
    }
    assert!(checked > 170);

    // time series at alpha = 1
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    run_ok(&["squeezing", "--q", "1", "--nu-samples", "2", "--theta-samples", "2", "--samples", "512", "--out", out]);
    let (h, rows) = read_csv(&dir.path().join("delta_x_vs_t.csv"));
    assert_eq!(h, ["m", "t", "t_over_Trev", "delta_x", "reference"]);
    assert_eq!(rows.len(), 1024);
    assert!(rows.iter().all(|r| r[4] == FRAC_1_SQRT_2));
    let dip = |m: f64| {
        rows.iter()
            .filter(|r| r[0] == m && (r[2] - 0.5).abs() < 0.05)
            .map(|r| r[3])
            .fold(f64::INFINITY, f64::min)
    };
    assert!(dip(0.0) < FRAC_1_SQRT_2);
    assert!(dip(1.0) > FRAC_1_SQRT_2);

    let (h, rows) = read_csv(&dir.path().join("m4_vs_t.csv"));
    assert_eq!(h, ["m", "t", "t_over_Trev", "m4", "bound"]);
    assert!(rows.iter().all(|r| r[4] == 0.75 && r[3] > 0.0));
}

#[test]
fn wigner_snapshots_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    run_ok(&["wigner", "--m", "0", "--times", "0.5", "--out", out]);
    let (h, rows) = read_csv(&dir.path().join("summary.csv"));
    assert_eq!(h, ["m", "t", "t_over_Trev", "min_w", "max_w", "negative_cells", "lobes", "integral", "delta"]);
    assert_eq!(rows[0][column(&h, "lobes")], 2.0);
    let (fh, field) = read_csv(&dir.path().join("wigner_m0_t0.5000.csv"));
    assert_eq!(fh, ["beta1", "beta2", "w"]);
    let config: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join("wigner_config.json")).unwrap()).unwrap();
    let n = config["grid"]["points_per_axis"].as_u64().unwrap() as usize;
    assert_eq!(field.len(), n * n);

    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    run_ok(&["wigner", "--m", "1", "--m", "10", "--times", "0", "--grid-points", "201", "--out", out]);
    let (h, rows) = read_csv(&dir.path().join("summary.csv"));
    let (min_w, neg) = (column(&h, "min_w"), column(&h, "negative_cells"));
    assert!(rows[0][min_w] < 0.0);
    assert!(rows[1][neg] > rows[0][neg], "m=10 {} vs m=1 {}", rows[1][neg], rows[0][neg]);
}

#[test]
fn delta_at_start_grows_with_added_photons() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    run_ok(&["delta", "--samples", "2", "--grid-points", "201", "--out", out]);
    let (h, rows) = read_csv(&dir.path().join("delta_all.csv"));
    assert_eq!(h, ["m", "t", "t_over_Trev", "delta_raw", "delta"]);
    let at = |m: f64, frac: f64| rows.iter().find(|r| r[0] == m && r[2] == frac).unwrap()[4];
    assert!(at(0.0, 0.0).abs() < 2e-3);
    assert!(at(10.0, 0.0) >= at(1.0, 0.0) && at(1.0, 0.0) >= at(0.0, 0.0));
    for m in [0.0, 1.0, 10.0] {
        assert!((at(m, 1.0) - at(m, 0.0)).abs() < 1e-6);
    }
    let (h, per_state) = read_csv(&dir.path().join("delta_m10.csv"));
    assert_eq!(h, ["t", "t_over_Trev", "delta_raw", "delta"]);
    assert_eq!(per_state.len(), 2);
}
