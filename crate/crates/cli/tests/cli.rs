use serde_json::Value;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_conigap")).args(args).output().expect("binary runs")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

#[test]
fn no_arguments_is_usage_error() {
    let o = run(&[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
}

#[test]
fn gw_rows() {
    let o = run(&["gw", "--genus", "0", "--dmax", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    let n: Vec<&str> = v["rows"].as_array().unwrap().iter().map(|r| r["N"].as_str().unwrap()).collect();
    assert_eq!(n, ["3/1", "-45/8", "244/9"]);
}

#[test]
fn gap_genus_two() {
    let o = run(&["gap", "--genus", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["leading"], "-1/80");
    assert_eq!(v["gap_verified"], true);
    assert_eq!(run(&["gap", "--genus", "1"]).status.code(), Some(2));
}

#[test]
fn series_output_shape() {
    let v = json(&run(&["series", "--name", "qCF", "--order", "4"]));
    assert_eq!(v["variable"], "t");
    assert_eq!(v["coeffs"][1], "1/27");
    assert_eq!(run(&["series", "--name", "nope"]).status.code(), Some(2));
}

#[test]
fn elliptic_report_has_checks() {
    let v = json(&run(&["elliptic", "--q", "0.01", "--report"]));
    for k in ["q", "tau", "zeta", "frakx", "t", "x_plus"] {
        assert!(!v[k].is_null(), "{k}");
    }
    assert!(v["checks"]["bridge_residual"].as_f64().unwrap() < 1e-10);
    // 17 significant digits
    assert!(v["t"].to_string().contains("e-2") && v["t"].to_string().len() >= 20);
    assert_eq!(run(&["elliptic", "--q", "0.9"]).status.code(), Some(2));
}

#[test]
fn tr_check_columns() {
    let v = json(&run(&["tr-check", "--genus", "3", "--q", "0.01,0.012"]));
    assert_eq!(v["g"], 3);
    for k in ["q", "t", "dFdt_tr", "dFdt_hae", "rel_dev"] {
        assert_eq!(v[k].as_array().unwrap().len(), 2, "{k}");
    }
}

#[test]
fn simulate_writes_histogram() {
    let dir = std::env::temp_dir().join(format!("conigap-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let csv = dir.join("spectra.csv");
    let o = run(&[
        "simulate", "--N", "8", "--t", "0.1", "--sweeps", "20000", "--burnin", "500", "--chains", "2", "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&o);
    for k in ["N", "t", "ks", "edge_err_lo", "edge_err_hi", "acceptance"] {
        assert!(!v[k].is_null(), "{k}");
    }
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("bin_left,bin_right,count,density"));
    assert_eq!(text.lines().count(), 101);
    let bad = run(&["simulate", "--t", "1.3", "--out", csv.to_str().unwrap()]);
    assert_eq!(bad.status.code(), Some(2));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn verify_subset_and_failure_code() {
    let ok = run(&["verify-all", "--only", "2,3"]);
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(json(&ok)["criteria"].as_array().unwrap().len(), 2);
    // criterion 1 is red; without --keep-going nothing after it runs
    let red = run(&["verify-all", "--only", "1,3"]);
    assert_eq!(red.status.code(), Some(1));
    assert_eq!(json(&red)["criteria"].as_array().unwrap().len(), 1);
    let kg = run(&["verify-all", "--only", "1,3", "--keep-going"]);
    assert_eq!(json(&kg)["criteria"].as_array().unwrap().len(), 2);
    assert_eq!(run(&["verify-all", "--only", "42"]).status.code(), Some(2));
}
