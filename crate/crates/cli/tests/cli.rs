//! End-to-end checks of the `prwcs` binary: exit codes, output formats and
//! file handling.

use std::path::Path;
use std::process::{Command, Output};

fn prwcs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_prwcs"))
        .args(args)
        .output()
        .expect("spawning the prwcs binary")
}

fn stdout_json(output: &Output) -> serde_json::Value {
    assert!(output.status.success(), "stderr: {}", String::from_utf8_lossy(&output.stderr));
    serde_json::from_slice(&output.stdout).expect("stdout is json")
}

#[test]
fn help_succeeds() {
    let output = prwcs(&["--help"]);
    assert!(output.status.success());
    assert!(String::from_utf8_lossy(&output.stdout).contains("scan-phi"));
}

#[test]
fn analytic_emits_json_with_an_embedded_spec() {
    let output = prwcs(&["analytic", "--phi-deg", "45", "--mu-a", "0.02"]);
    let value = stdout_json(&output);
    let phi = value["spec"]["circuit"]["phi"].as_f64().unwrap();
    assert!((phi - std::f64::consts::FRAC_PI_4).abs() < 1e-12);
    assert_eq!(value["spec"]["source"]["mu_a"].as_f64().unwrap(), 0.02);
    assert!(value["rates"]["raw_hz"].as_f64().unwrap() > 0.0);
    assert!(value["per_bin"]["p_joint"].as_f64().unwrap() > 0.0);
}

#[test]
fn invalid_field_values_exit_with_code_2() {
    let output = prwcs(&["analytic", "--mu-a", "-0.5"]);
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("mu_a"));
}

#[test]
fn unknown_config_fields_exit_with_code_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("spec.json");
    std::fs::write(&path, r#"{"sourze": {"mu_a": 0.01}}"#).unwrap();
    let output = prwcs(&["analytic", "--config", path.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("sourze"));
}

#[test]
fn missing_config_file_exits_with_code_2() {
    let output = prwcs(&["analytic", "--config", "/no/such/spec.json"]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn unwritable_output_path_exits_with_code_3() {
    let output = prwcs(&["analytic", "--out", "/no/such/directory/report.json"]);
    assert_eq!(output.status.code(), Some(3));
}

#[test]
fn csv_format_is_rejected_for_json_only_reports() {
    let output = prwcs(&["analytic", "--format", "csv"]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn scan_phi_writes_the_documented_csv_schema() {
    let output = prwcs(&["scan-phi", "--mode", "analytic"]);
    assert!(output.status.success(), "stderr: {}", String::from_utf8_lossy(&output.stderr));
    let text = String::from_utf8(output.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "phi_deg,raw_cc,arm_a_cc,arm_b_cc,absolute_cc,stderr,normalized"
    );
    assert_eq!(lines.count(), 9);
}

#[test]
fn subtract_reports_the_three_runs() {
    let output = prwcs(&[
        "subtract",
        "--mu-a", "0.02",
        "--mu-b", "0.02",
        "--duration-s", "0.01",
        "--seed", "7",
    ]);
    let value = stdout_json(&output);
    for run in ["raw", "arm_a", "arm_b"] {
        assert!(value["result"][run]["coincidences"].as_u64().is_some(), "missing {run}");
    }
    let absolute = value["result"]["absolute"].as_f64().unwrap();
    let raw = value["result"]["raw"]["coincidences"].as_u64().unwrap() as f64;
    let a = value["result"]["arm_a"]["coincidences"].as_u64().unwrap() as f64;
    let b = value["result"]["arm_b"]["coincidences"].as_u64().unwrap() as f64;
    assert_eq!(absolute, raw - a - b);
}

#[test]
fn fit_recovers_the_fringe_from_scan_output(){
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("fringe.csv");
    let output = prwcs(&[
        "scan-phi",
        "--mode", "analytic",
        "--out", csv_path.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "stderr: {}", String::from_utf8_lossy(&output.stderr));
    let output = prwcs(&["fit", "--input", csv_path.to_str().unwrap(), "--l", "1"]);
    let value = stdout_json(&output);
    let visibility = value["fit"]["visibility"].as_f64().unwrap();
    assert!(visibility > 0.99, "visibility {visibility}");
    let offset = value["fit"]["phase_offset_rad"].as_f64().unwrap();
    assert!(offset.abs() < 1e-6);
}

#[test]
fn fit_on_missing_input_exits_with_code_3() {
    let output = prwcs(&["fit", "--input", "/no/such/fringe.csv"]);
    assert_eq!(output.status.code(), Some(3));
}

#[test]
fn mean_field_reports_the_ratio_table() {
    let output = prwcs(&["mean-field", "--mu", "0.01"]);
    let value = stdout_json(&output);
    assert_eq!(value["quantum_classical_ratio"].as_f64().unwrap(), 10.0);
    assert_eq!(value["phase_averaged_field"].as_f64().unwrap(), 0.0);
    assert!((value["coherent_peak_field"].as_f64().unwrap() - 0.2).abs() < 1e-12);
}

#[test]
fn scan_rate_emits_one_row_per_point() {
    let output = prwcs(&[
        "scan-rate",
        "--min-hz", "1e5",
        "--max-hz", "1e6",
        "--points", "4",
    ]);
    assert!(output.status.success(), "stderr: {}", String::from_utf8_lossy(&output.stderr));
    let text = String::from_utf8(output.stdout).unwrap();
    assert_eq!(text.lines().count(), 5);
    assert!(text.starts_with("singles_hz,"));
}

#[test]
fn repeated_seeds_reproduce_simulated_output_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| -> Vec<u8> {
        let path = dir.path().join(name);
        let output = prwcs(&[
            "subtract",
            "--duration-s", "0.02",
            "--seed", "12",
            "--out", path.to_str().unwrap(),
        ]);
        assert!(output.status.success(), "stderr: {}", String::from_utf8_lossy(&output.stderr));
        std::fs::read(Path::new(&path)).unwrap()
    };
    assert_eq!(run("first.json"), run("second.json"));
}
