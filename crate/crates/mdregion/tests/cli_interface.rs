//! End-to-end tests of the command-line interface: exit codes, report
//! schemas, CSV determinism, and instance-file round-trips.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mdregion"))
}

fn write_instance(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn stdout_json(out: &Output) -> serde_json::Value {
    assert!(
        out.status.success(),
        "command failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

const CLOSED_FORM: &str = r#"{
  "Kx": [[1.0]],
  "D0": [[0.16666666666666666]],
  "D": [[[0.5]], [[0.5]]],
  "beta": [1.0, 1.0]
}"#;

const VECTOR_WITH_CHANNEL: &str = r#"{
  "Kx": [[1.0, 0.3], [0.3, 1.2]],
  "D0": [[0.9, 0.27], [0.27, 1.08]],
  "D": [[[0.95, 0.285], [0.285, 1.14]], [[0.95, 0.285], [0.285, 1.14]]],
  "beta": [1.0, 1.0],
  "K": [[[1.4, 0.2], [0.2, 1.6]], [[1.8, 0.1], [0.1, 2.0]]]
}"#;

#[test]
fn bound_reports_the_closed_form_value() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write_instance(dir.path(), "closed.json", CLOSED_FORM);
    let out = bin()
        .args(["bound", "--instance"])
        .arg(&inst)
        .args(["--starts", "4", "--seed", "11"])
        .output()
        .unwrap();
    let report = stdout_json(&out);
    let value = report["bound_value_nats"].as_f64().unwrap();
    assert!((value - 0.5 * 6.25f64.ln()).abs() < 1e-6, "value {value}");
    assert_eq!(report["converged"], serde_json::Value::Bool(true));
    assert!(report["evaluations"].as_u64().unwrap() > 0);
    assert!(report["ladder"].as_array().unwrap().len() == 1);
}

#[test]
fn solve_scalar_matches_the_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write_instance(dir.path(), "closed.json", CLOSED_FORM);
    let out = bin()
        .args(["solve-scalar", "--instance"])
        .arg(&inst)
        .output()
        .unwrap();
    let report = stdout_json(&out);
    assert_eq!(report["scenario"], "interior");
    let sigma2 = report["sigma2"][0].as_f64().unwrap();
    assert!((sigma2 - 0.6).abs() < 1e-9, "sigma2 {sigma2}");
    let value = report["value"].as_f64().unwrap();
    assert!((value - 0.5 * 6.25f64.ln()).abs() < 1e-9, "value {value}");
    assert!(report["kkt_residual"].is_null());
    assert_eq!(report["rates"].as_array().unwrap().len(), 2);
}

#[test]
fn bits_flag_rescales_rates_only() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write_instance(dir.path(), "closed.json", CLOSED_FORM);
    let nats = stdout_json(
        &bin()
            .args(["solve-scalar", "--instance"])
            .arg(&inst)
            .output()
            .unwrap(),
    );
    let bits = stdout_json(
        &bin()
            .args(["solve-scalar", "--instance"])
            .arg(&inst)
            .arg("--bits")
            .output()
            .unwrap(),
    );
    let ln2 = std::f64::consts::LN_2;
    let vn = nats["value"].as_f64().unwrap();
    let vb = bits["value"].as_f64().unwrap();
    assert!((vb - vn / ln2).abs() < 1e-12);
    // the channel ladder is a covariance, not a rate: unchanged
    assert_eq!(nats["sigma2"], bits["sigma2"]);
}

#[test]
fn malformed_instance_exits_two_naming_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write_instance(
        dir.path(),
        "broken.json",
        r#"{"Kx": [[1.0]], "D": [[[0.5]], [[0.5]]], "beta": [1.0, 1.0]}"#,
    );
    let out = bin()
        .args(["bound", "--instance"])
        .arg(&inst)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("D0"), "stderr should name the missing field: {stderr}");
}

#[test]
fn invariant_violations_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    // central distortion not dominated by the source covariance scale:
    // d0 >= d_min violates the ordering the model requires
    let inst = write_instance(
        dir.path(),
        "bad.json",
        r#"{
          "Kx": [[1.0]],
          "D0": [[0.7]],
          "D": [[[0.5]], [[0.5]]],
          "beta": [1.0, 1.0]
        }"#,
    );
    let out = bin()
        .args(["solve-scalar", "--instance"])
        .arg(&inst)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}

#[test]
fn solve_scalar_rejects_vector_instances() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write_instance(dir.path(), "vec.json", VECTOR_WITH_CHANNEL);
    let out = bin()
        .args(["solve-scalar", "--instance"])
        .arg(&inst)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("bound"), "should direct to the bound command: {stderr}");
}

#[test]
fn region_sweep_is_deterministic_and_well_formed() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write_instance(dir.path(), "closed.json", CLOSED_FORM);
    let csv_a = dir.path().join("a.csv");
    let csv_b = dir.path().join("b.csv");
    for path in [&csv_a, &csv_b] {
        let out = bin()
            .args(["region", "--instance"])
            .arg(&inst)
            .args(["--resolution", "11", "--out"])
            .arg(path)
            .output()
            .unwrap();
        assert!(out.status.success());
    }
    let text_a = std::fs::read(&csv_a).unwrap();
    let text_b = std::fs::read(&csv_b).unwrap();
    assert_eq!(text_a, text_b, "identical runs must produce identical bytes");

    let text = String::from_utf8(text_a).unwrap();
    assert!(!text.contains('\r'), "rows must be LF-terminated");
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "beta_1,beta_2,value,R_1,R_2,scenario");
    assert_eq!(rows.len(), 12, "header plus eleven grid rows");

    let mut saw_center = false;
    for row in &rows[1..] {
        let cells: Vec<&str> = row.split(',').collect();
        assert_eq!(cells.len(), 6);
        let beta: Vec<f64> = cells[..2].iter().map(|c| c.parse().unwrap()).collect();
        let value: f64 = cells[2].parse().unwrap();
        let rates: Vec<f64> = cells[3..5].iter().map(|c| c.parse().unwrap()).collect();
        assert!((beta[0] + beta[1] - 2.0).abs() < 1e-12, "weights normalize to L");
        let ws = beta[0] * rates[0] + beta[1] * rates[1];
        assert!((ws - value).abs() < 1e-8, "value must equal the weighted sum");
        if (beta[0] - 1.0).abs() < 1e-12 && (beta[1] - 1.0).abs() < 1e-12 {
            saw_center = true;
        }
    }
    assert!(saw_center, "equal-weight row must appear in the sweep");
}

#[test]
fn region_rejects_degenerate_resolution() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write_instance(dir.path(), "closed.json", CLOSED_FORM);
    let out = bin()
        .args(["region", "--instance"])
        .arg(&inst)
        .args(["--resolution", "1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn achieve_evaluates_a_provided_channel() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write_instance(dir.path(), "vec.json", VECTOR_WITH_CHANNEL);
    let out = bin()
        .args(["achieve", "--instance"])
        .arg(&inst)
        .output()
        .unwrap();
    let report = stdout_json(&out);
    assert_eq!(report["channel"], "provided");
    assert!(report["fixedpoint_residual"].as_f64().unwrap() < 1e-9);
    let side = report["achieved_side_distortions"].as_array().unwrap();
    assert_eq!(side.len(), 2);
    // generous distortion ceilings: the explicit channel meets them
    assert_eq!(report["side_feasible"][0], true);
    assert_eq!(report["side_feasible"][1], true);
    assert_eq!(report["central_feasible"], true);
    let ws = report["weighted_sum"].as_f64().unwrap();
    let rates = report["rates"].as_array().unwrap();
    let sum: f64 = rates.iter().map(|r| r.as_f64().unwrap()).sum();
    assert!((ws - sum).abs() < 1e-12, "equal weights: weighted sum is the plain sum");
}

#[test]
fn achieve_falls_back_to_the_solver_on_scalar_instances() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write_instance(dir.path(), "closed.json", CLOSED_FORM);
    let out = bin()
        .args(["achieve", "--instance"])
        .arg(&inst)
        .output()
        .unwrap();
    let report = stdout_json(&out);
    assert_eq!(report["channel"], "solver");
    assert_eq!(report["side_feasible"][0], true);
    assert_eq!(report["side_feasible"][1], true);
    assert_eq!(report["central_feasible"], true);
}

#[test]
fn achieve_requires_a_channel_for_vector_instances() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write_instance(
        dir.path(),
        "vec_nochan.json",
        r#"{
          "Kx": [[1.0, 0.3], [0.3, 1.2]],
          "D0": [[0.2, 0.06], [0.06, 0.24]],
          "D": [[[0.5, 0.15], [0.15, 0.6]], [[0.55, 0.165], [0.165, 0.66]]],
          "beta": [1.0, 1.0]
        }"#,
    );
    let out = bin()
        .args(["achieve", "--instance"])
        .arg(&inst)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn instance_files_round_trip_bit_for_bit() {
    let text = mdregion::problem::instance_to_json(
        &mdregion::Instance::new(
            mdregion::Spd::from_rows(&[vec![1.0, 0.3], vec![0.3, 1.2]]).unwrap(),
            mdregion::Spd::from_rows(&[vec![0.2, 0.06], vec![0.06, 0.24]]).unwrap(),
            vec![
                mdregion::Spd::from_rows(&[vec![0.5, 0.15], vec![0.15, 0.6]]).unwrap(),
                mdregion::Spd::from_rows(&[vec![0.55, 0.165], vec![0.165, 0.66]]).unwrap(),
            ],
        )
        .unwrap(),
        &[1.25, 0.75],
    );
    let loaded = mdregion::problem::parse_instance_json(&text).unwrap();
    let text2 = mdregion::problem::instance_to_json(&loaded.instance, &loaded.beta);
    assert_eq!(text, text2, "serialize → parse → serialize must be identity");
}

#[test]
fn verify_command_passes_and_exits_zero() {
    let out = bin().args(["verify", "--seed", "5"]).output().unwrap();
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(
        out.status.code(),
        Some(0),
        "verify failed:\n{stdout}\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(stdout.contains("all suites passed"));
    assert!(stdout.contains("linalg-identities"));
    assert!(stdout.contains("bound-soundness"));
}
