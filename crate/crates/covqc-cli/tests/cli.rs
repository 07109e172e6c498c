//! End-to-end runs of the installed binary: output layout, reference values,
//! exit codes and rerun determinism.

use std::process::{Command, Output};

use serde_json::Value;

fn covqc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_covqc"))
        .args(args)
        .output()
        .expect("the binary should spawn")
}

fn stdout_of(args: &[&str]) -> String {
    let out = covqc(args);
    assert!(
        out.status.success(),
        "`covqc {}` failed: {}",
        args.join(" "),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).expect("stdout should be utf-8")
}

fn json_of(args: &[&str]) -> Value {
    serde_json::from_str(&stdout_of(args)).expect("stdout should parse as json")
}

/// Rows of a CSV table, config comment and header stripped.
fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .skip(2)
        .map(|line| line.split(',').map(str::to_string).collect())
        .collect()
}

fn float(row: &[String], index: usize) -> f64 {
    row[index].parse().expect("numeric column")
}

#[test]
fn the_csv_layout_is_a_config_comment_then_a_header() {
    let text = stdout_of(&["ppt-region", "--family", "cov1l", "--l", "1", "--grid", "3"]);
    let mut lines = text.lines();
    let config_line = lines.next().expect("config line");
    assert!(config_line.starts_with("# config {"));
    let config: Value = serde_json::from_str(&config_line["# config ".len()..]).expect("embedded json");
    assert_eq!(config["command"], "ppt-region");
    assert_eq!(config["grid"], 3);
    assert_eq!(lines.next(), Some("p,q,min_pt_eigenvalue,member"));
}

#[test]
fn cov1l_membership_flips_one_step_from_the_boundary() {
    let text = stdout_of(&["ppt-region", "--family", "cov1l", "--l", "3", "--grid", "101"]);
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 101);
    let flips: Vec<f64> = rows
        .windows(2)
        .filter(|w| w[0][3] != w[1][3])
        .map(|w| (float(&w[0], 0) + float(&w[1], 0)) / 2.0)
        .collect();
    assert_eq!(flips.len(), 1, "one membership flip expected, got {flips:?}");
    assert!((flips[0] - 0.25).abs() <= 0.01, "flip at {} is off the l = 3 boundary", flips[0]);
}

#[test]
fn a_three_point_qubit_grid_marks_the_upper_half() {
    let text = stdout_of(&["ppt-region", "--family", "cov1l", "--l", "1", "--grid", "3"]);
    let members: Vec<f64> = csv_rows(&text)
        .iter()
        .filter(|row| row[3] == "true")
        .map(|row| float(row, 0))
        .collect();
    assert_eq!(members, vec![0.5, 1.0]);
}

#[test]
fn the_qutrit_sweep_reproduces_the_inequality_description() {
    let text = stdout_of(&["ppt-region", "--family", "cov22", "--grid", "31"]);
    let rows = csv_rows(&text);
    assert!(rows.len() > 400, "simplex sweep should keep p + q <= 1 points");
    for row in &rows {
        let (p, q) = (float(row, 0), float(row, 1));
        assert!(p + q <= 1.0 + 1e-9, "row outside the simplex: {row:?}");
        let expected = p <= 0.5 + 1e-9 && p + q >= 2.0 / 3.0 - 1e-9;
        assert_eq!(row[3] == "true", expected, "membership mismatch at ({p}, {q})");
    }
}

#[test]
fn the_qutrit_reference_point_entropy_is_reproduced() {
    let text = stdout_of(&["moe", "--family", "cov22", "--p", "0.5", "--q", "0.5"]);
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 1);
    assert!((float(&rows[0], 2) - 1.055).abs() <= 5e-3);
    assert_eq!(rows[0][4], "ket1");
}

#[test]
fn holevo_vanishes_at_the_depolarizing_parameter() {
    let text = stdout_of(&["moe", "--family", "cov1l", "--l", "2", "--grid", "31"]);
    let rows = csv_rows(&text);
    let target = 2.0 / 3.0;
    let row = rows
        .iter()
        .find(|row| (float(row, 0) - target).abs() < 1e-12)
        .expect("the depolarizing parameter lies on the 31-point grid");
    assert!(float(row, 3).abs() <= 1e-10, "holevo = {} at p = 2/3", float(row, 3));
}

#[test]
fn sweeps_rerun_byte_identically() {
    let args = ["ppt-region", "--family", "cov22", "--grid", "21"];
    assert_eq!(stdout_of(&args), stdout_of(&args));

    let seeded = ["ebt-certify", "--family", "cov1l", "--l", "3", "--p", "0.5", "--samples", "200"];
    assert_eq!(stdout_of(&seeded), stdout_of(&seeded));
}

#[test]
fn the_noiseless_qubit_case_shows_no_two_copy_gain() {
    let report = json_of(&["superactivation", "--l", "1", "--p", "0", "--grid", "101"]);
    assert!(report["gap"].as_f64().expect("gap") <= 0.0);
}

#[test]
fn the_quarter_noise_case_matches_its_pinned_report() {
    let report = json_of(&["superactivation", "--l", "2", "--p", "0.3", "--grid", "20001"]);
    // Values pinned from a reference run; the experiment is deterministic.
    assert!((report["gap"].as_f64().unwrap() - (-3.977329984219814e-4)).abs() <= 1e-12);
    assert!(report["two_copy_half_bound"].as_f64().unwrap().abs() <= 1e-12);
}

#[test]
fn the_flagship_point_reports_a_positive_gap() {
    let report = json_of(&["superactivation", "--l", "2", "--p", "0.1045"]);
    let gap = report["gap"].as_f64().expect("gap");
    let half_bound = report["two_copy_half_bound"].as_f64().expect("half bound");
    assert!(gap > 0.0, "two-copy advantage expected at the flagship point, got {gap}");
    assert!((half_bound - 3.929516279426393e-3).abs() <= 1e-9);
}

#[test]
fn single_criterion_verification_passes_and_reports() {
    let out = covqc(&["verify", "--criterion", "1"]);
    assert!(out.status.success());
    let report: Value = serde_json::from_slice(&out.stdout).expect("json report");
    assert_eq!(report["passed"], true);
    let criteria = report["criteria"].as_array().expect("criteria array");
    assert_eq!(criteria.len(), 1);
    let checks = criteria[0]["checks"].as_array().expect("checks array");
    assert!(!checks.is_empty());
    for check in checks {
        for key in ["name", "computed", "expected", "tolerance", "mode", "pass"] {
            assert!(!check[key].is_null(), "check is missing {key}: {check}");
        }
    }
}

#[test]
fn an_extreme_tolerance_override_is_flagged_as_such() {
    let out = covqc(&["verify", "--criterion", "1", "--tolerance", "1e-20"]);
    assert_eq!(out.status.code(), Some(1));
    let report: Value = serde_json::from_slice(&out.stdout).expect("json report");
    assert_eq!(report["passed"], false);
    assert_eq!(report["criteria"][0]["tolerance_induced"], true);
}

#[test]
fn the_full_verification_suite_passes() {
    let out = covqc(&["verify"]);
    assert!(
        out.status.success(),
        "verification failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report: Value = serde_json::from_slice(&out.stdout).expect("json report");
    assert_eq!(report["passed"], true);
    assert_eq!(report["criteria"].as_array().expect("criteria").len(), 9);
}

#[test]
fn kraus_dumps_carry_the_expected_operator_count() {
    for (args, count) in [
        (vec!["kraus-dump", "--family", "cov1l", "--l", "2", "--p", "0.3"], 6),
        (vec!["kraus-dump", "--family", "covl1", "--l", "3", "--p", "0.3"], 8),
        (vec!["kraus-dump", "--family", "cov22", "--p", "0.2", "--q", "0.3"], 9),
    ] {
        let report = json_of(&args);
        let kraus = report["channel"]["kraus"].as_array().expect("kraus array");
        assert_eq!(kraus.len(), count, "wrong operator count for {args:?}");
    }
}

#[test]
fn membership_certificates_distinguish_inside_from_outside() {
    let outside = json_of(&["ebt-certify", "--family", "cov1l", "--l", "2", "--p", "0.1"]);
    assert_eq!(outside["kind"], "non_member");
    assert!(outside["decomposition_defect"].is_null());

    let inside = json_of(&["ebt-certify", "--family", "cov1l", "--l", "3", "--p", "1.0", "--samples", "50"]);
    assert_eq!(inside["kind"], "member");
    assert!(inside["decomposition_defect"].as_f64().expect("defect") <= 1e-10);
    assert_eq!(inside["extreme_points"].as_array().expect("points").len(), 2);
}

#[test]
fn the_degradability_report_matches_its_closed_form() {
    let report = json_of(&["degradability", "--family", "cov22", "--p", "0.5", "--q", "0.2"]);
    assert_eq!(report["conclusion"], "not_degradable");
    assert!(report["difference"].as_f64().expect("difference") <= 1e-10);
}

#[test]
fn the_identity_channel_midpoint_carries_one_nat() {
    let text = stdout_of(&["coherent-info", "--l", "1", "--p", "0", "--grid", "5"]);
    let rows = csv_rows(&text);
    let row = rows.iter().find(|row| float(row, 0) == 0.5).expect("midpoint row");
    assert!((float(row, 3) - 2f64.ln()).abs() <= 1e-12);
}

#[test]
fn the_bits_flag_rescales_by_log2_e() {
    let nats = stdout_of(&["moe", "--family", "cov22", "--p", "0.5", "--q", "0.5"]);
    let bits = stdout_of(&["moe", "--bits", "--family", "cov22", "--p", "0.5", "--q", "0.5"]);
    let h_nats = float(&csv_rows(&nats)[0], 2);
    let h_bits = float(&csv_rows(&bits)[0], 2);
    assert!((h_bits - h_nats * std::f64::consts::LOG2_E).abs() <= 1e-12);
}

#[test]
fn positivity_sweep_brackets_the_admissible_interval() {
    let text = stdout_of(&[
        "positivity", "--family", "cov1l", "--l", "2", "--grid", "7", "--samples", "100",
    ]);
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 7);
    assert_eq!(rows.first().expect("first")[3], "false");
    assert_eq!(rows.last().expect("last")[3], "false");
    assert!(rows[1..6].iter().all(|row| row[3] == "true"));
}

#[test]
fn twirl_verification_lists_each_extreme_point() {
    let text = stdout_of(&["twirl-verify", "--family", "cov22", "--samples", "500"]);
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 4);
    for row in &rows {
        assert!(float(row, 5) < 0.5, "frobenius gap should be small at 500 samples: {row:?}");
    }
}

#[test]
fn misuse_exits_with_code_two() {
    for args in [
        vec!["ppt-region", "--family", "cov1l"],
        vec!["ppt-region", "--family", "cov22", "--l", "3"],
        vec!["ppt-region", "--family", "cov1l", "--l", "2", "--grid", "1"],
        vec!["moe", "--family", "covl1", "--l", "2"],
        vec!["moe", "--family", "cov1l", "--l", "2", "--q", "0.1"],
        vec!["ebt-certify", "--family", "cov22", "--p", "0.5"],
        vec!["superactivation", "--l", "2", "--p", "0.1", "--format", "csv"],
        vec!["ppt-region"],
    ] {
        let out = covqc(&args);
        assert_eq!(out.status.code(), Some(2), "expected a usage error for {args:?}");
    }
}
