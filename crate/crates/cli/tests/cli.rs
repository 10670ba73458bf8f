use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn swapsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_swapsim"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn report(args: &[&str], dir: &Path) -> (i32, Value) {
    let path = dir.join("report.json");
    let mut full = args.to_vec();
    let p = path.to_str().unwrap();
    full.extend(["--report", p]);
    let out = swapsim(&full);
    let json = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    (out.status.code().unwrap(), json)
}

fn check<'a>(report: &'a Value, name: &str) -> &'a Value {
    report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == name)
        .unwrap_or_else(|| panic!("no check {name}"))
}

#[test]
fn verify_passes_on_the_joint_state() {
    let dir = tempfile::tempdir().unwrap();
    let (code, r) = report(&["verify"], dir.path());
    assert_eq!(code, 0);
    for c in r["checks"].as_array().unwrap() {
        assert_eq!(c["pass"], true, "{c}");
    }
    let reduced = check(&r, "reduced_14_is_maximally_mixed");
    assert_eq!(reduced["paper_ref"], "Eq. (4)");
    assert!(reduced["value"].as_f64().unwrap() < 1e-12);
}

#[test]
fn corrupted_amplitude_fails_named_checks() {
    let dir = tempfile::tempdir().unwrap();
    let (code, r) = report(&["verify", "--corrupt-amplitude", "5"], dir.path());
    assert_eq!(code, 1);
    assert_eq!(check(&r, "joint_state_coefficients")["pass"], false);
    assert_eq!(check(&r, "reduced_14_is_maximally_mixed")["pass"], false);
    assert_eq!(check(&r, "singlet_reaches_tsirelson")["pass"], true);
    assert_eq!(r["config"]["corrupt_amplitude"], 5);
}

#[test]
fn zero_trials_is_a_usage_error_and_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("records.json");
    let out = swapsim(&["swap", "--trials", "0", "--out", out_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out_path.exists());
    assert!(!String::from_utf8_lossy(&out.stderr).is_empty());
}

#[test]
fn bad_flags_exit_with_usage_status() {
    assert_eq!(swapsim(&["swap", "--select", "psi"]).status.code(), Some(2));
    assert_eq!(
        swapsim(&["swap", "--d-action", "zz", "--select", "psi-"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        swapsim(&["chsh", "--settings", "0,90"]).status.code(),
        Some(2)
    );
    assert_eq!(
        swapsim(&["marginals", "--trials", "100"]).status.code(),
        Some(2)
    );
}

#[test]
fn identical_invocations_write_identical_records() {
    let dir = tempfile::tempdir().unwrap();
    for format in ["json", "csv"] {
        let files: Vec<Vec<u8>> = (0..2)
            .map(|i| {
                let p = dir.path().join(format!("r{i}.{format}"));
                let out = swapsim(&[
                    "swap",
                    "--trials",
                    "5000",
                    "--seed",
                    "9",
                    "--format",
                    format,
                    "--out",
                    p.to_str().unwrap(),
                ]);
                assert_eq!(out.status.code(), Some(0));
                std::fs::read(p).unwrap()
            })
            .collect();
        assert_eq!(files[0], files[1]);
        assert!(!files[0].is_empty());
    }
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    swapsim(&[
        "swap",
        "--trials",
        "5000",
        "--seed",
        "9",
        "--out",
        a.to_str().unwrap(),
    ]);
    swapsim(&[
        "swap",
        "--trials",
        "5000",
        "--seed",
        "10",
        "--out",
        b.to_str().unwrap(),
    ]);
    assert_ne!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
}

#[test]
fn csv_records_have_the_documented_header() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("r.csv");
    swapsim(&[
        "swap",
        "--trials",
        "100",
        "--format",
        "csv",
        "--out",
        p.to_str().unwrap(),
    ]);
    let text = std::fs::read_to_string(p).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "trial_id,d_action,d_outcome,message_delivered,setting_pair,outcome1,outcome4"
    );
    assert_eq!(text.lines().count(), 101);
}

#[test]
fn swap_report_numbers_match_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = swapsim(&[
        "swap",
        "--trials",
        "40000",
        "--report",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let s = r["results"]["selected"]["estimate"]["s_value"]
        .as_f64()
        .unwrap();
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains(&format!("S = {s:+.4}")), "{stdout}");
    assert!(stdout.contains("violates |S|<=2 by"));
    assert_eq!(r["config"]["select"], "psi-");
    assert_eq!(r["config"]["trials"], 40000);
}

#[test]
fn zz_mode_matches_relative_state_prediction() {
    let dir = tempfile::tempdir().unwrap();
    let (code, r) = report(
        &["swap", "--d-action", "zz", "--trials", "5000"],
        dir.path(),
    );
    assert_eq!(code, 0);
    assert_eq!(r["results"]["zz"]["mismatches"], 0);
    assert_eq!(r["results"]["zz"]["announced"], 5000);
}

#[test]
fn no_measurement_respects_classical_bound() {
    let dir = tempfile::tempdir().unwrap();
    let (code, r) = report(
        &["swap", "--d-action", "none", "--trials", "20000"],
        dir.path(),
    );
    assert_eq!(code, 0);
    assert_eq!(check(&r, "unselected_satisfies_chsh")["pass"], true);
}

#[test]
fn chsh_defaults_reach_tsirelson() {
    let out = swapsim(&["chsh"]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("2.828427"), "{stdout}");
}

#[test]
fn chsh_equal_settings_stay_classical() {
    let dir = tempfile::tempdir().unwrap();
    let (code, r) = report(&["chsh", "--settings", "0,0,0,0"], dir.path());
    assert_eq!(code, 0);
    for row in r["results"]["states"].as_array().unwrap() {
        assert!(row["s"].as_f64().unwrap().abs() <= 2.0 + 1e-9, "{row}");
        assert_eq!(row["correlators"].as_array().unwrap().len(), 4);
    }
}

#[test]
fn marginals_self_comparison_has_zero_distance() {
    let dir = tempfile::tempdir().unwrap();
    let (code, r) = report(
        &["marginals", "--d-action", "zz", "--trials", "10000"],
        dir.path(),
    );
    assert_eq!(code, 0);
    for c in r["checks"].as_array().unwrap() {
        assert_eq!(c["value"].as_f64().unwrap(), 0.0, "{c}");
    }
}

#[test]
fn marginals_across_actions_pass() {
    let dir = tempfile::tempdir().unwrap();
    let (code, r) = report(&["marginals", "--trials", "20000"], dir.path());
    assert_eq!(code, 0);
    assert_eq!(r["config"]["d_actions"].as_array().unwrap().len(), 3);
    assert!(r["checks"].as_array().unwrap().len() >= 12 + 6);
}
