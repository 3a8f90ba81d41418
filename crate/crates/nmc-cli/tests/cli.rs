//! End-to-end tests of the `nmc` binary: exit codes, output contracts,
//! config precedence, determinism.

use std::path::PathBuf;
use std::process::{Command, Output};

fn nmc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nmc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_str(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf8 stdout")
}

fn stderr_str(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("utf8 stderr")
}

fn tmp_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name)
}

/// Data rows of a CSV report: comment block and header skipped, cells split
/// on commas (no quoted cells appear in numeric tables).
fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header: Vec<String> = lines
        .next()
        .expect("header")
        .split(',')
        .map(str::to_string)
        .collect();
    let rows = lines
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect();
    (header, rows)
}

fn floats(row: &[String]) -> Vec<f64> {
    row.iter()
        .map(|c| if c == "nan" { f64::NAN } else { c.parse().unwrap() })
        .collect()
}

#[test]
fn solve_r_reports_the_critical_width() {
    let out = nmc(&["solve-r"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_str(&out));
    let doc: serde_json::Value = serde_json::from_str(&stdout_str(&out)).unwrap();
    assert_eq!(doc["meta"]["command"], "solve-r");
    let row = &doc["data"][0];
    assert_eq!(row["alpha"].as_f64().unwrap(), 0.5);
    let r_star = row["R_star"].as_f64().unwrap();
    assert!(
        (r_star - 0.5209443803778682).abs() < 1e-9,
        "R_star = {r_star}"
    );
    assert!(row["lambda1_residual"].as_f64().unwrap().abs() <= 1e-10);
    let bracketing = doc["meta"]["bracketing"].as_array().unwrap();
    assert!(bracketing.len() >= 3);
    assert!(bracketing[0]["r"].as_f64().unwrap() == 1.0);
}

#[test]
fn alpha_outside_the_unit_interval_is_a_usage_error() {
    let out = nmc(&["solve-r", "--alpha", "1.5"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_str(&out).contains("outside (0,1)"));
}

#[test]
fn spectrum_table_is_ordered_and_complete() {
    let out = nmc(&["spectrum", "--kmax", "16"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_str(&out));
    let text = stdout_str(&out);
    let (header, rows) = csv_rows(&text);
    assert_eq!(header, ["k", "lambda_k", "rescaled_lambda_k", "mu_inf"]);
    assert_eq!(rows.len(), 17);

    let lambdas: Vec<f64> = rows.iter().map(|r| floats(r)[1]).collect();
    assert!(lambdas[0] < 0.0);
    assert!(lambdas[1].abs() <= 1e-8, "lambda_1 = {}", lambdas[1]);
    for k in 1..lambdas.len() {
        assert!(lambdas[k] > lambdas[k - 1], "ordering breach at k = {k}");
    }

    let last = floats(rows.last().unwrap());
    let (rescaled, mu_inf) = (last[2], last[3]);
    assert!(
        (rescaled / mu_inf - 1.0).abs() < 0.05,
        "rescaled tail {rescaled} vs mu_inf {mu_inf}"
    );
    assert!(text.contains("# r_source=solved"));
}

#[test]
fn spectrum_with_kmax_zero_has_one_row() {
    let out = nmc(&["spectrum", "--kmax", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let (_, rows) = csv_rows(&stdout_str(&out));
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][0], "0");
    assert_eq!(rows[0][2], "nan");
}

#[test]
fn branch_rows_are_sorted_and_converged() {
    let out = nmc(&["branch", "--a-max", "0.02", "--steps", "2", "--modes", "8"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_str(&out));
    let (header, rows) = csv_rows(&stdout_str(&out));
    assert_eq!(
        &header[..5],
        &["a", "lambda", "period", "v_norm", "residual"]
    );
    assert_eq!(header.len(), 5 + 9);
    assert_eq!(rows.len(), 5);

    let parsed: Vec<Vec<f64>> = rows.iter().map(|r| floats(r)).collect();
    for w in parsed.windows(2) {
        assert!(w[0][0] < w[1][0], "rows sorted by amplitude");
    }
    assert_eq!(parsed[2][0], 0.0);
    for row in &parsed {
        assert!(row[4] <= 1e-9, "residual {} above gate", row[4]);
        assert!(row[1] >= 1.0 - 1e-9, "lambda {} below 1", row[1]);
    }
    let lam_tip = parsed[4][1];
    assert!(lam_tip > 1.0 && lam_tip < 1.01);
}

#[test]
fn verify_quad_suite_passes() {
    let out = nmc(&["verify", "--suite", "quad"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_str(&out));
    let (header, rows) = csv_rows(&stdout_str(&out));
    assert_eq!(
        header,
        ["suite", "check", "status", "measured", "threshold", "detail"]
    );
    assert!(!rows.is_empty());
    for row in &rows {
        assert_eq!(row[0], "quad");
        assert_eq!(row[2], "pass", "failed check {}", row[1]);
    }
}

#[test]
fn verify_rejects_unknown_suites() {
    let out = nmc(&["verify", "--suite", "nope"]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr_str(&out);
    assert!(err.contains("valid suites"), "stderr: {err}");
    assert!(err.contains("kernels"));
}

#[test]
fn set_eval_disc_curvature_is_constant() {
    let out = nmc(&["set-eval"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_str(&out));
    let (header, rows) = csv_rows(&stdout_str(&out));
    assert_eq!(header, ["t", "x1", "x2", "h"]);
    assert_eq!(rows.len(), 8);
    let hs: Vec<f64> = rows.iter().map(|r| floats(r)[3]).collect();
    let mean = hs.iter().sum::<f64>() / hs.len() as f64;
    assert!(mean > 0.0 && mean.is_finite());
    for h in &hs {
        assert!((h - mean).abs() / mean < 1e-6, "disc value drifted: {h}");
    }
}

#[test]
fn nmc_eval_routes_agree_through_the_registry() {
    let config = tmp_path("route_agreement.conf");
    std::fs::write(&config, "alpha=0.4\npoints=3\nprofile=1.0,0.05\n").unwrap();
    let base = ["nmc-eval", "--config", config.to_str().unwrap()];

    let graph = nmc(&base);
    assert_eq!(graph.status.code(), Some(0), "stderr: {}", stderr_str(&graph));

    let with_method = tmp_path("route_agreement_set.conf");
    std::fs::write(
        &with_method,
        "alpha=0.4\npoints=3\nprofile=1.0,0.05\nmethod=set\n",
    )
    .unwrap();
    let set = nmc(&["nmc-eval", "--config", with_method.to_str().unwrap()]);
    assert_eq!(set.status.code(), Some(0), "stderr: {}", stderr_str(&set));

    let (_, g_rows) = csv_rows(&stdout_str(&graph));
    let (_, s_rows) = csv_rows(&stdout_str(&set));
    assert_eq!(g_rows.len(), 3);
    for (g, s) in g_rows.iter().zip(&s_rows) {
        let (hg, hs) = (floats(g)[1], floats(s)[1]);
        assert!(
            (hg - hs).abs() / hg.abs() < 1e-5,
            "routes disagree: {hg} vs {hs}"
        );
    }
}

#[test]
fn flags_override_the_config_file() {
    let config = tmp_path("precedence.conf");
    std::fs::write(&config, "alpha=0.25\n").unwrap();

    let from_file = nmc(&["solve-r", "--config", config.to_str().unwrap()]);
    assert_eq!(from_file.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_str(&stdout_str(&from_file)).unwrap();
    assert_eq!(doc["meta"]["config"]["alpha"].as_f64().unwrap(), 0.25);

    let overridden = nmc(&[
        "solve-r",
        "--config",
        config.to_str().unwrap(),
        "--alpha",
        "0.5",
    ]);
    assert_eq!(overridden.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_str(&stdout_str(&overridden)).unwrap();
    assert_eq!(doc["meta"]["config"]["alpha"].as_f64().unwrap(), 0.5);
}

#[test]
fn unknown_config_keys_are_rejected() {
    let config = tmp_path("unknown_key.conf");
    std::fs::write(&config, "widht=3\n").unwrap();
    let out = nmc(&["solve-r", "--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_str(&out).contains("unknown key"));
}

#[test]
fn reruns_are_byte_identical() {
    let path = tmp_path("det.csv");
    let run = || {
        let out = nmc(&["spectrum", "--kmax", "4", "--out", path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
        assert!(out.stdout.is_empty());
        std::fs::read(&path).unwrap()
    };
    let first = run();
    let second = run();
    assert_eq!(first, second, "outputs differ between identical runs");
}

#[test]
fn mismatched_method_and_shape_is_a_usage_error() {
    let config = tmp_path("mismatch.conf");
    std::fs::write(&config, "shape=band:0.9\nmethod=boundary\n").unwrap();
    let out = nmc(&["set-eval", "--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_str(&out).contains("does not apply"));

    let bad_method = tmp_path("bad_method.conf");
    std::fs::write(&bad_method, "method=secant\n").unwrap();
    let out = nmc(&["set-eval", "--config", bad_method.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_str(&out).contains("valid methods"));
}

#[test]
fn nonpositive_profiles_are_rejected_before_evaluation() {
    let config = tmp_path("sinking_profile.conf");
    std::fs::write(&config, "profile=0.1,0.5\n").unwrap();
    let out = nmc(&["nmc-eval", "--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_str(&out).contains("positive"));
}

#[test]
fn bad_shape_specs_are_usage_errors() {
    for spec in ["disc", "disc:0", "triangle:1.0", "ellipse:1.0", "disc:x"] {
        let config = tmp_path(&format!("shape_{}.conf", spec.replace([':', ','], "_")));
        std::fs::write(&config, format!("shape={spec}\n")).unwrap();
        let out = nmc(&["set-eval", "--config", config.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(1), "spec {spec:?} was accepted");
    }
}
