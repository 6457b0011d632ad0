//! Command-line behavior: documented examples, exit codes, CSV dialect and
//! configuration precedence.

use std::collections::HashMap;
use std::process::{Command, Output};

fn conewave(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_conewave"))
        .args(args)
        .env_remove("CONEWAVE_THREADS")
        .output()
        .expect("conewave binary runs")
}

/// Data rows of a CSV document as header-keyed maps.
fn rows(text: &str) -> Vec<HashMap<String, String>> {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header: Vec<String> = lines.next().expect("header row").split(',').map(String::from).collect();
    lines
        .map(|l| header.iter().cloned().zip(l.split(',').map(String::from)).collect())
        .collect()
}

fn field(row: &HashMap<String, String>, key: &str) -> f64 {
    row[key].parse().unwrap_or_else(|_| panic!("{key} = {} is not a number", row[key]))
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn temp_path(name: &str) -> std::path::PathBuf {
    std::env::temp_dir().join(format!("conewave-cli-{}-{name}", std::process::id()))
}

#[test]
fn kernel_on_the_plane_matches_free_kernel() {
    let out = conewave(&["kernel", "--rho", "1", "--t", "2", "--r1", "1", "--r2", "1", "--dtheta", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let rows = rows(&stdout(&out));
    assert_eq!(rows.len(), 1);
    // (1/2π)(t² − 0)^{−1/2} at t = 2.
    let expected = 1.0 / (4.0 * std::f64::consts::PI);
    assert!((field(&rows[0], "K_geom") - expected).abs() < 1e-15);
    assert!((field(&rows[0], "K_geom") - 0.0795775).abs() < 1e-7);
    assert_eq!(field(&rows[0], "K_diff"), 0.0);
}

#[test]
fn kernel_vanishes_before_the_front() {
    let out = conewave(&["kernel", "--rho", "1", "--t", "1", "--r1", "1", "--r2", "1", "--dtheta", "1.5707963"]);
    assert_eq!(out.status.code(), Some(0));
    let rows = rows(&stdout(&out));
    assert_eq!(rows[0]["region"], "I");
    assert_eq!(field(&rows[0], "K_total"), 0.0);
}

#[test]
fn kernel_csv_dialect() {
    let text = stdout(&conewave(&["kernel", "--rho", "0.5", "--t", "3,4", "--r1", "1", "--r2", "0.7,1.1"]));
    let meta: Vec<&str> = text.lines().filter(|l| l.starts_with('#')).collect();
    let hash_line = meta.iter().find(|l| l.starts_with("# config_hash = ")).expect("hash metadata");
    let hash = hash_line.trim_start_matches("# config_hash = ");
    assert_eq!(hash.len(), 16);
    let rows = rows(&text);
    assert_eq!(rows.len(), 4);
    for r in &rows {
        assert_eq!(r["config_hash"], hash);
        // 17 significant digits in scientific form.
        let mantissa = r["K_geom"].split('e').next().unwrap().trim_start_matches('-');
        assert_eq!(mantissa.len(), 18, "{}", r["K_geom"]);
    }
}

#[test]
fn missing_rho_prints_usage_and_exits_2() {
    let out = conewave(&["kernel", "--t", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("--rho"), "{err}");
    assert!(err.contains("Usage: conewave kernel"), "{err}");
}

#[test]
fn invalid_values_exit_2() {
    assert_eq!(conewave(&["kernel", "--rho", "-1"]).status.code(), Some(2));
    assert_eq!(conewave(&["kernel", "--rho", "1", "--t", "x"]).status.code(), Some(2));
    assert_eq!(conewave(&["wedge", "--alpha", "1", "--bc", "robin"]).status.code(), Some(2));
    assert_eq!(conewave(&["verify", "--suite", "huge"]).status.code(), Some(2));
    assert_eq!(conewave(&["nonsense"]).status.code(), Some(2));
}

#[test]
fn config_file_sits_between_flags_and_defaults() {
    let path = temp_path("config.txt");
    std::fs::write(&path, "rho = 0.5\nt = 3\n# comment\nr2 = 2\n").unwrap();
    let p = path.to_str().unwrap();
    let from_file = rows(&stdout(&conewave(&["kernel", "--config", p])));
    assert_eq!(field(&from_file[0], "rho"), 0.5);
    assert_eq!(field(&from_file[0], "t"), 3.0);
    assert_eq!(field(&from_file[0], "r2"), 2.0);
    assert_eq!(field(&from_file[0], "r1"), 1.0);
    let flagged = rows(&stdout(&conewave(&["kernel", "--config", p, "--t", "5"])));
    assert_eq!(field(&flagged[0], "t"), 5.0);
    assert_eq!(field(&flagged[0], "rho"), 0.5);
    std::fs::remove_file(&path).unwrap();
}

#[test]
fn hash_ignores_thread_count_and_output_path() {
    let path = temp_path("kernel.csv");
    let a = stdout(&conewave(&["kernel", "--rho", "0.75", "--t", "2.5", "--threads", "1"]));
    let status = conewave(&["kernel", "--rho", "0.75", "--t", "2.5", "--threads", "3", "--out", path.to_str().unwrap()]);
    assert_eq!(status.status.code(), Some(0));
    let b = std::fs::read_to_string(&path).unwrap();
    assert_eq!(a, b);
    std::fs::remove_file(&path).unwrap();
}

#[test]
fn wedge_quarter_plane_matches_images() {
    let out = conewave(&["wedge", "--alpha", "1.5707963", "--bc", "dirichlet"]);
    assert_eq!(out.status.code(), Some(0));
    let rows = rows(&stdout(&out));
    assert_eq!(rows.len(), 60);
    let worst = rows.iter().map(|r| field(r, "abs_diff")).fold(0.0, f64::max);
    assert!(worst <= 1e-8, "{worst}");
}

#[test]
fn wedge_without_oracle_leaves_columns_empty() {
    let out = conewave(&["wedge", "--alpha", "2.0943951", "--bc", "neumann", "--t", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let rows = rows(&stdout(&out));
    assert!(rows.iter().all(|r| r["u_image_oracle"].is_empty() && r["abs_diff"].is_empty()));
}

#[test]
fn propagate_writes_field_blocks() {
    let path = temp_path("field.csv");
    let out = conewave(&["propagate", "--rho", "1.5", "--t", "1", "--points", "5", "--field-output", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(rows(&stdout(&out)).len(), 5);
    let field_rows = rows(&std::fs::read_to_string(&path).unwrap());
    assert!(!field_rows.is_empty());
    // Modes come in blocks ordered by j with ν = |j|/ρ.
    let js: Vec<i64> = field_rows.iter().map(|r| r["j"].parse().unwrap()).collect();
    assert!(js.windows(2).all(|w| w[0] <= w[1]));
    for r in &field_rows {
        let j: f64 = r["j"].parse().unwrap();
        assert!((field(r, "nu") - j.abs() / 1.5).abs() < 1e-15);
    }
    std::fs::remove_file(&path).unwrap();
}

#[test]
fn dispersive_report_has_half_power_slope() {
    let out = conewave(&["dispersive", "--rho", "0.6666667", "--t-lo", "5", "--t-hi", "50"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let slope = v["slope"].as_f64().unwrap();
    assert!((-0.6..=-0.4).contains(&slope), "{slope}");
    assert_eq!(v["values"]["fit"]["slope"].as_f64().unwrap(), slope);
    assert_eq!(v["check_name"], "dispersive_decay");
}

#[test]
fn strichartz_and_morawetz_reports() {
    let s = conewave(&["strichartz", "--rho", "0.6666667", "--t-max", "2", "--mu", "0.5,2"]);
    assert_eq!(s.status.code(), Some(0), "{}", String::from_utf8_lossy(&s.stderr));
    let v: serde_json::Value = serde_json::from_slice(&s.stdout).unwrap();
    assert_eq!(v["values"]["ratios"].as_array().unwrap().len(), 2);
    let bad = conewave(&["strichartz", "--rho", "1", "--p", "2", "--q", "2", "--gamma", "0"]);
    assert_eq!(bad.status.code(), Some(2));
    let m = conewave(&["morawetz", "--rho", "0.6666667", "--t-max", "10", "--draws", "2"]);
    assert_eq!(m.status.code(), Some(0), "{}", String::from_utf8_lossy(&m.stderr));
    let v: serde_json::Value = serde_json::from_slice(&m.stdout).unwrap();
    assert!(v["values"]["max_draw_ratio"].as_f64().unwrap() <= v["values"]["frozen_C"].as_f64().unwrap());
}

#[test]
fn verify_writes_summary_and_tables() {
    let dir = temp_path("verify");
    let out = conewave(&["verify", "--suite", "quick", "--checks", "1,2", "--out-dir", dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 2);
    assert!(text.lines().all(|l| l.contains(": PASS")), "{text}");
    let summary = std::fs::read_to_string(dir.join("summary.csv")).unwrap();
    assert!(summary.contains("# status = ok"));
    assert!(dir.join("ac01_plane_recovery.csv").exists());
    assert!(dir.join("ac02_quotient_recovery.csv").exists());
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["pass"], true);
    std::fs::remove_dir_all(&dir).unwrap();
}
