use std::path::Path;
use std::process::{Command, Output};

use corrmimo::csv::HEADER;

fn corrmimo(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_corrmimo")).args(args).current_dir(dir).output().expect("spawn corrmimo")
}

fn fig1_config(trials: usize, extra: &str) -> String {
    format!(
        r#"{{
        "experiment": "fig1_small",
        "models": [
            {{"name": "matched", "kind": "separable", "lambda_t": [8, 8, 0, 0], "lambda_r": [4, 4, 4, 4]}},
            {{"name": "mismatched", "kind": "separable", "lambda_t": [4, 4, 4, 4], "lambda_r": [4, 4, 4, 4]}}
        ],
        "m": 2, "snr_grid_db": [0, 10, 20], "trials": {trials}, "seed": 9,
        "schemes": ["perf_unconst", "stat_semi"],
        "output": "out/fig1.csv"{extra}
    }}"#
    )
}

#[test]
fn run_writes_deterministic_csv() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("cfg.json"), fig1_config(50, "")).unwrap();
    let first = corrmimo(&["run", "cfg.json"], dir.path());
    assert!(first.status.success(), "{}", String::from_utf8_lossy(&first.stderr));
    let a = std::fs::read_to_string(dir.path().join("out/fig1.csv")).unwrap();
    let mut lines = a.lines();
    assert_eq!(lines.next(), Some(HEADER));
    let data: Vec<&str> = lines.filter(|l| !l.contains(",meta,")).collect();
    // 2 channels x 2 schemes x 3 SNR points x 4 metrics.
    assert_eq!(data.len(), 48);
    assert!(data.iter().any(|l| l.starts_with("fig1_small,10,matched-stat_semi,mutual_info,")));

    let second = corrmimo(&["run", "cfg.json"], dir.path());
    assert!(second.status.success());
    assert_eq!(a, std::fs::read_to_string(dir.path().join("out/fig1.csv")).unwrap());
}

#[test]
fn benchmark_adds_relative_losses() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("cfg.json"), fig1_config(30, r#", "benchmark": "perf_unconst""#)).unwrap();
    let out = corrmimo(&["run", "cfg.json"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("out/fig1.csv")).unwrap();
    assert!(csv.contains(",mismatched-stat_semi,delta_i_vs_perf_unconst,"));
    assert!(!csv.contains(",mismatched-perf_unconst,delta_i_vs_perf_unconst,"));
}

#[test]
fn invalid_config_exits_2_naming_the_field() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("cfg.json"), fig1_config(0, "")).unwrap();
    let out = corrmimo(&["run", "cfg.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("trials"));

    std::fs::write(dir.path().join("bad.json"), "{ not json").unwrap();
    assert_eq!(corrmimo(&["run", "bad.json"], dir.path()).status.code(), Some(2));
    assert_eq!(corrmimo(&["run", "missing.json"], dir.path()).status.code(), Some(2));
}

#[test]
fn strict_non_convergence_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fig1_config(20, "").replace(r#"["perf_unconst", "stat_semi"]"#, r#"[{"stat_opt": {"batch": 200, "max_iters": 1}}]"#);
    std::fs::write(dir.path().join("cfg.json"), &cfg).unwrap();
    let lenient = corrmimo(&["run", "cfg.json"], dir.path());
    assert!(lenient.status.success(), "{}", String::from_utf8_lossy(&lenient.stderr));
    assert!(String::from_utf8_lossy(&lenient.stderr).contains("did not converge"));
    let strict = corrmimo(&["run", "cfg.json", "--strict"], dir.path());
    assert_eq!(strict.status.code(), Some(3));
}

#[test]
fn reproduce_rejects_unknown_figure() {
    let dir = tempfile::tempdir().unwrap();
    let out = corrmimo(&["reproduce", "fig9", "--out", "."], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("fig9"));
}

#[test]
fn reproduce_fig1_layout() {
    let dir = tempfile::tempdir().unwrap();
    let out = corrmimo(&["reproduce", "fig1", "--trials", "20", "--out", "res"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("res/fig1.csv")).unwrap();
    assert!(csv.contains("fig1,,meta,snr_grid_db=-10:2:30 (default),,,20,1"));
    assert!(csv.contains("fig1,,meta,trials=20,,,20,1"));
    for scheme in ["matched-perf", "matched-stat", "mismatched-perf", "mismatched-stat"] {
        assert_eq!(csv.lines().filter(|l| l.contains(&format!(",{scheme},mutual_info,"))).count(), 21);
    }
}

#[test]
fn selftest_passes_and_reports_injected_fault() {
    let dir = tempfile::tempdir().unwrap();
    let ok = corrmimo(&["selftest"], dir.path());
    assert_eq!(ok.status.code(), Some(0));
    let text = String::from_utf8_lossy(&ok.stdout).to_string();
    assert!(text.contains("suite waterfill_oracle: 302/302 passed"));
    assert_eq!(text, String::from_utf8_lossy(&corrmimo(&["selftest"], dir.path()).stdout));

    let bad = corrmimo(&["selftest", "--inject-fault", "waterfill"], dir.path());
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stdout).contains("FAIL waterfill_oracle"));
}
