use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::tempdir;

fn qbench(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qbench")).args(args).current_dir(cwd).output().expect("spawn qbench")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_experiment(dir: &Path, body: &str) -> String {
    let path = dir.join("exp.json");
    fs::write(&path, body).unwrap();
    path.display().to_string()
}

#[test]
fn run_writes_artifacts_and_report_rerenders() {
    let dir = tempdir().unwrap();
    let exp = write_experiment(
        dir.path(),
        r#"{"algorithm": {"kind": "DTQW", "position_qubits": 2, "steps": 1}, "machine": "bogota"}"#,
    );
    let out = qbench(&["run", &exp, "--shots", "5000", "--seed", "3", "--out", "run"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).contains("DTQW"));
    for f in ["record.json", "report.json", "distributions.csv", "device_vs_ideal.csv", "benchmarks.csv"] {
        assert!(dir.path().join("run").join(f).is_file(), "missing {f}");
    }
    fs::remove_file(dir.path().join("run/distributions.csv")).unwrap();
    let report = qbench(&["report", "run"], dir.path());
    assert_eq!(report.status.code(), Some(0));
    assert_eq!(
        stdout(&report).lines().nth(1),
        stdout(&out).lines().nth(1),
        "re-rendered table differs from the original"
    );
    assert!(dir.path().join("run/distributions.csv").is_file());
}

#[test]
fn same_seed_gives_same_report() {
    let dir = tempdir().unwrap();
    let exp = write_experiment(
        dir.path(),
        r#"{"algorithm": {"kind": "QPE", "counting_qubits": 3, "phase": 0.3333333333333333}, "machine": "santiago", "shots": 2000, "seed": 11}"#,
    );
    let a = qbench(&["run", &exp], dir.path());
    let b = qbench(&["run", &exp], dir.path());
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(stdout(&a), stdout(&b));
    let c = qbench(&["run", &exp, "--seed", "12"], dir.path());
    assert_ne!(stdout(&a).lines().nth(1), stdout(&c).lines().nth(1));
}

#[test]
fn ingested_counts_are_reported() {
    let dir = tempdir().unwrap();
    fs::write(
        dir.path().join("counts.json"),
        r#"{"shots": 100, "counts": {"01": 48, "11": 47, "00": 5}}"#,
    )
    .unwrap();
    let exp = write_experiment(
        dir.path(),
        r#"{"algorithm": {"kind": "DTQW", "position_qubits": 2, "steps": 1}, "machine": "noiseless"}"#,
    );
    let out = qbench(&["run", &exp, "--counts", "counts.json"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let row = stdout(&out).lines().nth(1).unwrap().to_string();
    let cols: Vec<&str> = row.split_whitespace().collect();
    // noiseless machine: gamma is exactly zero and alpha equals beta
    assert_eq!(cols[4], "0.0000");
    assert_eq!(cols[2], cols[3]);
}

#[test]
fn suite_on_noiseless_machine() {
    let dir = tempdir().unwrap();
    let out = qbench(&["suite", "table3", "--machine", "noiseless", "--exact-device", "--out", "suite"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    for alg in ["DTQW", "CTQW", "PD", "QPE", "QSa", "QSn"] {
        assert!(text.contains(alg), "missing {alg}");
    }
    assert!(dir.path().join("suite/benchmarks.csv").is_file());
    let csv = fs::read_to_string(dir.path().join("suite/benchmarks.csv")).unwrap();
    assert_eq!(csv.lines().count(), 7);
    let report = qbench(&["report", "suite"], dir.path());
    assert_eq!(report.status.code(), Some(0));
    assert_eq!(stdout(&report).lines().count(), 7);
}

#[test]
fn unknown_preset_is_a_validation_error() {
    let dir = tempdir().unwrap();
    let out = qbench(&["suite", "table9"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("table9"));
}

#[test]
fn invalid_experiment_exits_one() {
    let dir = tempdir().unwrap();
    let exp = write_experiment(
        dir.path(),
        r#"{"algorithm": {"kind": "DTQW", "position_qubits": 2, "steps": 1}, "machine": "bogota", "shots": 0}"#,
    );
    assert_eq!(qbench(&["run", &exp], dir.path()).status.code(), Some(1));
    let exp = write_experiment(dir.path(), r#"{"algorithm": {"kind": "XYZ"}, "machine": "bogota"}"#);
    assert_eq!(qbench(&["run", &exp], dir.path()).status.code(), Some(1));
}

#[test]
fn width_cap_exits_two() {
    let dir = tempdir().unwrap();
    let edges: Vec<String> = (0..15).map(|i| format!("[{i}, {}]", i + 1)).collect();
    fs::write(
        dir.path().join("wide.json"),
        format!(r#"{{"name": "wide", "num_qubits": 16, "edges": [{}]}}"#, edges.join(", ")),
    )
    .unwrap();
    let exp = write_experiment(
        dir.path(),
        r#"{"algorithm": {"kind": "QPE", "counting_qubits": 12, "phase": 0.25}, "machine": "wide.json", "shots": 100}"#,
    );
    let out = qbench(&["run", &exp], dir.path());
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn decompose_cycle_prints_terms_and_writes_circuit() {
    let dir = tempdir().unwrap();
    let out = qbench(&["decompose", "--cycle", "4", "--time", "3", "--out", "pd.txt"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["terms"], serde_json::json!([["IX", 0.5], ["XX", 0.5]]));
    assert_eq!(v["reps"], 1);
    assert!(fs::read_to_string(dir.path().join("pd.txt")).unwrap().starts_with("qubits 2"));
    let stats = qbench(&["stats", "pd.txt"], dir.path());
    assert_eq!(stats.status.code(), Some(0));
    assert!(stdout(&stats).contains("workspace 2"));
}

#[test]
fn decompose_matrix_file_with_eps_and_reps() {
    let dir = tempdir().unwrap();
    fs::write(dir.path().join("h.json"), r#"{"matrix": [[1, 1], [1, -1]]}"#).unwrap();
    let out = qbench(&["decompose", "h.json", "--time", "1", "--eps", "0.5"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["all_commute"], false);
    // ‖X + Z‖ = √2, so (‖H‖t)²/ε = 4
    assert_eq!(v["reps"], 4);
    let out = qbench(&["decompose", "h.json", "--time", "1", "--reps", "7"], dir.path());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["reps"], 7);
    fs::write(dir.path().join("bad.json"), r#"{"matrix": [[1, 2], [3, 4]]}"#).unwrap();
    assert_eq!(qbench(&["decompose", "bad.json", "--time", "1"], dir.path()).status.code(), Some(1));
}

#[test]
fn stats_reports_routed_circuit() {
    let dir = tempdir().unwrap();
    fs::write(dir.path().join("c.txt"), "h 0\ncx 0 4\nmeasure 4 -> 0\n").unwrap();
    let out = qbench(&["stats", "c.txt", "--machine", "bogota"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("gates 3\n"), "{text}");
    assert!(text.contains("on bogota"), "{text}");
    fs::write(dir.path().join("bad.txt"), "h 0\nfoo 1\n").unwrap();
    let bad = qbench(&["stats", "bad.txt"], dir.path());
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("line 2"));
}
