//! Exercises the binary end to end: simulate, certify, and failure paths.

use std::process::Command;

fn bifluid() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bifluid"))
}

#[test]
fn simulate_then_certify_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let out = bifluid()
        .args(["simulate", "--scenario", "compressive", "--total-time", "0.05"])
        .args(["--out", dir.path().to_str().unwrap()])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = std::fs::read_to_string(dir.path().join("report.json")).unwrap();
    assert!(report.contains("\"all_passed\": true"), "{report}");

    let csv_path = dir.path().join("trajectory.csv");
    let certify = bifluid()
        .args(["certify", "--scenario", "compressive"])
        .args(["--trajectory", csv_path.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(certify.status.success(), "{}", String::from_utf8_lossy(&certify.stdout));

    // Push one Z value far outside the cone; certify must notice.
    let text = std::fs::read_to_string(&csv_path).unwrap();
    let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
    let mut fields: Vec<String> = lines[40].split(',').map(str::to_string).collect();
    fields[6] = "9.9e0".into();
    lines[40] = fields.join(",");
    let bad_path = dir.path().join("bad.csv");
    std::fs::write(&bad_path, lines.join("\n") + "\n").unwrap();
    let bad = bifluid()
        .args(["certify", "--scenario", "compressive"])
        .args(["--trajectory", bad_path.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(1), "{}", String::from_utf8_lossy(&bad.stdout));
    assert!(String::from_utf8_lossy(&bad.stdout).contains("FAIL"));
}

#[test]
fn unknown_scenario_reports_usage_error() {
    let out = bifluid().args(["simulate", "--scenario", "no-such"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown bundled scenario"));
}

#[test]
fn malformed_trajectory_reports_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("garbage.csv");
    std::fs::write(&path, "step,time\n1,2\n").unwrap();
    let out = bifluid()
        .args(["certify", "--scenario", "constant"])
        .args(["--trajectory", path.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn eps_sweep_runs_within_budget() {
    let start = std::time::Instant::now();
    let out = bifluid()
        .args(["sweep-eps", "--scenario", "smooth", "--total-time", "0.05"])
        .args(["--eps-list", "0.04,0.02,0.01"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(start.elapsed().as_secs() < 120);
    assert!(String::from_utf8_lossy(&out.stdout).contains("cauchy"));
}
