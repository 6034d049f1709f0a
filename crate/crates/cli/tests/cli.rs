use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn e2evrp(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_e2evrp"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn generated(dir: &Path) {
    let out = e2evrp(&["generate", "--seed", "3", "--stations", "5", "-o", "g.txt"], dir);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn solve_runs_and_check_accepts() {
    let dir = tempfile::tempdir().unwrap();
    generated(dir.path());
    let out = e2evrp(
        &["solve", "g.txt", "--runs", "5", "--max-iterations", "30", "-o", "g.sol", "--csv", "agg.csv"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["runs"].as_array().unwrap().len(), 5);
    assert_eq!(v["aggregate"]["runs"], 5);
    let seeds: Vec<u64> = v["runs"].as_array().unwrap().iter().map(|r| r["seed"].as_u64().unwrap()).collect();
    assert_eq!(seeds, [1, 2, 3, 4, 5]);

    let out = e2evrp(&["check", "g.txt", "g.sol"], dir.path());
    assert!(out.status.success());
    assert_eq!(json(&out)["feasible"], true);

    let again = e2evrp(&["solve", "g.txt", "--max-iterations", "10", "--csv", "agg.csv"], dir.path());
    assert!(again.status.success());
    let csv = fs::read_to_string(dir.path().join("agg.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "instance,avg,best,t_star_avg,runs");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("metro-s3-r5-L1000,") && lines[1].ends_with(",5"));
}

#[test]
fn check_rejects_missing_customer() {
    let dir = tempfile::tempdir().unwrap();
    generated(dir.path());
    let out = e2evrp(&["solve", "g.txt", "--max-iterations", "20", "-o", "g.sol"], dir.path());
    assert!(out.status.success());
    let sol = fs::read_to_string(dir.path().join("g.sol")).unwrap();
    let mut lines: Vec<&str> = sol.lines().collect();
    let drop = lines.iter().rposition(|l| l.starts_with("L2:")).unwrap();
    lines.remove(drop);
    fs::write(dir.path().join("bad.sol"), lines.join("\n")).unwrap();

    let out = e2evrp(&["check", "g.txt", "bad.sol"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["feasible"], false);
}

#[test]
fn sweep_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = e2evrp(
        &[
            "sweep", "--mode", "battery", "--levels", "900,1500", "--instances", "1", "--runs", "1",
            "--max-iterations", "20", "-o", "s.csv",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("s.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "level,instance_seed,run_seed,cost_L,cost_inf,detour_pct,station_visits");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("900,1,1,") && lines[2].starts_with("1500,1,1,"));
}

#[test]
fn errors_as_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = e2evrp(&["--json-errors", "solve", "missing.txt"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(json(&out)["error"].as_str().unwrap().contains("missing.txt"));
}

#[test]
fn bound_and_graph() {
    let dir = tempfile::tempdir().unwrap();
    let out = e2evrp(&["generate", "--seed", "2", "--stations", "3", "-o", "g.txt"], dir.path());
    assert!(out.status.success());
    let out = e2evrp(&["bound", "g.txt", "--delta", "4"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(json(&out)["bound"].as_i64().unwrap() > 0);
    let out = e2evrp(&["graph", "g.txt", "-o", "g.csv"], dir.path());
    assert!(out.status.success());
    assert!(fs::read_to_string(dir.path().join("g.csv")).unwrap().lines().count() > 1);
}
