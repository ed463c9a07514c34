use std::fs;
use std::process::{Command, Output};

use tempfile::tempdir;

fn ilb(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ilb-evolve"))
        .args(args)
        .env_remove("ILB_EVOLVE_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr_json(o: &Output) -> serde_json::Value {
    let err = String::from_utf8(o.stderr.clone()).unwrap();
    let line = err
        .lines()
        .rev()
        .find(|l| l.starts_with('{'))
        .expect("error json on stderr");
    serde_json::from_str(line).unwrap()
}

fn rows(csv: &str) -> Vec<Vec<f64>> {
    csv.lines()
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect()
}

#[test]
fn so3_trajectory_starts_at_identity() {
    let dir = tempdir().unwrap();
    let csv = dir.path().join("traj.csv");
    let report = dir.path().join("report.json");
    let o = ilb(&[
        "evolve",
        "--instance",
        "so3",
        "--control",
        "constant:0.3,-1.2,0.7",
        "--out",
        csv.to_str().unwrap(),
        "--report",
        report.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("t,x0,"));
    let r = rows(&text);
    assert_eq!(r[0], vec![0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
    assert_eq!(r.last().unwrap()[0], 1.0);
    let rep: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert!(rep["n"].as_u64().unwrap() >= 1);
}

#[test]
fn abelian_inverse_sqrt_reaches_two() {
    let o = ilb(&[
        "evolve",
        "--instance",
        "abelian:1",
        "--control",
        "singular:inverse_sqrt:1",
        "--out",
        "-",
    ]);
    assert!(o.status.success());
    let last = rows(&stdout(&o)).pop().unwrap();
    assert_eq!(last[0], 1.0);
    assert!((last[1] - 2.0).abs() < 1e-6, "{}", last[1]);
}

#[test]
fn output_is_deterministic() {
    let args = [
        "evolve",
        "--instance",
        "gl:2",
        "--control",
        "constant:0.4,1.1,-0.8,0.2",
        "--out",
        "-",
    ];
    assert_eq!(ilb(&args).stdout, ilb(&args).stdout);
}

#[test]
fn forced_piece_count_is_honoured() {
    let dir = tempdir().unwrap();
    let report = dir.path().join("r.json");
    let o = ilb(&[
        "evolve",
        "--instance",
        "so3",
        "--control",
        "constant:0,0,1",
        "--force-N",
        "9",
        "--report",
        report.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let rep: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(rep["n"], 9);
}

#[test]
fn cross_level_report_lists_deviations() {
    let dir = tempdir().unwrap();
    let report = dir.path().join("r.json");
    let o = ilb(&[
        "evolve",
        "--instance",
        "abelian:2",
        "--control",
        "constant:1,-2",
        "--levels",
        "1,2,3",
        "--report",
        report.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let rep: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(rep["reports"].as_array().unwrap().len(), 3);
    for d in rep["deviations"].as_array().unwrap() {
        assert_eq!(d["deviation"].as_f64().unwrap(), 0.0);
    }
}

#[test]
fn malformed_control_json_exits_2() {
    let dir = tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{\"kind\": ").unwrap();
    let o = ilb(&[
        "evolve",
        "--instance",
        "so3",
        "--control",
        bad.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr_json(&o)["exit_code"], 2);
}

#[test]
fn usage_errors_exit_1() {
    let o = ilb(&["evolve", "--instance", "nope:3", "--control", "zero"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stderr_json(&o)["error"], "usage");

    let o = ilb(&["evolve", "--instance", "so3", "--control", "constant:1,2"]);
    assert_eq!(o.status.code(), Some(1));

    let o = ilb(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(1));

    assert_eq!(ilb(&["--help"]).status.code(), Some(0));
}

#[test]
fn bad_thread_env_is_a_usage_error() {
    let o = Command::new(env!("CARGO_BIN_EXE_ilb-evolve"))
        .args(["evolve", "--instance", "so3", "--control", "zero"])
        .env("ILB_EVOLVE_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn check_passes_on_so3() {
    let o = ilb(&["check", "--instance", "so3"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(!stdout(&o).contains("FAIL"));
}

#[test]
fn check_axioms_pass_on_loop() {
    let o = ilb(&["check", "--instance", "loop:8,3", "--samples", "60"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).contains("associativity under refinement"));
}

#[test]
fn corrupted_product_fails_check() {
    let o = ilb(&[
        "check",
        "--instance",
        "so3",
        "--corrupt",
        "--suite",
        "axioms",
    ]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stdout(&o).contains("FAIL  identity law"));
    assert_eq!(stderr_json(&o)["error"], "checks_failed");
}

#[test]
fn bench_piece_count_grows_linearly() {
    let o = ilb(&["bench", "--instance", "so3", "--scales", "1,2,4,8"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.starts_with("instance,scale,mass,n,iterations,wall_seconds"));
    let ns: Vec<(f64, f64)> = out
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[2].parse().unwrap(), f[3].parse().unwrap())
        })
        .collect();
    assert!(ns.windows(2).all(|w| w[1].1 >= w[0].1));
    let rate = ns[0].1 / ns[0].0;
    for (mass, n) in &ns {
        assert!(*n <= 2.0 * rate * mass + 1.0, "N = {n} at mass {mass}");
    }
}

#[test]
fn bench_zero_control_uses_one_piece() {
    let o = ilb(&[
        "bench",
        "--instance",
        "gl:2",
        "--family",
        "zero",
        "--scales",
        "1",
    ]);
    assert!(o.status.success());
    let row = stdout(&o).lines().nth(1).unwrap().to_string();
    let f: Vec<&str> = row.split(',').collect();
    assert_eq!(f[3], "1");
    assert!(f[4].parse::<u64>().unwrap() <= 1);
}

#[test]
fn bench_quotes_instance_names_with_commas() {
    let o = ilb(&[
        "bench",
        "--instance",
        "loop:4,2",
        "--family",
        "zero",
        "--scales",
        "1",
    ]);
    assert!(o.status.success());
    assert!(stdout(&o)
        .lines()
        .nth(1)
        .unwrap()
        .starts_with("\"loop:4,2\","));
}
